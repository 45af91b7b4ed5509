//! The safe PI function game for `k = 3`: balanced query selection, the
//! per-round plan of up to fourteen points, and the main loop.

use serde::Serialize;

use crate::candidates::{cand_sets, cand_sets_between, CandidateReport};
use crate::error::{usage, Error, Result};
use crate::functions::{SignFunction, SignVector};
use crate::lattice::{GridShape, Point, SignPattern, Slice};
use crate::tracker::{RevealPolicy, SafeState};

/// Number of points in `S` with `φ_i (x_i - q_i) ≥ 0` (or `> 0` when
/// `strict`) for every `i` in the domain of `φ`.
pub fn orthant_mass(s: &[Point], q: &Point, phi: &SignPattern, strict: bool) -> usize {
    s.iter().filter(|x| phi.admits(x, q, strict)).count()
}

/// Smallest `t` with `2·|{x ∈ S : x_i ≤ t}| ≥ |S|`.
fn median_threshold(s: &[&Point], i: usize) -> u32 {
    let max = s.iter().map(|x| x[i]).max().unwrap_or(1) as usize;
    let mut hist = vec![0usize; max + 1];
    for x in s {
        hist[x[i] as usize] += 1;
    }
    let mut cum = 0;
    for (t, h) in hist.iter().enumerate().skip(1) {
        cum += h;
        if 2 * cum >= s.len() {
            return t as u32;
        }
    }
    max as u32
}

/// Pivot and signs on the coordinates `coords` such that both closed
/// generalized orthants hold at least `|S| / 2^{|I|}` points. Coordinates
/// outside `coords` are copied from `base`.
pub fn balanced_split_from(s: &[Point], coords: &[usize], base: &Point) -> Result<(Point, SignPattern)> {
    if s.is_empty() {
        return usage("balanced split of an empty set");
    }
    if coords.is_empty() {
        return usage("balanced split needs a nonempty coordinate set");
    }
    let mut q = *base;
    let first = coords[0];
    let all: Vec<&Point> = s.iter().collect();
    q.set(first, median_threshold(&all, first));
    let mut phi = SignPattern::new(&[(first, 1)])?;
    for &i in &coords[1..] {
        let a: Vec<&Point> = s.iter().filter(|x| phi.admits(x, &q, false)).collect();
        let neg = phi.neg();
        let b: Vec<&Point> = s.iter().filter(|x| neg.admits(x, &q, false)).collect();
        let max = s.iter().map(|x| x[i]).max().unwrap() as usize;
        let mut ha = vec![0usize; max + 1];
        let mut hb = vec![0usize; max + 1];
        for x in &a {
            ha[x[i] as usize] += 1;
        }
        for x in &b {
            hb[x[i] as usize] += 1;
        }
        let (mut ca, mut cb) = (0, 0);
        let mut chosen = None;
        for t in 1..=max {
            ca += ha[t];
            cb += hb[t];
            let a_ok = 2 * ca >= a.len();
            if a_ok || 2 * cb >= b.len() {
                chosen = Some((t as u32, if a_ok { -1 } else { 1 }));
                break;
            }
        }
        let (t, sign) = chosen.expect("the threshold exists at the maximum value");
        q.set(i, t);
        phi.set(i, sign);
    }
    Ok((q, phi))
}

/// `balanced_split` with the remaining coordinates of the pivot set to 1.
pub fn balanced_split(s: &[Point], coords: &[usize]) -> Result<(Point, SignPattern)> {
    let k = s.first().map_or(1, |x| x.k());
    if coords.iter().any(|&i| i >= k) {
        return usage("coordinate out of range");
    }
    balanced_split_from(s, coords, &Point::splat(k, 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SelectionCase {
    Orthant3d,
    Slice2d,
    Slice1d,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BalancedSelection {
    pub case: SelectionCase,
    pub slice: Slice,
    pub pivot: Point,
    pub signs: SignPattern,
    /// Masses of the two opposite orthants (strict for 3D and 2D, closed
    /// rays for 1D), restricted to the slice.
    pub masses: (usize, usize),
    pub total: usize,
}

impl BalancedSelection {
    /// The case threshold: mass · divisor ≥ |S|.
    pub fn divisor(&self) -> usize {
        match self.case {
            SelectionCase::Orthant3d => 16,
            SelectionCase::Slice2d => 400,
            SelectionCase::Slice1d => 1600,
        }
    }

    pub fn certified(&self) -> bool {
        let d = self.divisor();
        self.masses.0 * d >= self.total && self.masses.1 * d >= self.total
    }
}

/// Recounts the masses claimed by a selection.
pub fn recount(s: &[Point], sel: &BalancedSelection) -> (usize, usize) {
    let on: Vec<Point> = s.iter().filter(|x| sel.slice.contains(x)).copied().collect();
    let strict = sel.case != SelectionCase::Slice1d;
    (orthant_mass(&on, &sel.pivot, &sel.signs, strict), orthant_mass(&on, &sel.pivot, &sel.signs.neg(), strict))
}

/// The cascade of the balanced-point lemma on `S ⊆ [n]³`.
pub fn balanced_select_3d(s: &[Point], shape: &GridShape) -> Result<BalancedSelection> {
    if shape.k() != 3 {
        return usage("balanced selection is defined for k = 3");
    }
    if s.is_empty() {
        return usage("balanced selection of an empty set");
    }
    let total = s.len();
    let (q, phi) = balanced_split(s, &[0, 1, 2])?;
    let m1 = orthant_mass(s, &q, &phi, true);
    let m2 = orthant_mass(s, &q, &phi.neg(), true);
    if 16 * m1 >= total && 16 * m2 >= total {
        return Ok(BalancedSelection {
            case: SelectionCase::Orthant3d,
            slice: Slice::full(3),
            pivot: q,
            signs: phi,
            masses: (m1, m2),
            total,
        });
    }
    // The coordinatewise median pivot with any of the four sign classes
    // also certifies the first case; it catches sets such as diagonals.
    let all: Vec<&Point> = s.iter().collect();
    let med = Point::new(&[median_threshold(&all, 0), median_threshold(&all, 1), median_threshold(&all, 2)]);
    for signs in [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]] {
        let phi = SignPattern::new(&[(0, signs[0]), (1, signs[1]), (2, signs[2])])?;
        let m1 = orthant_mass(s, &med, &phi, true);
        let m2 = orthant_mass(s, &med, &phi.neg(), true);
        if 16 * m1 >= total && 16 * m2 >= total {
            return Ok(BalancedSelection {
                case: SelectionCase::Orthant3d,
                slice: Slice::full(3),
                pivot: med,
                signs: phi,
                masses: (m1, m2),
                total,
            });
        }
    }
    // heaviest axis-aligned plane
    let mut best: Option<(usize, usize, u32)> = None;
    for c in 0..3 {
        let mut hist = vec![0usize; shape.extent(c) as usize + 1];
        for x in s {
            hist[x[c] as usize] += 1;
        }
        for v in 1..=shape.extent(c) {
            let m = hist[v as usize];
            if best.is_none_or(|(bm, _, _)| m > bm) {
                best = Some((m, c, v));
            }
        }
    }
    let (pm, pc, pv) = best.unwrap();
    if 50 * pm < total {
        return Err(Error::Invariant(format!("no plane carries |S|/50 ({pm} of {total})")));
    }
    let mut pe = [None; 3];
    pe[pc] = Some(pv);
    let plane = Slice::new(&pe);
    let on: Vec<Point> = s.iter().filter(|x| x[pc] == pv).copied().collect();
    let free: Vec<usize> = plane.free_coords().collect();
    let (q2, phi2) = balanced_split_from(&on, &free, &plane.bottom())?;
    let a = orthant_mass(&on, &q2, &phi2, true);
    let b = orthant_mass(&on, &q2, &phi2.neg(), true);
    if 400 * a >= total && 400 * b >= total {
        return Ok(BalancedSelection {
            case: SelectionCase::Slice2d,
            slice: plane,
            pivot: q2,
            signs: phi2,
            masses: (a, b),
            total,
        });
    }
    let line = heaviest_line(&on, shape, Some(&plane)).filter(|(m, _)| 800 * m >= total);
    let (lm, line) = match line {
        Some(l) => l,
        None => heaviest_line(s, shape, None).unwrap(),
    };
    if 800 * lm < total {
        return Err(Error::Invariant(format!("no line carries |S|/800 ({lm} of {total})")));
    }
    let on1: Vec<Point> = s.iter().filter(|x| line.contains(x)).copied().collect();
    let f: Vec<usize> = line.free_coords().collect();
    let (q3, phi3) = balanced_split_from(&on1, &f, &line.bottom())?;
    let a = orthant_mass(&on1, &q3, &phi3, false);
    let b = orthant_mass(&on1, &q3, &phi3.neg(), false);
    let sel = BalancedSelection { case: SelectionCase::Slice1d, slice: line, pivot: q3, signs: phi3, masses: (a, b), total };
    if !sel.certified() {
        return Err(Error::Invariant(format!("1D split below |S|/1600 ({a}, {b} of {total})")));
    }
    Ok(sel)
}

/// The 1D slice with the most points of `s`, optionally inside `within`.
fn heaviest_line(s: &[Point], shape: &GridShape, within: Option<&Slice>) -> Option<(usize, Slice)> {
    let mut best: Option<(usize, Slice)> = None;
    for free in 0..3 {
        if within.is_some_and(|w| !w.is_free(free)) {
            continue;
        }
        let (a, b) = match free {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let ea = shape.extent(a) as usize;
        let eb = shape.extent(b) as usize;
        let mut hist = vec![0usize; (ea + 1) * (eb + 1)];
        for x in s {
            hist[x[a] as usize * (eb + 1) + x[b] as usize] += 1;
        }
        for va in 1..=ea {
            for vb in 1..=eb {
                let m = hist[va * (eb + 1) + vb];
                let mut e = [None; 3];
                e[a] = Some(va as u32);
                e[b] = Some(vb as u32);
                let line = Slice::new(&e);
                if within.is_some_and(|w| !(0..3).all(|i| w.is_free(i) || w.fixed(i) == line.fixed(i))) {
                    continue;
                }
                if best.as_ref().is_none_or(|(bm, _)| m > *bm) {
                    best = Some((m, line));
                }
            }
        }
    }
    best
}

/// `q, q-e1, q+e1, q-e2, q+e2, q-e3, q+e3`, dropping out-of-grid points.
pub fn pivot_neighbourhood(shape: &GridShape, q: &Point) -> Vec<Point> {
    let mut out = vec![*q];
    for i in 0..q.k() {
        if let Some(y) = q.down(i) {
            out.push(y);
        }
        if let Some(y) = q.up(shape, i) {
            out.push(y);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct RoundPlan {
    pub plus: Option<BalancedSelection>,
    pub minus: Option<BalancedSelection>,
    pub points: Vec<Point>,
}

/// Up to fourteen points for the next round; points already fully revealed
/// (or repeated) are dropped.
pub fn round_plan(st: &SafeState, cand: &CandidateReport) -> Result<RoundPlan> {
    let shape = st.shape();
    if cand.union_len == 0 {
        return Err(Error::Invariant("candidate set is empty while no solution is revealed".into()));
    }
    let plus = if cand.plus.is_empty() { None } else { Some(balanced_select_3d(&cand.plus, shape)?) };
    let minus = if cand.minus.is_empty() { None } else { Some(balanced_select_3d(&cand.minus, shape)?) };
    let mut points: Vec<Point> = Vec::with_capacity(14);
    for sel in [&plus, &minus].into_iter().flatten() {
        for y in pivot_neighbourhood(shape, &sel.pivot) {
            if !st.state().is_fully_concrete(shape.index(&y)) && !points.contains(&y) {
                points.push(y);
            }
        }
    }
    Ok(RoundPlan { plus, minus, points })
}

/// Upper bound on the number of rounds implied by the shrink factor.
pub fn round_bound(shape: &GridShape) -> u64 {
    let n = 2.0 * shape.len() as f64;
    (n.ln() / -(1.0 - 1.0 / 1600.0f64).ln()).ceil() as u64 + 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundRecord {
    pub round: u64,
    pub queries: Vec<Point>,
    pub answers: Vec<SignVector>,
    pub cand_plus_before: usize,
    pub cand_plus_after: usize,
    pub cand_minus_before: usize,
    pub cand_minus_after: usize,
    pub sol: Option<Point>,
    #[serde(skip)]
    pub plus_case: Option<SelectionCase>,
    #[serde(skip)]
    pub minus_case: Option<SelectionCase>,
}

impl RoundRecord {
    /// Both sides shrank by the factor `1 - 1/1600`, in exact arithmetic.
    pub fn shrink_ok(&self) -> bool {
        1600 * self.cand_plus_after <= 1599 * self.cand_plus_before
            && 1600 * self.cand_minus_after <= 1599 * self.cand_minus_before
    }

    pub fn completed(&self) -> bool {
        self.sol.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameTranscript {
    pub shape: GridShape,
    pub rounds: Vec<RoundRecord>,
    pub termination: &'static str,
    pub total_queries: u64,
    pub solution: Point,
}

impl GameTranscript {
    /// Completed rounds whose shrink inequality fails.
    pub fn shrink_violations(&self) -> usize {
        self.rounds.iter().filter(|r| r.completed() && !r.shrink_ok()).count()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rounds {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GameConfig {
    /// Exhaustive cross-check of the tracker after every reveal.
    pub audit: bool,
    /// Compares the candidate sets computed from the tracked `J`, `M` with a
    /// from-scratch computation every round.
    pub check_candidates: bool,
}

fn answer(st: &mut SafeState, q: &Point, policy: RevealPolicy) -> Result<SignVector> {
    match policy {
        RevealPolicy::Witness(h) => {
            st.reveal_witness(q, h)?;
            Ok(h.get(q))
        }
        RevealPolicy::RuleClosure(h) => {
            let v = h.get(q);
            st.reveal_by_generation(q, &v)?;
            Ok(v)
        }
    }
}

/// Plays the game against `policy` until a solution is revealed.
pub fn play_game(shape: &GridShape, policy: RevealPolicy, cfg: GameConfig) -> Result<GameTranscript> {
    if shape.k() != 3 {
        return usage("the game is implemented for k = 3");
    }
    let h: &SignFunction = match policy {
        RevealPolicy::Witness(h) | RevealPolicy::RuleClosure(h) => h,
    };
    if h.shape() != shape {
        return usage("oracle shape differs from the game shape");
    }
    let mut st = SafeState::initial(shape);
    st.set_audit(cfg.audit);
    let mut rounds = Vec::new();
    let mut total = 0u64;
    let bound = round_bound(shape);
    let mut before = cand_sets_between(st.state(), &st.j(), &st.m());
    while st.solution().is_none() {
        let t = rounds.len() as u64 + 1;
        if t > bound {
            return Err(Error::Invariant(format!("round bound {bound} exceeded")));
        }
        let plan = round_plan(&st, &before)?;
        let mut rec = RoundRecord {
            round: t,
            queries: Vec::new(),
            answers: Vec::new(),
            cand_plus_before: before.plus_len,
            cand_plus_after: 0,
            cand_minus_before: before.minus_len,
            cand_minus_after: 0,
            sol: None,
            plus_case: plan.plus.as_ref().map(|s| s.case),
            minus_case: plan.minus.as_ref().map(|s| s.case),
        };
        for q in &plan.points {
            if st.state().is_fully_concrete(shape.index(q)) {
                continue;
            }
            let prev = cfg.audit.then(|| st.state().clone());
            let v = answer(&mut st, q, policy).map_err(|e| match e {
                Error::Usage(m) => Error::Protocol(m),
                e => e,
            })?;
            if let Some(prev) = prev {
                if !st.state().dominates(&prev) {
                    return Err(Error::Protocol("oracle returned a non-dominating state".into()));
                }
            }
            total += 1;
            rec.queries.push(*q);
            rec.answers.push(v);
            if let Some(x) = st.solution() {
                rec.sol = Some(x);
                break;
            }
        }
        let after = cand_sets_between(st.state(), &st.j(), &st.m());
        if cfg.check_candidates && after != cand_sets(st.state()) {
            return Err(Error::Invariant(format!("candidate sets from tracked J, M differ in round {t}")));
        }
        rec.cand_plus_after = after.plus_len;
        rec.cand_minus_after = after.minus_len;
        if rec.queries.is_empty() {
            return Err(Error::Invariant("round plan revealed nothing".into()));
        }
        rounds.push(rec);
        before = after;
    }
    let solution = st.solution().unwrap();
    Ok(GameTranscript { shape: shape.clone(), rounds, termination: "SOL_FOUND", total_queries: total, solution })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[u32]) -> Point {
        Point::new(c)
    }

    #[test]
    fn split_examples() {
        let g = GridShape::cube(2, 4).unwrap();
        let s: Vec<Point> = g.points().collect();
        let (q, phi) = balanced_split(&s, &[0]).unwrap();
        assert_eq!((q[0], phi.get(0)), (2, Some(1)));
        assert_eq!(orthant_mass(&s, &q, &phi, false), 12);
        assert_eq!(orthant_mass(&s, &q, &phi.neg(), false), 8);
        let (q, phi) = balanced_split(&s, &[0, 1]).unwrap();
        assert!(orthant_mass(&s, &q, &phi, false) >= 4 && orthant_mass(&s, &q, &phi.neg(), false) >= 4);
        let one = [pt(&[3, 2])];
        let (q, _) = balanced_split(&one, &[0, 1]).unwrap();
        assert_eq!(q, pt(&[3, 2]));
        assert!(balanced_split(&[], &[0]).is_err());
    }

    #[test]
    fn selection_examples() {
        let g8 = GridShape::cube(3, 8).unwrap();
        let diag: Vec<Point> = (1..=8).map(|v| pt(&[v, v, v])).collect();
        let sel = balanced_select_3d(&diag, &g8).unwrap();
        assert_eq!(sel.case, SelectionCase::Orthant3d);
        assert!(sel.certified());
        let g4 = GridShape::cube(3, 4).unwrap();
        let cube: Vec<Point> = g4.points().collect();
        let sel = balanced_select_3d(&cube, &g4).unwrap();
        assert!(sel.certified());
        assert_eq!(recount(&cube, &sel), sel.masses);
        let line: Vec<Point> = (1..=8).map(|v| pt(&[v, 1, 1])).collect();
        let sel = balanced_select_3d(&line, &g8).unwrap();
        assert_eq!(sel.case, SelectionCase::Slice1d);
        assert_eq!(recount(&line, &sel), sel.masses);
    }

    #[test]
    fn neighbourhood_examples() {
        let g = GridShape::cube(3, 8).unwrap();
        let nb = pivot_neighbourhood(&g, &pt(&[4, 4, 4]));
        assert_eq!(
            nb,
            vec![pt(&[4, 4, 4]), pt(&[3, 4, 4]), pt(&[5, 4, 4]), pt(&[4, 3, 4]), pt(&[4, 5, 4]), pt(&[4, 4, 3]), pt(&[4, 4, 5])]
        );
        assert_eq!(pivot_neighbourhood(&g, &pt(&[1, 4, 4])).len(), 6);
    }
}
