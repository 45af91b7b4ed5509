//! Brute-force oracles and the lemma suites built on them.

use std::collections::HashSet;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::candidates::{cand_sets, cand_sets_between};
use crate::enumerate::{count_monotone, count_safe, enumerate_consistent_safe, for_each_function, DEFAULT_CAP};
use crate::error::{usage, Error, Result};
use crate::functions::{generate_instance, respects, Family, InstanceSpec, SignFunction};
use crate::game::{balanced_select_3d, play_game, BalancedSelection, GameConfig, SelectionCase};
use crate::lattice::{GridShape, Point};
use crate::paths::{find_a_path_with_stats, find_escape_path_with_stats, maximal_slice, verify_path, PathMode, PathStats};
use crate::pi::{is_safe_pi, PiState, Sym};
use crate::tracker::{generate_pi_function, RevealPolicy, SafeState};

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub failures: u64,
    pub first_witness: Option<String>,
    /// Free-form counters for the text summary.
    #[serde(skip)]
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>) -> SuiteReport {
        SuiteReport { suite: suite.into(), cases: 0, failures: 0, first_witness: None, notes: Vec::new() }
    }

    /// Records a case; the witness is only built for the first failure.
    pub fn case(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_witness.is_none() {
                self.first_witness = Some(witness());
            }
        }
    }

    pub fn fail(&mut self, witness: String) {
        self.case(false, || witness);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let tag = if s.passed() { "PASS" } else { "FAIL" };
            writeln!(out, "{tag} {:<24} cases={} failures={}", s.suite, s.cases, s.failures).unwrap();
            if let Some(w) = &s.first_witness {
                writeln!(out, "     first witness: {w}").unwrap();
            }
            for n in &s.notes {
                writeln!(out, "     {n}").unwrap();
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.suites).expect("reports serialize")
    }
}

/// Inclusive box counts over a 3D grid by prefix sums.
struct Counts3 {
    e: [usize; 3],
    pre: Vec<u32>,
}

impl Counts3 {
    fn new(shape: &GridShape, s: &[Point]) -> Counts3 {
        let e = [shape.extent(0) as usize, shape.extent(1) as usize, shape.extent(2) as usize];
        let (a, b) = (e[0] + 1, (e[0] + 1) * (e[1] + 1));
        let mut pre = vec![0u32; b * (e[2] + 1)];
        for x in s {
            pre[x[0] as usize + a * x[1] as usize + b * x[2] as usize] += 1;
        }
        for z in 1..=e[2] {
            for y in 1..=e[1] {
                for x in 1..=e[0] {
                    let i = x + a * y + b * z;
                    pre[i] += pre[i - 1] + pre[i - a] + pre[i - b] + pre[i - a - b - 1]
                        - pre[i - a - 1]
                        - pre[i - b - 1]
                        - pre[i - a - b];
                }
            }
        }
        Counts3 { e, pre }
    }

    fn at(&self, x: usize, y: usize, z: usize) -> i64 {
        let a = self.e[0] + 1;
        self.pre[x + a * y + a * (self.e[1] + 1) * z] as i64
    }

    /// Points with `lo_i ≤ x_i ≤ hi_i`; empty ranges count zero.
    fn sum(&self, lo: [i64; 3], hi: [i64; 3]) -> u64 {
        let mut l = [0usize; 3];
        let mut h = [0usize; 3];
        for i in 0..3 {
            let lo_i = lo[i].max(1);
            let hi_i = hi[i].min(self.e[i] as i64);
            if lo_i > hi_i {
                return 0;
            }
            l[i] = lo_i as usize - 1;
            h[i] = hi_i as usize;
        }
        let v = self.at(h[0], h[1], h[2]) - self.at(l[0], h[1], h[2]) - self.at(h[0], l[1], h[2]) - self.at(h[0], h[1], l[2])
            + self.at(l[0], l[1], h[2])
            + self.at(l[0], h[1], l[2])
            + self.at(h[0], l[1], l[2])
            - self.at(l[0], l[1], l[2]);
        v as u64
    }
}

/// Coordinate range of one side of a (generalized) orthant around `q`.
fn side(q: i64, n: i64, sign: i8, strict: bool) -> (i64, i64) {
    let d = if strict { 1 } else { 0 };
    if sign > 0 {
        (q + d, n)
    } else {
        (1, q - d)
    }
}

/// Which cases of the balanced-point lemma are feasible for `S`, found by
/// scanning every pivot, sign class and slice, and whether the fast
/// selection's claim survives an independent recount.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BalancedCertificate {
    pub total: usize,
    pub orthant3d: bool,
    pub slice2d: bool,
    pub slice1d: bool,
    pub selection: Option<SelectionCase>,
    pub selection_ok: bool,
}

impl BalancedCertificate {
    pub fn ok(&self) -> bool {
        (self.orthant3d || self.slice2d || self.slice1d) && self.selection_ok
    }
}

pub const BALANCED_MAX_POINTS: usize = 1 << 15;

fn recount_selection(c: &Counts3, shape: &GridShape, sel: &BalancedSelection) -> (u64, u64) {
    let strict = sel.case != SelectionCase::Slice1d;
    let mut out = [0u64; 2];
    for (n, flip) in [1i8, -1].into_iter().enumerate() {
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for i in 0..3 {
            match sel.slice.fixed(i) {
                Some(v) => {
                    lo[i] = v as i64;
                    hi[i] = v as i64;
                }
                None => {
                    let s = sel.signs.get(i).unwrap_or(1) * flip;
                    (lo[i], hi[i]) = side(sel.pivot[i] as i64, shape.extent(i) as i64, s, strict);
                }
            }
        }
        out[n] = c.sum(lo, hi);
    }
    (out[0], out[1])
}

pub fn brute_force_balanced(s: &[Point], shape: &GridShape) -> Result<BalancedCertificate> {
    if shape.k() != 3 {
        return usage("balanced certification is defined for k = 3");
    }
    if shape.len() > BALANCED_MAX_POINTS {
        return Err(Error::Resource(format!("{} points exceed the certifier cap", shape.len())));
    }
    if s.is_empty() {
        return usage("empty set");
    }
    let total = s.len() as u64;
    let c = Counts3::new(shape, s);
    let n = [shape.extent(0) as i64, shape.extent(1) as i64, shape.extent(2) as i64];
    let orthant3d = 'found: {
        for q0 in 1..=n[0] {
            for q1 in 1..=n[1] {
                for q2 in 1..=n[2] {
                    let q = [q0, q1, q2];
                    for phi in [[1i8, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]] {
                        let mut m = [0u64; 2];
                        for (t, flip) in [1i8, -1].into_iter().enumerate() {
                            let r: Vec<(i64, i64)> = (0..3).map(|i| side(q[i], n[i], phi[i] * flip, true)).collect();
                            m[t] = c.sum([r[0].0, r[1].0, r[2].0], [r[0].1, r[1].1, r[2].1]);
                        }
                        if 16 * m[0] >= total && 16 * m[1] >= total {
                            break 'found true;
                        }
                    }
                }
            }
        }
        false
    };
    let slice2d = 'found: {
        for fixed in 0..3 {
            let (a, b) = match fixed {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for v in 1..=n[fixed] {
                for qa in 1..=n[a] {
                    for qb in 1..=n[b] {
                        for sb in [1i8, -1] {
                            let mut m = [0u64; 2];
                            for (t, flip) in [1i8, -1].into_iter().enumerate() {
                                let mut lo = [v; 3];
                                let mut hi = [v; 3];
                                (lo[a], hi[a]) = side(qa, n[a], flip, true);
                                (lo[b], hi[b]) = side(qb, n[b], sb * flip, true);
                                m[t] = c.sum(lo, hi);
                            }
                            if 400 * m[0] >= total && 400 * m[1] >= total {
                                break 'found true;
                            }
                        }
                    }
                }
            }
        }
        false
    };
    let slice1d = 'found: {
        for free in 0..3 {
            let (a, b) = match free {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for va in 1..=n[a] {
                for vb in 1..=n[b] {
                    for t in 1..=n[free] {
                        let mut lo = [0i64; 3];
                        let mut hi = [0i64; 3];
                        lo[a] = va;
                        hi[a] = va;
                        lo[b] = vb;
                        hi[b] = vb;
                        (lo[free], hi[free]) = (t, n[free]);
                        let up = c.sum(lo, hi);
                        (lo[free], hi[free]) = (1, t);
                        let down = c.sum(lo, hi);
                        if 1600 * up >= total && 1600 * down >= total {
                            break 'found true;
                        }
                    }
                }
            }
        }
        false
    };
    let (selection, selection_ok) = match balanced_select_3d(s, shape) {
        Ok(sel) => {
            let (m1, m2) = recount_selection(&c, shape, &sel);
            let d = sel.divisor() as u64;
            let ok = (m1 as usize, m2 as usize) == sel.masses && d * m1 >= total && d * m2 >= total;
            (Some(sel.case), ok)
        }
        Err(_) => (None, false),
    };
    Ok(BalancedCertificate { total: s.len(), orthant3d, slice2d, slice1d, selection, selection_ok })
}

/// A seeded random point set of one of several shapes: sparse uniform,
/// dense Bernoulli, concentrated on a plane, on a line, on a diagonal, or
/// in a small box.
pub fn random_subset(shape: &GridShape, rng: &mut impl Rng) -> Vec<Point> {
    let k = shape.k();
    let rand_point = |rng: &mut dyn rand::RngCore| {
        let c: Vec<u32> = (0..k).map(|i| rng.gen_range(1..=shape.extent(i))).collect();
        Point::new(&c)
    };
    let mut set: HashSet<Point> = HashSet::new();
    match rng.gen_range(0..6) {
        0 => {
            let m = rng.gen_range(1..=64);
            for _ in 0..m {
                set.insert(rand_point(rng));
            }
        }
        1 => {
            let p: f64 = rng.gen_range(0.01..0.6);
            set.extend(shape.points().filter(|_| rng.gen_bool(p)));
        }
        2 => {
            let c = rng.gen_range(0..k);
            let v = rng.gen_range(1..=shape.extent(c));
            let p: f64 = rng.gen_range(0.05..1.0);
            set.extend(shape.points().filter(|x| x[c] == v && rng.gen_bool(p)));
            for _ in 0..rng.gen_range(0..8) {
                set.insert(rand_point(rng));
            }
        }
        3 => {
            let base = rand_point(rng);
            let c = rng.gen_range(0..k);
            let p: f64 = rng.gen_range(0.2..1.0);
            set.extend(shape.points().filter(|x| (0..k).all(|i| i == c || x[i] == base[i]) && rng.gen_bool(p)));
        }
        4 => {
            let n = shape.extents().iter().copied().min().unwrap();
            for v in 1..=n {
                if rng.gen_bool(0.8) {
                    set.insert(Point::splat(k, v));
                }
            }
        }
        _ => {
            let a = rand_point(rng);
            let b = rand_point(rng);
            let (lo, hi) = (a.meet(&b), a.join(&b));
            set.extend(shape.points().filter(|x| lo.leq(x) && x.leq(&hi)));
        }
    }
    if set.is_empty() {
        set.insert(rand_point(rng));
    }
    let mut v: Vec<Point> = set.into_iter().collect();
    v.sort_by_key(|x| shape.index(x));
    v
}

/// `count` seeded random subsets of `shape`, each certified.
pub fn balanced_suite(shape: &GridShape, count: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("balanced_point");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = [0u64; 3];
    for n in 0..count {
        let s = random_subset(shape, &mut rng);
        let cert = brute_force_balanced(&s, shape)?;
        if let Some(c) = cert.selection {
            cases[c as usize] += 1;
        }
        rep.case(cert.ok(), || format!("set #{n} of {} points: {cert:?}", s.len()));
    }
    rep.notes.push(format!("selected cases: orthant3d={} slice2d={} slice1d={}", cases[0], cases[1], cases[2]));
    Ok(rep)
}

/// Safe states with `Sol(p) = ∅` visited by witness games with random query
/// order and by random Generate-PI-Function calls, deduplicated. `p⁰` comes
/// first.
pub fn sample_safe_states(shape: &GridShape, target: usize, seed: u64) -> Result<Vec<PiState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |p: &PiState, out: &mut Vec<PiState>| {
        if p.sol_set().is_empty() && seen.insert(p.digest()) {
            out.push(p.clone());
        }
    };
    push(&PiState::p0(shape), &mut out);
    let mut attempts = 0;
    while out.len() < target && attempts < 40 * target {
        attempts += 1;
        let mut st = SafeState::initial(shape);
        if attempts % 2 == 0 {
            let fam = if attempts % 4 == 0 { Family::Attractor { target: None, generators: None } } else { Family::Staircase };
            let h = generate_instance(&InstanceSpec::new(fam, rng.gen()), shape)?;
            while st.solution().is_none() {
                let open: Vec<usize> = (0..shape.len()).filter(|&i| !st.state().is_fully_concrete(i)).collect();
                let idx = *open.choose(&mut rng).expect("no solution implies an open point");
                st.reveal_witness(&shape.point(idx), &h)?;
                push(st.state(), &mut out);
            }
        } else {
            for _ in 0..rng.gen_range(1..=3 * shape.len()) {
                let idx = rng.gen_range(0..shape.len());
                let l = rng.gen_range(0..shape.k());
                let b = match st.state().sym_at(idx, l) {
                    Sym::Ge => rng.gen_range(0..=1),
                    Sym::Le => rng.gen_range(-1..=0),
                    Sym::Unknown => rng.gen_range(-1..=1),
                    _ => continue,
                };
                st.generate(&shape.point(idx), l, b)?;
                if rng.gen_bool(0.2) {
                    let d = if rng.gen_bool(0.5) { 1 } else { -1 };
                    let q = shape.point(rng.gen_range(0..shape.len()));
                    if st.state().dir(&q).admits(d) {
                        let mut next = st.state().clone();
                        if next.assert_direction(&q, crate::pi::DirSym::from_sign(d)).is_ok() && is_safe_pi(&next) {
                            st = SafeState::new(next)?;
                        }
                    }
                }
                push(st.state(), &mut out);
                if st.solution().is_some() {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// For each safe `f ⇒ p`: a Tarski* solution with the direction of
/// `Fix(f)` lies in the matching candidate set. Returns the number of
/// functions checked and the first counterexample.
pub fn check_lemma_candidates(p: &PiState, cap: usize) -> Result<(u64, Option<String>)> {
    let cand = cand_sets(p);
    let plus: HashSet<Point> = cand.plus.iter().copied().collect();
    let minus: HashSet<Point> = cand.minus.iter().copied().collect();
    let mut bad = None;
    let n = for_each_function(p, true, cap, |f| {
        let fix = f.fixed_points();
        let ok = match fix.as_slice() {
            [x] if f.get(x).dir() > 0 => plus.iter().any(|y| f.get(y).is_star_plus()),
            [_] => minus.iter().any(|y| f.get(y).is_star_minus()),
            _ => false,
        };
        if !ok {
            bad = Some(format!("state {} with function fixed at {:?}", p.digest(), fix));
        }
        ok
    })?;
    if n == 0 {
        return Err(Error::Invariant(format!("safe state {} has no consistent safe function", p.digest())));
    }
    Ok((n, bad))
}

/// The candidate lemma on every safe state sampled for each shape.
pub fn lemma_candidates_suite(shapes: &[GridShape], states_per_shape: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("lemma_candidates");
    let mut functions = 0;
    for shape in shapes {
        let states = sample_safe_states(shape, states_per_shape, seed)?;
        for p in &states {
            let (n, bad) = check_lemma_candidates(p, DEFAULT_CAP)?;
            functions += n;
            rep.case(bad.is_none(), || format!("{shape}: {}", bad.unwrap()));
        }
        rep.notes.push(format!("{shape}: {} distinct states", states.len()));
    }
    rep.notes.push(format!("{functions} consistent safe functions checked"));
    Ok(rep)
}

/// Monotone and safe function counts on `[2]¹`.
pub fn enumeration_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("enumeration_counts");
    let g = GridShape::new(&[2])?;
    let (m, s) = (count_monotone(&g, DEFAULT_CAP)?, count_safe(&g, DEFAULT_CAP)?);
    rep.case(m == 9, || format!("{m} monotone functions on [2]"));
    rep.case(s == 6, || format!("{s} safe functions on [2]"));
    let all = enumerate_consistent_safe(&PiState::p0(&g), DEFAULT_CAP)?;
    rep.case(all.iter().all(crate::functions::is_safe), || "enumerated function is not safe".into());
    Ok(rep)
}

/// Random Generate-PI-Function calls with an independent check of the
/// contract, then respect preservation along solver-style reveal sequences
/// against known monotone functions.
pub fn generate_contract_suite(shapes: &[GridShape], calls: usize, pairs: usize, seed: u64) -> Result<(SuiteReport, SuiteReport)> {
    let mut contract = SuiteReport::new("generate_contract");
    let mut respect = SuiteReport::new("respect_preservation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sh = 0;
    while contract.cases < calls as u64 {
        let shape = &shapes[sh % shapes.len()];
        sh += 1;
        let mut p = PiState::p0(shape);
        for _ in 0..rng.gen_range(1..=12) {
            let idx = rng.gen_range(0..shape.len());
            let l = rng.gen_range(0..shape.k());
            let b = match p.sym_at(idx, l) {
                Sym::Ge => rng.gen_range(0..=1),
                Sym::Le => rng.gen_range(-1..=0),
                Sym::Unknown => rng.gen_range(-1..=1),
                _ => continue,
            };
            let q = shape.point(idx);
            match generate_pi_function(&p, &q, l, b) {
                Ok(next) => {
                    let ok = is_safe_pi(&next) && next.dominates(&p) && next.sym(&q, l) == Sym::from_sign(b);
                    contract.case(ok, || format!("{shape}: set {q} coordinate {} to {b}", l + 1));
                    p = next;
                }
                Err(e) => contract.fail(format!("{shape}: set {q} coordinate {} to {b}: {e}", l + 1)),
            }
        }
    }
    let mut sh = 0;
    while respect.cases < pairs as u64 {
        let shape = &shapes[sh % shapes.len()];
        sh += 1;
        let f = generate_instance(&InstanceSpec::new(Family::Monotone, rng.gen()), shape)?;
        let mut st = SafeState::initial(shape);
        while st.solution().is_none() {
            let open: Vec<usize> = (0..shape.len()).filter(|&i| !st.state().is_fully_concrete(i)).collect();
            let Some(&idx) = open.choose(&mut rng) else {
                respect.fail(format!("{shape}: no open point but no solution"));
                break;
            };
            let q = shape.point(idx);
            if let Err(e) = st.reveal_by_generation(&q, &f.get(&q)) {
                respect.fail(format!("{shape}: reveal at {q}: {e}"));
                break;
            }
            respect.case(respects(st.state(), &f), || format!("{shape}: respect lost after revealing {q}"));
        }
    }
    Ok((contract, respect))
}

/// Paths from `J(p)` to `Fix(f)` on states from witness games, against
/// every consistent safe `f` on tiny shapes, then escape paths on sampled
/// safe states.
pub fn paths_suite(shapes: &[GridShape], pairs: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("paths");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recursions = 0;
    let mut escapes = 0;
    let mut sh = 0;
    while rep.cases < pairs as u64 {
        let shape = &shapes[sh % shapes.len()];
        sh += 1;
        let fam = if sh % 2 == 0 { Family::Attractor { target: None, generators: None } } else { Family::Staircase };
        let h = generate_instance(&InstanceSpec::new(fam, rng.gen()), shape)?;
        let mut st = SafeState::initial(shape);
        while st.solution().is_none() {
            let p = st.state();
            let fs: Vec<SignFunction> =
                if shape.len() <= DEFAULT_CAP { enumerate_consistent_safe(p, DEFAULT_CAP)? } else { vec![h.clone()] };
            for f in &fs {
                let mut stats = PathStats::default();
                let res = find_a_path_with_stats(p, f, &mut stats);
                let ok = match &res {
                    Ok(path) => {
                        verify_path(path, p, Some(f), &PathMode::Lemma).is_ok()
                            && stats.recursions.iter().all(|(a, b)| b < a)
                    }
                    Err(_) => false,
                };
                recursions += stats.recursions.len();
                rep.case(ok, || format!("{shape}: state {}: {:?}", p.digest(), res.err()));
            }
            let open: Vec<usize> = (0..shape.len()).filter(|&i| !st.state().is_fully_concrete(i)).collect();
            let idx = *open.choose(&mut rng).expect("no solution implies an open point");
            st.reveal_witness(&shape.point(idx), &h)?;
        }
    }
    for shape in shapes {
        for p in sample_safe_states(shape, 60, seed)? {
            let (e, r) = check_escape_paths(&p, &mut rep)?;
            escapes += e;
            recursions += r;
        }
    }
    rep.notes.push(format!("{escapes} escape paths, {recursions} recursive escape calls"));
    Ok(rep)
}

/// Every admissible escape pair `(a, z)` of `p`: `a` lies in no maximal
/// slice, `z = a + e_i` does. Returns the number of paths and recursive calls.
fn check_escape_paths(p: &PiState, rep: &mut SuiteReport) -> Result<(usize, usize)> {
    let shape = p.shape();
    let (mut paths, mut recursions) = (0, 0);
    for a in shape.points() {
        if maximal_slice(p, &a)?.is_some() {
            continue;
        }
        for i in 0..shape.k() {
            let Some(z) = a.up(shape, i) else { continue };
            let Some(s) = maximal_slice(p, &z)? else { continue };
            let mut stats = PathStats::default();
            let ok = match find_escape_path_with_stats(&a, &z, p, &mut stats) {
                Ok(path) => verify_path(&path, p, None, &PathMode::Escape { i_star: i, slice: s }).is_ok(),
                Err(_) => false,
            };
            paths += 1;
            recursions += stats.recursions.len();
            rep.case(ok, || format!("{shape}: escape path from {a} to {z} on state {}", p.digest()));
        }
    }
    Ok((paths, recursions))
}

/// Seeded witness games with the tracker audit and the candidate cache
/// check on, each replayed once for byte-identical transcripts.
pub fn cross_validate(shape: &GridShape, games: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("cross_validate");
    let cfg = GameConfig { audit: true, check_candidates: true };
    for g in 0..games as u64 {
        let fam = if g % 2 == 0 { Family::Attractor { target: None, generators: None } } else { Family::Staircase };
        let h = generate_instance(&InstanceSpec::new(fam, seed.wrapping_add(g)), shape)?;
        let first = play_game(shape, RevealPolicy::Witness(&h), cfg);
        let second = play_game(shape, RevealPolicy::Witness(&h), GameConfig::default());
        let ok = match (&first, &second) {
            (Ok(a), Ok(b)) => a.to_jsonl() == b.to_jsonl(),
            _ => false,
        };
        rep.case(ok, || format!("game {g}: {:?}", first.err().or(second.err())));
    }
    Ok(rep)
}

/// The candidate sets from a claimed `J`, `M` agree with a from-scratch
/// computation.
pub fn candidate_cache_matches(p: &PiState, j: &Point, m: &Point) -> bool {
    cand_sets_between(p, j, m) == cand_sets(p)
}

/// Seeded witness games: every completed round shrinks both candidate
/// sets by the factor `1 - 1/1600`.
pub fn shrink_suite(sizes: &[u32], games_per_size: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("shrink");
    let mut rounds = 0;
    let mut worst: f64 = 0.0;
    for &n in sizes {
        let shape = GridShape::cube(3, n)?;
        for g in 0..games_per_size as u64 {
            let fam = match g % 3 {
                0 => Family::Attractor { target: None, generators: None },
                _ => Family::Staircase,
            };
            let h = generate_instance(&InstanceSpec::new(fam, seed.wrapping_add(g)), &shape)?;
            match play_game(&shape, RevealPolicy::Witness(&h), GameConfig::default()) {
                Ok(t) => {
                    for r in t.rounds.iter().filter(|r| r.completed()) {
                        rounds += 1;
                        for (a, b) in [(r.cand_plus_after, r.cand_plus_before), (r.cand_minus_after, r.cand_minus_before)] {
                            if b > 0 {
                                worst = worst.max(a as f64 / b as f64);
                            }
                        }
                    }
                    rep.case(t.shrink_violations() == 0, || format!("[{n}]^3 game {g}: {} violations", t.shrink_violations()));
                }
                Err(e) => rep.fail(format!("[{n}]^3 game {g}: {e}")),
            }
        }
    }
    rep.notes.push(format!("{rounds} completed rounds, largest shrink ratio {worst:.4}"));
    Ok(rep)
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Largest side length of the exhaustively enumerated shapes.
    pub tiny_max: u32,
    pub balanced_sets: usize,
    pub games: usize,
    pub contract_calls: usize,
    pub respect_pairs: usize,
    pub path_pairs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            tiny_max: 3,
            balanced_sets: 1000,
            games: 20,
            contract_calls: 1000,
            respect_pairs: 200,
            path_pairs: 200,
        }
    }
}

/// Shapes `[n]^k` with `2 ≤ n ≤ tiny_max` and at most 12 points.
pub fn tiny_shapes(tiny_max: u32) -> Vec<GridShape> {
    let mut out = Vec::new();
    for k in 1..=3usize {
        for n in 2..=tiny_max {
            if (n as usize).pow(k as u32) <= 12 {
                out.push(GridShape::cube(k, n).expect("small cube"));
            }
        }
    }
    out
}

/// Runs every suite, concurrently; reports come back in a fixed order.
pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let tiny = tiny_shapes(cfg.tiny_max.max(2));
    let small = [GridShape::cube(2, 4)?, GridShape::cube(3, 3)?, GridShape::cube(3, 6)?, GridShape::new(&[2, 5, 4])?];
    let path_shapes = [GridShape::cube(2, 3)?, GridShape::cube(3, 4)?];
    type Job<'a> = Box<dyn Fn() -> Result<Vec<SuiteReport>> + Send + Sync + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(|| Ok(vec![enumeration_suite()?])),
        Box::new(|| Ok(vec![lemma_candidates_suite(&tiny, 100, cfg.seed)?])),
        Box::new(|| Ok(vec![balanced_suite(&GridShape::cube(3, 16)?, cfg.balanced_sets, cfg.seed)?])),
        Box::new(|| {
            let (c, r) = generate_contract_suite(&small, cfg.contract_calls, cfg.respect_pairs, cfg.seed)?;
            Ok(vec![c, r])
        }),
        Box::new(|| Ok(vec![paths_suite(&path_shapes, cfg.path_pairs, cfg.seed)?])),
        Box::new(|| Ok(vec![cross_validate(&GridShape::cube(3, 8)?, cfg.games, cfg.seed)?])),
        Box::new(|| Ok(vec![shrink_suite(&[8, 16], cfg.games, cfg.seed)?])),
    ];
    let out: Vec<Result<Vec<SuiteReport>>> = jobs.par_iter().map(|j| j()).collect();
    let mut suites = Vec::new();
    for r in out {
        suites.extend(r?);
    }
    Ok(VerifyReport { suites })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums_match_direct_counts() {
        let g = GridShape::new(&[3, 4, 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = random_subset(&g, &mut rng);
            let c = Counts3::new(&g, &s);
            for _ in 0..50 {
                let lo: Vec<i64> = (0..3).map(|i| rng.gen_range(0..=g.extent(i) as i64 + 1)).collect();
                let hi: Vec<i64> = (0..3).map(|i| rng.gen_range(0..=g.extent(i) as i64 + 1)).collect();
                let want = s.iter().filter(|x| (0..3).all(|i| lo[i] <= x[i] as i64 && x[i] as i64 <= hi[i])).count();
                assert_eq!(c.sum([lo[0], lo[1], lo[2]], [hi[0], hi[1], hi[2]]), want as u64);
            }
        }
    }

    #[test]
    fn single_point_and_plane() {
        let g = GridShape::cube(3, 6).unwrap();
        let one = [Point::new(&[2, 3, 4])];
        let c = brute_force_balanced(&one, &g).unwrap();
        assert!(c.slice1d && !c.orthant3d && c.ok());
        let plane: Vec<Point> = g.points().filter(|x| x[1] == 2).collect();
        let c = brute_force_balanced(&plane, &g).unwrap();
        assert!(c.slice2d && c.ok());
    }

    #[test]
    fn corrupted_cache_is_reported() {
        let g = GridShape::cube(3, 3).unwrap();
        let p = PiState::p0(&g);
        assert!(candidate_cache_matches(&p, &g.bottom(), &g.top()));
        assert!(!candidate_cache_matches(&p, &Point::new(&[2, 1, 1]), &g.top()));
    }
}
