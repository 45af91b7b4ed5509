//! Monotone paths through safe PI states: the maximal slice `ŝ(x, p)`, the
//! path from `J(p)` to `Fix(f)` and the escape paths it is spliced from.
//!
//! This is verification machinery for the candidate lemma. Every routine
//! checks the properties its construction is supposed to guarantee and
//! reports an invariant error instead of returning a bad path. Arbitrary
//! choices resolve to the lowest qualifying coordinate.

use std::fmt;

use crate::candidates::{in_interior_on_slice, in_interior_plus};
use crate::error::{usage, Error, Result};
use crate::functions::{consistent, SignFunction};
use crate::lattice::{Point, Slice};
use crate::pi::{join_of_post, PiState, Sym};

/// Points `a⁰, a¹, …` with `a^ℓ = a^{ℓ-1} + e_{i_ℓ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonePath {
    points: Vec<Point>,
}

impl MonotonePath {
    pub fn new(points: Vec<Point>) -> Result<MonotonePath> {
        if points.is_empty() {
            return usage("a path has at least one point");
        }
        for w in points.windows(2) {
            if w[0].unit_step_to(&w[1]).is_none() {
                return usage(format!("{} -> {} is not a unit step", w[0], w[1]));
            }
        }
        Ok(MonotonePath { points })
    }

    pub fn single(x: Point) -> MonotonePath {
        MonotonePath { points: vec![x] }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn start(&self) -> &Point {
        &self.points[0]
    }

    pub fn end(&self) -> &Point {
        self.points.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Step coordinates `i_2, …, i_m`.
    pub fn steps(&self) -> Vec<usize> {
        self.points.windows(2).map(|w| w[0].unit_step_to(&w[1]).unwrap()).collect()
    }
}

/// Whether `x ≪_s J_s` for the slice through `x` with free set `mask`.
fn below_join(p: &PiState, x: &Point, mask: u8) -> Option<(Slice, Point)> {
    let s = Slice::through(x, mask);
    let j = join_of_post(p, &s)?;
    (x.leq(&j) && s.free_coords().all(|i| x[i] < j[i])).then_some((s, j))
}

/// `ŝ(x, p)`: the unique maximal slice `s` with `x ≪_s J_s`, with its `J_s`.
/// Every nonempty free set is tried; the union of the valid ones must be
/// valid itself.
pub fn maximal_slice_with_join(p: &PiState, x: &Point) -> Result<Option<(Slice, Point)>> {
    p.shape().check(x)?;
    let k = p.k();
    let mut union = 0u8;
    for mask in 1u8..(1 << k) {
        if below_join(p, x, mask).is_some() {
            union |= mask;
        }
    }
    if union == 0 {
        return Ok(None);
    }
    match below_join(p, x, union) {
        Some(r) => Ok(Some(r)),
        None => Err(Error::Invariant(format!("union of the valid slices through {x} is not valid"))),
    }
}

pub fn maximal_slice(p: &PiState, x: &Point) -> Result<Option<Slice>> {
    Ok(maximal_slice_with_join(p, x)?.map(|(s, _)| s))
}

fn step(p: &PiState, x: &Point, i: usize) -> Result<Point> {
    x.up(p.shape(), i).ok_or_else(|| Error::Invariant(format!("path leaves the grid at {x} in coordinate {}", i + 1)))
}

fn step_cap(p: &PiState) -> usize {
    p.shape().extents().iter().map(|&n| n as usize - 1).sum()
}

/// Counters collected while building paths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathStats {
    /// `(dim ŝ(w, p), dim ŝ(v, p))` for every recursive escape call.
    pub recursions: Vec<(usize, usize)>,
    pub escape_calls: usize,
}

/// The path from `J(p)` to `Fix(f)`. Every point `x` on it has
/// `f(x)_i ≥ 0` and `x ∉ Int⁺_i(p)` for all `i ∈ [k]`.
pub fn find_a_path(p: &PiState, f: &SignFunction) -> Result<MonotonePath> {
    find_a_path_with_stats(p, f, &mut PathStats::default())
}

pub fn find_a_path_with_stats(p: &PiState, f: &SignFunction, stats: &mut PathStats) -> Result<MonotonePath> {
    if f.shape() != p.shape() {
        return usage("function and state have different shapes");
    }
    if !consistent(f, p) {
        return usage("function is not consistent with the state");
    }
    let shape = p.shape();
    let k = p.k();
    let mut a = join_of_post(p, &shape.full_slice()).ok_or_else(|| Error::Invariant("Post(p) is empty".into()))?;
    let mut pts = vec![a];
    loop {
        let fa = f.get(&a);
        if fa.is_zero() {
            break;
        }
        let i_star = (0..k)
            .find(|&i| fa.sign(i) == 1)
            .ok_or_else(|| Error::Invariant(format!("f({a}) has a negative coordinate on the path")))?;
        let z = step(p, &a, i_star)?;
        match maximal_slice(p, &z)? {
            None => {
                pts.push(z);
                a = z;
            }
            Some(_) => {
                let sub = escape(p, &a, &z, stats)?;
                pts.extend_from_slice(sub.points());
                a = *sub.end();
            }
        }
        if pts.len() > step_cap(p) + 1 {
            return Err(Error::Invariant("path exceeds the step cap".into()));
        }
    }
    let path = MonotonePath::new(pts)?;
    if let Err(v) = verify_path(&path, p, Some(f), &PathMode::Lemma) {
        return Err(Error::Invariant(format!("path from J(p) to Fix(f): {v}")));
    }
    Ok(path)
}

/// The escape path from `z = a + e_{i*}` to `J_s`, `s = ŝ(z, p)`, for `a`
/// with `ŝ(a, p) = nil`.
pub fn find_escape_path(a: &Point, z: &Point, p: &PiState) -> Result<MonotonePath> {
    find_escape_path_with_stats(a, z, p, &mut PathStats::default())
}

pub fn find_escape_path_with_stats(a: &Point, z: &Point, p: &PiState, stats: &mut PathStats) -> Result<MonotonePath> {
    p.shape().check(a)?;
    p.shape().check(z)?;
    if a.unit_step_to(z).is_none() {
        return usage("z must be a + e_i");
    }
    if maximal_slice(p, a)?.is_some() {
        return usage(format!("ŝ({a}) is not nil"));
    }
    if maximal_slice(p, z)?.is_none() {
        return usage(format!("ŝ({z}) is nil"));
    }
    escape(p, a, z, stats)
}

fn escape(p: &PiState, a: &Point, z: &Point, stats: &mut PathStats) -> Result<MonotonePath> {
    stats.escape_calls += 1;
    let shape = p.shape();
    let k = p.k();
    let i_star = a.unit_step_to(z).expect("checked by the caller");
    let (s, js) = maximal_slice_with_join(p, z)?.ok_or_else(|| Error::Invariant(format!("ŝ({z}) is nil")))?;
    if s.is_free(i_star) {
        return Err(Error::Invariant(format!("coordinate {} is free in ŝ({z})", i_star + 1)));
    }
    let zi = shape.index(z);
    if let Some(i) = (0..k).find(|&i| in_interior_plus(p, zi, i)) {
        return Err(Error::Invariant(format!("{z} lies in Int⁺_{}", i + 1)));
    }
    let mut x = *a;
    let mut pts = vec![*z];
    loop {
        let w = step(p, &x, i_star)?;
        if w == js {
            break;
        }
        if !w.lt(&js) {
            return Err(Error::Invariant(format!("{w} is not below J_s = {js}")));
        }
        let sw = maximal_slice(p, &w)?.ok_or_else(|| Error::Invariant(format!("ŝ({w}) is nil below J_s")))?;
        let j = sw
            .free_coords()
            .find(|&j| p.sym(&w, j) == Sym::Pos)
            .ok_or_else(|| Error::Invariant(format!("no free +1 coordinate at {w}")))?;
        let v = step(p, &x, j)?;
        match maximal_slice(p, &v)? {
            None => {
                pts.push(step(p, &v, i_star)?);
                x = v;
            }
            Some(sv) => {
                stats.recursions.push((sw.dim(), sv.dim()));
                if sv.dim() >= sw.dim() || sv.dim() >= s.dim() {
                    return Err(Error::Invariant(format!("recursion at {v} does not lower the slice dimension")));
                }
                let sub = escape(p, &x, &v, stats)?;
                for y in sub.points() {
                    pts.push(step(p, y, i_star)?);
                }
                x = *sub.end();
            }
        }
        if pts.len() > step_cap(p) + 1 {
            return Err(Error::Invariant("escape path exceeds the step cap".into()));
        }
    }
    let path = MonotonePath::new(pts)?;
    let mode = PathMode::Escape { i_star, slice: s };
    if let Err(v) = verify_path(&path, p, None, &mode) {
        return Err(Error::Invariant(format!("escape path from {z}: {v}")));
    }
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathMode {
    /// Starts at `J(p)`, ends at `Fix(f)`, `f ⪰ 0` and no `Int⁺_i(p)`.
    Lemma,
    /// The three escape-path bullets for `s = ŝ(z, p)` and the exempt
    /// coordinate `i*`, plus the endpoint `J_s`.
    Escape { i_star: usize, slice: Slice },
    /// Starting with `f ⪰ 0` and always stepping on a coordinate where `f`
    /// is `+1` keeps `f ⪰ 0`.
    Claim,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathViolation {
    pub position: usize,
    pub point: Point,
    pub rule: &'static str,
}

impl fmt::Display for PathViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {} ({})", self.rule, self.position, self.point)
    }
}

fn nonneg(f: &SignFunction, x: &Point) -> bool {
    let v = f.get(x);
    (0..v.k()).all(|i| v.sign(i) >= 0)
}

/// Checks the property bundle of `mode`. `f` is required by the lemma and
/// claim modes.
pub fn verify_path(
    path: &MonotonePath,
    p: &PiState,
    f: Option<&SignFunction>,
    mode: &PathMode,
) -> std::result::Result<(), PathViolation> {
    let shape = p.shape();
    let k = p.k();
    let bad = |position: usize, rule: &'static str| Err(PathViolation { position, point: path.points[position], rule });
    match mode {
        PathMode::Lemma => {
            let Some(f) = f else { return bad(0, "lemma mode needs a function") };
            if join_of_post(p, &shape.full_slice()) != Some(*path.start()) {
                return bad(0, "path does not start at J(p)");
            }
            for (n, x) in path.points.iter().enumerate() {
                if !nonneg(f, x) {
                    return bad(n, "f has a negative coordinate");
                }
                let idx = shape.index(x);
                if (0..k).any(|i| in_interior_plus(p, idx, i)) {
                    return bad(n, "point lies in an interior Int⁺_i(p)");
                }
            }
            if !f.get(path.end()).is_zero() {
                return bad(path.len() - 1, "path does not end at Fix(f)");
            }
        }
        PathMode::Escape { i_star, slice } => {
            let star = slice.with_free(*i_star);
            for (n, w) in path.points.windows(2).enumerate() {
                let i = w[0].unit_step_to(&w[1]).unwrap();
                if !slice.is_free(i) || p.sym(&w[0], i) != Sym::Pos {
                    return bad(n + 1, "step coordinate is not a free +1 coordinate of the predecessor");
                }
            }
            for (n, x) in path.points.iter().enumerate() {
                if (0..k).any(|i| !slice.is_free(i) && p.sym(x, i) == Sym::Pos) {
                    return bad(n, "+1 symbol in a fixed coordinate");
                }
                if star.free_coords().any(|i| in_interior_on_slice(p, &star, x, i)) {
                    return bad(n, "point lies in Int⁺_i(p, s*)");
                }
            }
            let js = join_of_post(p, &Slice::through(path.start(), slice.free_mask()));
            if js != Some(*path.end()) {
                return bad(path.len() - 1, "escape path does not end at J_s");
            }
        }
        PathMode::Claim => {
            let Some(f) = f else { return bad(0, "claim mode needs a function") };
            if !nonneg(f, path.start()) {
                return bad(0, "start has a negative coordinate");
            }
            for (n, w) in path.points.windows(2).enumerate() {
                let i = w[0].unit_step_to(&w[1]).unwrap();
                if f.get(&w[0]).sign(i) != 1 {
                    return bad(n + 1, "step coordinate is not +1 in f");
                }
                if !nonneg(f, &w[1]) {
                    return bad(n + 1, "f has a negative coordinate");
                }
            }
        }
    }
    Ok(())
}

/// The sampled facts about `ŝ(x, p)`: for `x ⪯ y ≺ J_s`, `ŝ(y, p)` exists
/// with free set inside `F(s)`, and `ŝ(J_s, p) = nil`.
pub fn check_maximal_slice_facts(p: &PiState, x: &Point) -> Result<()> {
    let Some((s, js)) = maximal_slice_with_join(p, x)? else {
        if (0..p.k()).any(|i| p.sym(x, i) == Sym::Pos) {
            return Err(Error::Invariant(format!("ŝ({x}) is nil but {x} carries a +1")));
        }
        return Ok(());
    };
    if !s.free_coords().any(|i| p.sym(x, i) == Sym::Pos) {
        return Err(Error::Invariant(format!("no free +1 at {x} in ŝ({x}) = {s}")));
    }
    for y in crate::lattice::BoxIter::new(*x, js) {
        if y == js {
            continue;
        }
        match maximal_slice(p, &y)? {
            Some(sy) if sy.free_mask() & !s.free_mask() == 0 => {}
            other => return Err(Error::Invariant(format!("ŝ({y}) = {other:?} is not inside ŝ({x}) = {s}"))),
        }
    }
    if maximal_slice(p, &js)?.is_some() {
        return Err(Error::Invariant(format!("ŝ(J_s) is not nil for s = {s}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::attractor;
    use crate::lattice::GridShape;

    fn pt(c: &[u32]) -> Point {
        Point::new(c)
    }

    #[test]
    fn p0_has_no_maximal_slices() {
        let g = GridShape::cube(3, 3).unwrap();
        let p = PiState::p0(&g);
        for x in g.points() {
            assert_eq!(maximal_slice(&p, &x).unwrap(), None);
        }
    }

    #[test]
    fn staircase_on_p0() {
        let g = GridShape::cube(3, 3).unwrap();
        let p = PiState::p0(&g);
        let t = pt(&[3, 2, 2]);
        let f = attractor(&g, &t, &[t]);
        let path = find_a_path(&p, &f).unwrap();
        assert_eq!(path.start(), &g.bottom());
        assert_eq!(path.end(), &t);
        assert_eq!(path.len(), 5);
        assert_eq!(path.steps(), vec![0, 0, 1, 2]);
    }

    #[test]
    fn fixed_point_at_j_gives_single_point() {
        let g = GridShape::cube(2, 3).unwrap();
        let p = PiState::p0(&g);
        let f = attractor(&g, &g.bottom(), &[g.bottom()]);
        assert_eq!(find_a_path(&p, &f).unwrap(), MonotonePath::single(g.bottom()));
    }

    #[test]
    fn claim_mode() {
        let g = GridShape::cube(2, 4).unwrap();
        let p = PiState::p0(&g);
        let f = attractor(&g, &pt(&[3, 3]), &[pt(&[3, 3])]);
        let ok = MonotonePath::new(vec![pt(&[1, 1]), pt(&[2, 1]), pt(&[2, 2])]).unwrap();
        assert!(verify_path(&ok, &p, Some(&f), &PathMode::Claim).is_ok());
        let single = MonotonePath::single(pt(&[3, 3]));
        assert!(verify_path(&single, &p, Some(&f), &PathMode::Claim).is_ok());
        let over = MonotonePath::new(vec![pt(&[3, 3]), pt(&[4, 3])]).unwrap();
        assert_eq!(verify_path(&over, &p, Some(&f), &PathMode::Claim).unwrap_err().rule, "step coordinate is not +1 in f");
    }
}
