//! Interior points and the candidate sets `Cand⁺`, `Cand⁻` of a safe state.

use std::fmt;

use serde::Serialize;

use crate::error::{usage, Result};
use crate::lattice::{BoxIter, Point, Slice};
use crate::pi::{post_pre_j_m, DirSym, PiState, Sym};

/// Linear index of `x^{-i}` (`i == k` exempts nothing).
#[inline]
fn shaved_minus(p: &PiState, idx: usize, i: usize) -> usize {
    let shape = p.shape();
    let mut y = idx;
    for j in 0..shape.k() {
        if j != i && shape.coord_of(idx, j) > 1 {
            y -= shape.stride(j);
        }
    }
    y
}

#[inline]
fn shaved_plus(p: &PiState, idx: usize, i: usize) -> usize {
    let shape = p.shape();
    let mut y = idx;
    for j in 0..shape.k() {
        if j != i && shape.coord_of(idx, j) < shape.extent(j) {
            y += shape.stride(j);
        }
    }
    y
}

/// `x ∈ Int⁺_i(p)` for the point with linear index `idx`; `i == k` is the
/// direction coordinate.
pub fn in_interior_plus(p: &PiState, idx: usize, i: usize) -> bool {
    let k = p.k();
    if i < k {
        return p.sym_at(shaved_minus(p, idx, i), i) == Sym::Pos;
    }
    if p.dir_at(shaved_minus(p, idx, k)) == DirSym::Plus {
        return true;
    }
    (0..k).any(|i| {
        let y = shaved_minus(p, idx, i);
        p.sym_at(y, i).is_post() && p.dir_at(y) == DirSym::Plus
    })
}

pub fn in_interior_minus(p: &PiState, idx: usize, i: usize) -> bool {
    let k = p.k();
    if i < k {
        return p.sym_at(shaved_plus(p, idx, i), i) == Sym::Neg;
    }
    if p.dir_at(shaved_plus(p, idx, k)) == DirSym::Minus {
        return true;
    }
    (0..k).any(|i| {
        let y = shaved_plus(p, idx, i);
        p.sym_at(y, i).is_pre() && p.dir_at(y) == DirSym::Minus
    })
}

pub fn interior_plus(p: &PiState, i: usize) -> Vec<Point> {
    let shape = p.shape();
    (0..shape.len()).filter(|&idx| in_interior_plus(p, idx, i)).map(|idx| shape.point(idx)).collect()
}

pub fn interior_minus(p: &PiState, i: usize) -> Vec<Point> {
    let shape = p.shape();
    (0..shape.len()).filter(|&idx| in_interior_minus(p, idx, i)).map(|idx| shape.point(idx)).collect()
}

/// `Int⁺_i(p, s)`.
pub fn interior_on_slice(p: &PiState, s: &Slice, i: usize) -> Result<Vec<Point>> {
    let shape = p.shape();
    s.validate(shape)?;
    if i >= shape.k() || !s.is_free(i) {
        return usage(format!("coordinate {} is not free in {s}", i + 1));
    }
    Ok(s.points(shape).filter(|x| in_interior_on_slice(p, s, x, i)).collect())
}

pub fn in_interior_on_slice(p: &PiState, s: &Slice, x: &Point, i: usize) -> bool {
    let shape = p.shape();
    if p.sym(x, i) != Sym::Pos {
        return false;
    }
    let mut y = *x;
    for j in s.free_coords() {
        if j != i && y[j] > 1 {
            y.set(j, y[j] - 1);
        }
    }
    p.sym_at(shape.index(&y), i) == Sym::Pos
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateReport {
    pub plus: Vec<Point>,
    pub minus: Vec<Point>,
    pub plus_len: usize,
    pub minus_len: usize,
    pub union_len: usize,
    pub j: Point,
    pub m: Point,
}

/// From-scratch `Cand⁺(p)` and `Cand⁻(p)`.
pub fn cand_sets(p: &PiState) -> CandidateReport {
    let full = post_pre_j_m(p, &p.shape().full_slice());
    let j = full.j.unwrap_or_else(|| p.shape().bottom());
    let m = full.m.unwrap_or_else(|| p.shape().top());
    cand_sets_between(p, &j, &m)
}

/// Candidate sets given `J(p)` and `M(p)`.
pub fn cand_sets_between(p: &PiState, j: &Point, m: &Point) -> CandidateReport {
    let shape = p.shape();
    let k = shape.k();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut union = 0;
    for x in BoxIter::new(*j, *m) {
        let idx = shape.index(&x);
        let d = p.dir_at(idx);
        let in_plus = d != DirSym::Minus
            && (0..k).all(|i| p.sym_at(idx, i) != Sym::Neg)
            && (0..=k).all(|i| !in_interior_plus(p, idx, i));
        let in_minus = d != DirSym::Plus
            && (0..k).all(|i| p.sym_at(idx, i) != Sym::Pos)
            && (0..=k).all(|i| !in_interior_minus(p, idx, i));
        if in_plus {
            plus.push(x);
        }
        if in_minus {
            minus.push(x);
        }
        if in_plus || in_minus {
            union += 1;
        }
    }
    CandidateReport { plus_len: plus.len(), minus_len: minus.len(), union_len: union, plus, minus, j: *j, m: *m }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Exclusion {
    SymbolNeg,
    SymbolPos,
    IntPlus(usize),
    IntMinus(usize),
    OutOfJm,
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exclusion::SymbolNeg => write!(f, "SYMBOL_NEG"),
            Exclusion::SymbolPos => write!(f, "SYMBOL_POS"),
            Exclusion::IntPlus(i) => write!(f, "INT_PLUS_{}", i + 1),
            Exclusion::IntMinus(i) => write!(f, "INT_MINUS_{}", i + 1),
            Exclusion::OutOfJm => write!(f, "OUT_OF_JM"),
        }
    }
}

/// Points excluded from `Cand⁺` (or, with `plus == false`, `Cand⁻`), each
/// with the first reason found.
pub fn exclusions(p: &PiState, plus: bool) -> Vec<(Point, Exclusion)> {
    let shape = p.shape();
    let k = shape.k();
    let full = post_pre_j_m(p, &shape.full_slice());
    let (j, m) = (full.j.unwrap_or_else(|| shape.bottom()), full.m.unwrap_or_else(|| shape.top()));
    let mut out = Vec::new();
    for (idx, x) in shape.points().enumerate() {
        let reason = if !(j.leq(&x) && x.leq(&m)) {
            Some(Exclusion::OutOfJm)
        } else if plus {
            if p.dir_at(idx) == DirSym::Minus || (0..k).any(|i| p.sym_at(idx, i) == Sym::Neg) {
                Some(Exclusion::SymbolNeg)
            } else {
                (0..=k).find(|&i| in_interior_plus(p, idx, i)).map(Exclusion::IntPlus)
            }
        } else if p.dir_at(idx) == DirSym::Plus || (0..k).any(|i| p.sym_at(idx, i) == Sym::Pos) {
            Some(Exclusion::SymbolPos)
        } else {
            (0..=k).find(|&i| in_interior_minus(p, idx, i)).map(Exclusion::IntMinus)
        };
        if let Some(r) = reason {
            out.push((x, r));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GridShape;

    fn pt(c: &[u32]) -> Point {
        Point::new(c)
    }

    #[test]
    fn p0_candidates() {
        for n in [2, 3, 5] {
            let g = GridShape::cube(3, n).unwrap();
            let r = cand_sets(&PiState::p0(&g));
            assert_eq!(r.plus_len + r.minus_len, 2 * g.len());
            for i in 0..=3 {
                assert!(interior_plus(&PiState::p0(&g), i).is_empty());
            }
        }
    }

    #[test]
    fn direction_interior() {
        let g = GridShape::cube(2, 8).unwrap();
        let mut p = PiState::p0(&g);
        p.assert_direction(&pt(&[3, 4]), DirSym::Plus).unwrap();
        let int: Vec<Point> = interior_plus(&p, 2);
        let want: Vec<Point> = g.points().filter(|x| pt(&[4, 5]).leq(x)).collect();
        assert_eq!(int, want);
    }
}
