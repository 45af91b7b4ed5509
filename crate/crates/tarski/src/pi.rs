//! Partial-information states.
//!
//! Every first-`k` symbol is an integer interval `[lo, hi] ⊆ [-1, 1]`; the six
//! symbols are exactly the six such intervals. Monotonicity of the underlying
//! simple function then reads as two families of unit-step rules, applied per
//! coordinate `i`:
//!
//! * `lo(x + e_j) ≥ lo(x)` for `j ≠ i`, and `lo(x + e_i) ≥ lo(x) - 1`;
//! * `hi(x - e_j) ≤ hi(x)` for `j ≠ i`, and `hi(x - e_i) ≤ hi(x) + 1`;
//!
//! plus the boundary facts `lo ≥ 0` at `x_i = 1` and `hi ≤ 0` at `x_i = n_i`.
//! A state is monotone iff it is a fixpoint of these rules without an empty
//! interval, which is what `check_monotone_pi` verifies and what the closure
//! engine maintains.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::lattice::{BoxIter, GridShape, Point, Slice};

/// A first-`k` symbol. The discriminant encodes `3·(lo+1) + (hi+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Sym {
    Neg = 0,
    Le = 1,
    Unknown = 2,
    Zero = 4,
    Ge = 5,
    Pos = 8,
}

impl Sym {
    pub const ALL: [Sym; 6] = [Sym::Neg, Sym::Zero, Sym::Pos, Sym::Le, Sym::Ge, Sym::Unknown];

    #[inline]
    pub fn lo(self) -> i8 {
        (self as u8 / 3) as i8 - 1
    }

    #[inline]
    pub fn hi(self) -> i8 {
        (self as u8 % 3) as i8 - 1
    }

    #[inline]
    pub fn from_bounds(lo: i8, hi: i8) -> Sym {
        match (lo, hi) {
            (-1, -1) => Sym::Neg,
            (-1, 0) => Sym::Le,
            (-1, 1) => Sym::Unknown,
            (0, 0) => Sym::Zero,
            (0, 1) => Sym::Ge,
            (1, 1) => Sym::Pos,
            _ => panic!("empty or out-of-range interval [{lo},{hi}]"),
        }
    }

    pub fn from_sign(v: i8) -> Sym {
        Sym::from_bounds(v, v)
    }

    #[inline]
    pub fn is_concrete(self) -> bool {
        self.lo() == self.hi()
    }

    /// The concrete value, if any.
    pub fn value(self) -> Option<i8> {
        self.is_concrete().then(|| self.lo())
    }

    #[inline]
    pub fn admits(self, v: i8) -> bool {
        self.lo() <= v && v <= self.hi()
    }

    /// `self ⇒ other`: `self` is at least as informative.
    #[inline]
    pub fn dominates(self, other: Sym) -> bool {
        self.lo() >= other.lo() && self.hi() <= other.hi()
    }

    /// Member of `{1, 0, ≥}`.
    #[inline]
    pub fn is_post(self) -> bool {
        self.lo() >= 0
    }

    /// Member of `{-1, 0, ≤}`.
    #[inline]
    pub fn is_pre(self) -> bool {
        self.hi() <= 0
    }

    pub fn token(self) -> &'static str {
        match self {
            Sym::Neg => "-1",
            Sym::Zero => "0",
            Sym::Pos => "+1",
            Sym::Le => "<=",
            Sym::Ge => ">=",
            Sym::Unknown => "?",
        }
    }

    pub fn from_token(t: &str) -> Option<Sym> {
        Some(match t {
            "-1" => Sym::Neg,
            "0" => Sym::Zero,
            "+1" => Sym::Pos,
            "<=" => Sym::Le,
            ">=" => Sym::Ge,
            "?" => Sym::Unknown,
            _ => return None,
        })
    }
}

/// The direction-coordinate symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum DirSym {
    Minus = 0,
    Unknown = 1,
    Plus = 2,
}

impl DirSym {
    pub fn from_sign(d: i8) -> DirSym {
        if d > 0 {
            DirSym::Plus
        } else {
            DirSym::Minus
        }
    }

    pub fn value(self) -> Option<i8> {
        match self {
            DirSym::Minus => Some(-1),
            DirSym::Plus => Some(1),
            DirSym::Unknown => None,
        }
    }

    pub fn dominates(self, other: DirSym) -> bool {
        other == DirSym::Unknown || self == other
    }

    pub fn admits(self, d: i8) -> bool {
        self.value().is_none_or(|v| v == d)
    }

    pub fn token(self) -> &'static str {
        match self {
            DirSym::Minus => "-",
            DirSym::Unknown => "?",
            DirSym::Plus => "+",
        }
    }

    pub fn from_token(t: &str) -> Option<DirSym> {
        Some(match t {
            "-" => DirSym::Minus,
            "?" => DirSym::Unknown,
            "+" => DirSym::Plus,
            _ => return None,
        })
    }
}

/// Points whose post or pre coordinate sets grew since the log was drained.
#[derive(Clone, Debug, Default)]
pub(crate) struct ChangeLog {
    pub post: Vec<u32>,
    pub pre: Vec<u32>,
}

#[derive(Clone)]
pub struct PiState {
    shape: GridShape,
    cells: Vec<Sym>,
    last: Vec<DirSym>,
    pub(crate) log: Option<ChangeLog>,
    stack: Vec<(u32, i8)>,
}

impl PartialEq for PiState {
    fn eq(&self, o: &PiState) -> bool {
        self.shape == o.shape && self.cells == o.cells && self.last == o.last
    }
}

impl Eq for PiState {}

impl fmt::Debug for PiState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PiState{}", self.shape)
    }
}

impl PiState {
    /// The all-unknown table, which is not monotone unless closed.
    pub fn blank(shape: &GridShape) -> PiState {
        PiState {
            shape: shape.clone(),
            cells: vec![Sym::Unknown; shape.len() * shape.k()],
            last: vec![DirSym::Unknown; shape.len()],
            log: None,
            stack: Vec::new(),
        }
    }

    /// `p⁰`: the boundary facts and nothing else.
    pub fn p0(shape: &GridShape) -> PiState {
        let mut p = PiState::blank(shape);
        let k = shape.k();
        for (idx, x) in shape.points().enumerate() {
            for i in 0..k {
                let lo = if x[i] == 1 { 0 } else { -1 };
                let hi = if x[i] == shape.extent(i) { 0 } else { 1 };
                p.cells[idx * k + i] = Sym::from_bounds(lo, hi);
            }
        }
        p
    }

    /// The fully revealed state of a sign function given as raw tables.
    pub(crate) fn from_tables(shape: &GridShape, signs: &[i8], dirs: &[i8]) -> PiState {
        let mut p = PiState::blank(shape);
        for (c, &s) in p.cells.iter_mut().zip(signs) {
            *c = Sym::from_sign(s);
        }
        for (l, &d) in p.last.iter_mut().zip(dirs) {
            *l = DirSym::from_sign(d);
        }
        p
    }

    /// Builds a state from explicit tables without closing or validating it.
    pub fn from_raw(shape: &GridShape, cells: Vec<Sym>, last: Vec<DirSym>) -> Result<PiState> {
        if cells.len() != shape.len() * shape.k() || last.len() != shape.len() {
            return usage("table sizes do not match the grid");
        }
        Ok(PiState { shape: shape.clone(), cells, last, log: None, stack: Vec::new() })
    }

    #[inline]
    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.shape.k()
    }

    #[inline]
    pub fn sym_at(&self, idx: usize, i: usize) -> Sym {
        self.cells[idx * self.shape.k() + i]
    }

    #[inline]
    pub fn dir_at(&self, idx: usize) -> DirSym {
        self.last[idx]
    }

    pub fn sym(&self, x: &Point, i: usize) -> Sym {
        self.sym_at(self.shape.index(x), i)
    }

    pub fn dir(&self, x: &Point) -> DirSym {
        self.last[self.shape.index(x)]
    }

    pub fn cells(&self) -> &[Sym] {
        &self.cells
    }

    pub fn dirs(&self) -> &[DirSym] {
        &self.last
    }

    /// Overwrites one cell with no propagation; only for building test inputs.
    pub fn set_raw(&mut self, x: &Point, i: usize, s: Sym) {
        let k = self.k();
        let idx = self.shape.index(x);
        self.cells[idx * k + i] = s;
    }

    pub fn set_raw_dir(&mut self, x: &Point, d: DirSym) {
        let idx = self.shape.index(x);
        self.last[idx] = d;
    }

    /// Bitmask of coordinates with a symbol in `{1,0,≥}` at `idx`.
    #[inline]
    pub fn post_mask(&self, idx: usize) -> u8 {
        let k = self.k();
        let row = &self.cells[idx * k..idx * k + k];
        let mut m = 0u8;
        for (i, s) in row.iter().enumerate() {
            if s.is_post() {
                m |= 1 << i;
            }
        }
        m
    }

    #[inline]
    pub fn pre_mask(&self, idx: usize) -> u8 {
        let k = self.k();
        let row = &self.cells[idx * k..idx * k + k];
        let mut m = 0u8;
        for (i, s) in row.iter().enumerate() {
            if s.is_pre() {
                m |= 1 << i;
            }
        }
        m
    }

    /// All `k + 1` coordinates concrete.
    pub fn is_fully_concrete(&self, idx: usize) -> bool {
        let k = self.k();
        self.cells[idx * k..idx * k + k].iter().all(|s| s.is_concrete()) && self.last[idx] != DirSym::Unknown
    }

    pub fn concrete_count(&self) -> usize {
        self.cells.iter().filter(|s| s.is_concrete()).count() + self.last.iter().filter(|d| **d != DirSym::Unknown).count()
    }

    fn contradiction(&self, idx: usize, coord: usize) -> Error {
        Error::Contradiction { point: self.shape.point(idx), coord }
    }

    /// Raises the lower bound of cell `(idx, i)` to `v` and propagates.
    pub(crate) fn raise_lo(&mut self, idx: usize, i: usize, v: i8) -> Result<()> {
        let k = self.k();
        let mut stack = std::mem::take(&mut self.stack);
        stack.clear();
        stack.push((idx as u32, v));
        let mut res = Ok(());
        while let Some((x, v)) = stack.pop() {
            let x = x as usize;
            let c = self.cells[x * k + i];
            if c.lo() >= v {
                continue;
            }
            if v > c.hi() {
                res = Err(self.contradiction(x, i));
                break;
            }
            self.cells[x * k + i] = Sym::from_bounds(v, c.hi());
            if c.lo() < 0 {
                if let Some(log) = self.log.as_mut() {
                    log.post.push(x as u32);
                }
            }
            for j in 0..k {
                if self.shape.coord_of(x, j) < self.shape.extent(j) {
                    let y = x + self.shape.stride(j);
                    let w = if j == i { v - 1 } else { v };
                    if w >= 0 && self.cells[y * k + i].lo() < w {
                        stack.push((y as u32, w));
                    }
                }
            }
        }
        self.stack = stack;
        res
    }

    /// Lowers the upper bound of cell `(idx, i)` to `v` and propagates.
    pub(crate) fn lower_hi(&mut self, idx: usize, i: usize, v: i8) -> Result<()> {
        let k = self.k();
        let mut stack = std::mem::take(&mut self.stack);
        stack.clear();
        stack.push((idx as u32, v));
        let mut res = Ok(());
        while let Some((x, v)) = stack.pop() {
            let x = x as usize;
            let c = self.cells[x * k + i];
            if c.hi() <= v {
                continue;
            }
            if v < c.lo() {
                res = Err(self.contradiction(x, i));
                break;
            }
            self.cells[x * k + i] = Sym::from_bounds(c.lo(), v);
            if c.hi() > 0 {
                if let Some(log) = self.log.as_mut() {
                    log.pre.push(x as u32);
                }
            }
            for j in 0..k {
                if self.shape.coord_of(x, j) > 1 {
                    let y = x - self.shape.stride(j);
                    let w = if j == i { v + 1 } else { v };
                    if w <= 0 && self.cells[y * k + i].hi() > w {
                        stack.push((y as u32, w));
                    }
                }
            }
        }
        self.stack = stack;
        res
    }

    /// Intersects cell `(idx, i)` with `s` and propagates.
    pub(crate) fn assert_sym(&mut self, idx: usize, i: usize, s: Sym) -> Result<()> {
        self.raise_lo(idx, i, s.lo())?;
        self.lower_hi(idx, i, s.hi())
    }

    /// Sets the direction symbol at `idx` and propagates along the cone.
    pub(crate) fn assert_dir(&mut self, idx: usize, d: DirSym) -> Result<()> {
        if d == DirSym::Unknown {
            return Ok(());
        }
        let k = self.k();
        let mut stack = std::mem::take(&mut self.stack);
        stack.clear();
        stack.push((idx as u32, 0));
        let mut res = Ok(());
        while let Some((x, _)) = stack.pop() {
            let x = x as usize;
            let cur = self.last[x];
            if cur == d {
                continue;
            }
            if cur != DirSym::Unknown {
                res = Err(self.contradiction(x, k));
                break;
            }
            self.last[x] = d;
            for j in 0..k {
                let c = self.shape.coord_of(x, j);
                if d == DirSym::Plus && c < self.shape.extent(j) {
                    stack.push(((x + self.shape.stride(j)) as u32, 0));
                } else if d == DirSym::Minus && c > 1 {
                    stack.push(((x - self.shape.stride(j)) as u32, 0));
                }
            }
        }
        self.stack = stack;
        res
    }

    /// Asserts `p(x)_i = s` (or the direction when `i == k`) on a closed state.
    pub fn assert_cell(&mut self, x: &Point, i: usize, s: Sym) -> Result<()> {
        self.shape.check(x)?;
        let idx = self.shape.index(x);
        self.assert_sym(idx, i, s)
    }

    pub fn assert_direction(&mut self, x: &Point, d: DirSym) -> Result<()> {
        self.shape.check(x)?;
        let idx = self.shape.index(x);
        self.assert_dir(idx, d)
    }

    /// Least monotone state dominating `self` (including the boundary facts).
    pub fn monotone_closure(&self) -> Result<PiState> {
        let mut q = PiState::p0(&self.shape);
        let k = self.k();
        for idx in 0..self.shape.len() {
            for i in 0..k {
                let s = self.cells[idx * k + i];
                q.assert_sym(idx, i, s)?;
            }
            q.assert_dir(idx, self.last[idx])?;
        }
        Ok(q)
    }

    /// Symbolwise domination `self ⇒ other`.
    pub fn dominates(&self, other: &PiState) -> bool {
        self.shape == other.shape
            && self.cells.iter().zip(&other.cells).all(|(a, b)| a.dominates(*b))
            && self.last.iter().zip(&other.last).all(|(a, b)| a.dominates(*b))
    }

    /// `Sol(p)`: points already revealed as solutions.
    pub fn sol_set(&self) -> Vec<Point> {
        (0..self.shape.len()).filter(|&idx| self.is_solution(idx)).map(|idx| self.shape.point(idx)).collect()
    }

    pub fn is_solution(&self, idx: usize) -> bool {
        let full = ((1u16 << self.k()) - 1) as u8;
        match self.last[idx] {
            DirSym::Plus => self.post_mask(idx) == full,
            DirSym::Minus => self.pre_mask(idx) == full,
            DirSym::Unknown => false,
        }
    }

    /// 64-bit digest of the table, stable across platforms.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for n in self.shape.extents() {
            h.update(n.to_le_bytes());
        }
        h.update(self.cells.iter().map(|s| *s as u8).collect::<Vec<u8>>());
        h.update(self.last.iter().map(|s| *s as u8).collect::<Vec<u8>>());
        hex::encode(&h.finalize()[..8])
    }
}

/// Which rule a monotonicity violation breaks, numbered as the definition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonotoneViolation {
    pub rule: u8,
    pub point: Point,
    pub other: Point,
    pub coord: usize,
}

/// Verifies conditions (1)–(9) via their unit-step forms.
pub fn check_monotone_pi(p: &PiState) -> std::result::Result<(), MonotoneViolation> {
    let shape = p.shape();
    let k = shape.k();
    for (idx, x) in shape.points().enumerate() {
        for i in 0..k {
            let c = p.sym_at(idx, i);
            if x[i] == 1 && !c.is_post() {
                return Err(MonotoneViolation { rule: 6, point: x, other: x, coord: i });
            }
            if x[i] == shape.extent(i) && !c.is_pre() {
                return Err(MonotoneViolation { rule: 7, point: x, other: x, coord: i });
            }
            for j in 0..k {
                let Some(y) = x.up(shape, j) else { continue };
                let d = p.sym(&y, i);
                let slack = if j == i { 1 } else { 0 };
                if d.lo() < c.lo() - slack {
                    let rule = match c {
                        Sym::Pos => 1,
                        _ if d == Sym::Neg => 2,
                        Sym::Zero => 3,
                        _ => 5,
                    };
                    return Err(MonotoneViolation { rule, point: x, other: y, coord: i });
                }
                if c.hi() > d.hi() + slack {
                    let rule = match d {
                        Sym::Neg => 2,
                        Sym::Zero => 3,
                        _ => 4,
                    };
                    return Err(MonotoneViolation { rule, point: y, other: x, coord: i });
                }
            }
        }
        for j in 0..k {
            let Some(y) = x.up(shape, j) else { continue };
            let (a, b) = (p.dir_at(idx), p.dir(&y));
            if a == DirSym::Plus && b != DirSym::Plus {
                return Err(MonotoneViolation { rule: 8, point: x, other: y, coord: k });
            }
            if b == DirSym::Minus && a != DirSym::Minus {
                return Err(MonotoneViolation { rule: 9, point: y, other: x, coord: k });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliceSummary {
    pub post: Vec<Point>,
    pub pre: Vec<Point>,
    pub j: Option<Point>,
    pub m: Option<Point>,
}

/// `Post_s`, `Pre_s`, `J_s`, `M_s` by direct scan of the slice.
pub fn post_pre_j_m(p: &PiState, s: &Slice) -> SliceSummary {
    let shape = p.shape();
    let mask = s.free_mask();
    let mut out = SliceSummary { post: vec![], pre: vec![], j: None, m: None };
    for x in s.points(shape) {
        let idx = shape.index(&x);
        if p.post_mask(idx) & mask == mask {
            out.j = Some(out.j.map_or(x, |j| j.join(&x)));
            out.post.push(x);
        }
        if p.pre_mask(idx) & mask == mask {
            out.m = Some(out.m.map_or(x, |m| m.meet(&x)));
            out.pre.push(x);
        }
    }
    out
}

/// `J_s` alone, by scan.
pub fn join_of_post(p: &PiState, s: &Slice) -> Option<Point> {
    let shape = p.shape();
    let mask = s.free_mask();
    let mut j: Option<Point> = None;
    for x in s.points(shape) {
        if p.post_mask(shape.index(&x)) & mask == mask {
            j = Some(j.map_or(x, |j| j.join(&x)));
        }
    }
    j
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SafetyFault {
    /// A free coordinate below `J_s` is not concrete.
    OpenBelowJ(usize),
    /// No free coordinate below `J_s` carries +1.
    NoPlusBelowJ,
    OpenAboveM(usize),
    NoMinusAboveM,
    JNotBelowM,
    EmptyPost,
    EmptyPre,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SafetyViolation {
    pub slice: Slice,
    pub point: Point,
    pub fault: SafetyFault,
}

impl fmt::Display for SafetyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} on slice {} at {}", self.fault, self.slice, self.point)
    }
}

/// Checks one slice against the safety conditions.
pub fn check_slice(p: &PiState, s: &Slice) -> std::result::Result<(), SafetyViolation> {
    let shape = p.shape();
    let mask = s.free_mask();
    if mask == 0 {
        return Ok(());
    }
    let sum = post_pre_j_m(p, s);
    let bottom = s.bottom();
    let (Some(j), Some(m)) = (sum.j, sum.m) else {
        let fault = if sum.j.is_none() { SafetyFault::EmptyPost } else { SafetyFault::EmptyPre };
        return Err(SafetyViolation { slice: *s, point: bottom, fault });
    };
    for x in BoxIter::new(bottom, j) {
        if x == j {
            continue;
        }
        let idx = shape.index(&x);
        let mut plus = false;
        for i in s.free_coords() {
            if x[i] < j[i] {
                let c = p.sym_at(idx, i);
                if !c.is_concrete() {
                    return Err(SafetyViolation { slice: *s, point: x, fault: SafetyFault::OpenBelowJ(i) });
                }
                plus |= c == Sym::Pos;
            }
        }
        if !plus {
            return Err(SafetyViolation { slice: *s, point: x, fault: SafetyFault::NoPlusBelowJ });
        }
    }
    for x in BoxIter::new(m, s.top(shape)) {
        if x == m {
            continue;
        }
        let idx = shape.index(&x);
        let mut minus = false;
        for i in s.free_coords() {
            if x[i] > m[i] {
                let c = p.sym_at(idx, i);
                if !c.is_concrete() {
                    return Err(SafetyViolation { slice: *s, point: x, fault: SafetyFault::OpenAboveM(i) });
                }
                minus |= c == Sym::Neg;
            }
        }
        if !minus {
            return Err(SafetyViolation { slice: *s, point: x, fault: SafetyFault::NoMinusAboveM });
        }
    }
    if !j.leq(&m) {
        return Err(SafetyViolation { slice: *s, point: j, fault: SafetyFault::JNotBelowM });
    }
    Ok(())
}

/// Every slice of the grid, grouped by free mask in increasing order.
pub fn all_slices(shape: &GridShape) -> impl Iterator<Item = Slice> + '_ {
    let k = shape.k();
    (1u8..(1u8 << k)).flat_map(move |mask| {
        let mut hi = shape.top();
        for i in 0..k {
            if mask & (1 << i) != 0 {
                hi.set(i, 1);
            }
        }
        BoxIter::new(shape.bottom(), hi).map(move |x| Slice::through(&x, mask))
    })
}

/// Exhaustive safety validation over every slice; the reference oracle.
pub fn check_safe_pi(p: &PiState) -> std::result::Result<(), SafetyViolation> {
    for s in all_slices(p.shape()) {
        check_slice(p, &s)?;
    }
    Ok(())
}

pub fn is_safe_pi(p: &PiState) -> bool {
    check_monotone_pi(p).is_ok() && check_safe_pi(p).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[u32]) -> Point {
        Point::new(c)
    }

    #[test]
    fn symbol_intervals() {
        for s in Sym::ALL {
            assert_eq!(Sym::from_bounds(s.lo(), s.hi()), s);
            assert!(s.dominates(s));
            assert!(s.dominates(Sym::Unknown));
        }
        assert!(Sym::Zero.dominates(Sym::Le) && Sym::Zero.dominates(Sym::Ge));
        assert!(Sym::Neg.dominates(Sym::Le) && !Sym::Neg.dominates(Sym::Ge));
        assert!(Sym::Pos.dominates(Sym::Ge) && !Sym::Le.dominates(Sym::Ge));
    }

    #[test]
    fn p0_examples() {
        let g = GridShape::cube(2, 3).unwrap();
        let p = PiState::p0(&g);
        assert_eq!([p.sym(&pt(&[1, 1]), 0), p.sym(&pt(&[1, 1]), 1)], [Sym::Ge, Sym::Ge]);
        assert_eq!([p.sym(&pt(&[3, 3]), 0), p.sym(&pt(&[3, 3]), 1)], [Sym::Le, Sym::Le]);
        assert_eq!([p.sym(&pt(&[2, 2]), 0), p.sym(&pt(&[2, 2]), 1)], [Sym::Unknown, Sym::Unknown]);
        assert_eq!(p.dir(&pt(&[2, 2])), DirSym::Unknown);
        let g1 = GridShape::new(&[3, 1]).unwrap();
        assert_eq!(PiState::p0(&g1).sym(&pt(&[2, 1]), 1), Sym::Zero);
        assert!(check_monotone_pi(&p).is_ok());
        assert!(check_safe_pi(&p).is_ok());
        assert!(p.sol_set().is_empty());
        assert_eq!(p.monotone_closure().unwrap(), p);
    }

    #[test]
    fn closure_f1() {
        let g = GridShape::cube(2, 8).unwrap();
        let mut p = PiState::p0(&g);
        p.assert_cell(&pt(&[4, 5]), 0, Sym::Pos).unwrap();
        for y in 5..=8 {
            assert_eq!(p.sym(&pt(&[4, y]), 0), Sym::Pos);
            assert_eq!(p.sym(&pt(&[5, y]), 0), Sym::Ge);
            assert_eq!(p.sym(&pt(&[6, y]), 0), Sym::Unknown);
        }
        assert_eq!(p.sym(&pt(&[4, 4]), 0), Sym::Unknown);
        assert!(check_monotone_pi(&p).is_ok());
        let row = Slice::new(&[None, Some(5)]);
        assert_eq!(post_pre_j_m(&p, &row).j, Some(pt(&[5, 5])));
        let v = check_safe_pi(&p).unwrap_err();
        assert_eq!(v.slice, row);
        assert_eq!(v.point, pt(&[1, 5]));
    }

    #[test]
    fn closure_dir() {
        let g = GridShape::cube(2, 8).unwrap();
        let mut p = PiState::p0(&g);
        p.assert_direction(&pt(&[3, 4]), DirSym::Plus).unwrap();
        for x in g.points() {
            assert_eq!(p.dir(&x) == DirSym::Plus, pt(&[3, 4]).leq(&x));
        }
        assert!(p.assert_direction(&pt(&[8, 8]), DirSym::Minus).is_err());
    }

    #[test]
    fn monotone_violations() {
        let g = GridShape::cube(2, 8).unwrap();
        let mut p = PiState::p0(&g);
        p.set_raw(&pt(&[4, 5]), 0, Sym::Pos);
        assert_eq!(check_monotone_pi(&p).unwrap_err().rule, 1);
        let g3 = GridShape::cube(2, 3).unwrap();
        let mut q = PiState::p0(&g3);
        q.set_raw_dir(&pt(&[2, 2]), DirSym::Plus);
        assert_eq!(check_monotone_pi(&q).unwrap_err().rule, 8);
    }

    #[test]
    fn solution_patterns() {
        let g = GridShape::cube(2, 3).unwrap();
        let mut p = PiState::p0(&g);
        let x = pt(&[2, 2]);
        p.set_raw(&x, 0, Sym::Zero);
        p.set_raw(&x, 1, Sym::Zero);
        p.set_raw_dir(&x, DirSym::Plus);
        assert_eq!(p.sol_set(), vec![x]);
        let mut q = PiState::p0(&g);
        q.set_raw(&x, 0, Sym::Le);
        q.set_raw(&x, 1, Sym::Neg);
        q.set_raw_dir(&x, DirSym::Minus);
        assert_eq!(q.sol_set(), vec![x]);
    }
}
