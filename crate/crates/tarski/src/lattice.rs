//! Grid geometry: shapes, points, slices, boxes and the shaving maps.
//!
//! Coordinates are 1-based values; coordinate *indices* are 0-based in code,
//! so the direction coordinate of a `k`-dimensional instance has index `k`.
//! Points are enumerated lexicographically with coordinate 0 varying fastest,
//! and the linear index of a point is the mixed-radix encoding of `x - 1`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{usage, Error, Result};

pub const MAX_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridShape {
    k: usize,
    extents: [u32; MAX_DIM],
    strides: [usize; MAX_DIM],
    len: usize,
}

impl GridShape {
    pub fn new(extents: &[u32]) -> Result<Self> {
        let k = extents.len();
        if k == 0 || k > MAX_DIM {
            return usage(format!("dimension must be in 1..={MAX_DIM}, got {k}"));
        }
        let mut ext = [1u32; MAX_DIM];
        let mut strides = [0usize; MAX_DIM];
        let mut len: usize = 1;
        for (i, &n) in extents.iter().enumerate() {
            if n == 0 {
                return usage(format!("extent {} is zero", i + 1));
            }
            ext[i] = n;
            strides[i] = len;
            len = len
                .checked_mul(n as usize)
                .ok_or_else(|| Error::Usage("grid too large".into()))?;
        }
        if len > u32::MAX as usize {
            return usage("grid has more than 2^32 points");
        }
        Ok(GridShape { k, extents: ext, strides, len })
    }

    pub fn cube(k: usize, n: u32) -> Result<Self> {
        Self::new(&vec![n; k])
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn extents(&self) -> &[u32] {
        &self.extents[..self.k]
    }

    #[inline]
    pub fn extent(&self, i: usize) -> u32 {
        self.extents[i]
    }

    #[inline]
    pub fn stride(&self, i: usize) -> usize {
        self.strides[i]
    }

    /// Number of points.
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_cubic(&self) -> bool {
        self.extents().iter().all(|&n| n == self.extents[0])
    }

    #[inline]
    pub fn contains(&self, x: &Point) -> bool {
        x.k() == self.k && (0..self.k).all(|i| x[i] >= 1 && x[i] <= self.extents[i])
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            usage(format!("point {x} is outside grid {self}"))
        }
    }

    #[inline]
    pub fn index(&self, x: &Point) -> usize {
        let mut idx = 0;
        for i in 0..self.k {
            idx += (x[i] as usize - 1) * self.strides[i];
        }
        idx
    }

    #[inline]
    pub fn point(&self, mut idx: usize) -> Point {
        let mut c = [0u32; MAX_DIM];
        for (i, ci) in c.iter_mut().enumerate().take(self.k) {
            let n = self.extents[i] as usize;
            *ci = (idx % n) as u32 + 1;
            idx /= n;
        }
        Point { c, k: self.k as u8 }
    }

    /// Coordinate `i` of the point with linear index `idx`.
    #[inline]
    pub fn coord_of(&self, idx: usize, i: usize) -> u32 {
        ((idx / self.strides[i]) % self.extents[i] as usize) as u32 + 1
    }

    pub fn bottom(&self) -> Point {
        Point::splat(self.k, 1)
    }

    pub fn top(&self) -> Point {
        Point::new(self.extents())
    }

    pub fn points(&self) -> BoxIter {
        BoxIter::new(self.bottom(), self.top())
    }

    pub fn full_slice(&self) -> Slice {
        Slice::full(self.k)
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.extents().iter().map(|n| n.to_string()).collect();
        write!(f, "[{}]", parts.join("x"))
    }
}

impl Serialize for GridShape {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.extents().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridShape {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        GridShape::new(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    c: [u32; MAX_DIM],
    k: u8,
}

impl Point {
    pub fn new(coords: &[u32]) -> Point {
        assert!(!coords.is_empty() && coords.len() <= MAX_DIM, "bad point dimension");
        let mut c = [0u32; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point { c, k: coords.len() as u8 }
    }

    pub fn splat(k: usize, v: u32) -> Point {
        let mut c = [0u32; MAX_DIM];
        c[..k].fill(v);
        Point { c, k: k as u8 }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k as usize
    }

    #[inline]
    pub fn coords(&self) -> &[u32] {
        &self.c[..self.k as usize]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: u32) {
        self.c[i] = v;
    }

    #[inline]
    pub fn with(mut self, i: usize, v: u32) -> Point {
        self.c[i] = v;
        self
    }

    #[inline]
    pub fn leq(&self, y: &Point) -> bool {
        debug_assert_eq!(self.k, y.k);
        (0..self.k()).all(|i| self.c[i] <= y.c[i])
    }

    #[inline]
    pub fn lt(&self, y: &Point) -> bool {
        self.leq(y) && self != y
    }

    pub fn join(&self, y: &Point) -> Point {
        let mut r = *self;
        for i in 0..self.k() {
            r.c[i] = r.c[i].max(y.c[i]);
        }
        r
    }

    pub fn meet(&self, y: &Point) -> Point {
        let mut r = *self;
        for i in 0..self.k() {
            r.c[i] = r.c[i].min(y.c[i]);
        }
        r
    }

    /// `x + e_i`, or `None` when it leaves the grid.
    pub fn up(&self, shape: &GridShape, i: usize) -> Option<Point> {
        (self.c[i] < shape.extent(i)).then(|| self.with(i, self.c[i] + 1))
    }

    /// `x - e_i`, or `None` when it leaves the grid.
    pub fn down(&self, i: usize) -> Option<Point> {
        (self.c[i] > 1).then(|| self.with(i, self.c[i] - 1))
    }

    /// Index of the single coordinate in which `y = self + e_i`.
    pub fn unit_step_to(&self, y: &Point) -> Option<usize> {
        if self.k != y.k {
            return None;
        }
        let mut found = None;
        for i in 0..self.k() {
            match y.c[i] as i64 - self.c[i] as i64 {
                0 => {}
                1 if found.is_none() => found = Some(i),
                _ => return None,
            }
        }
        found
    }
}

impl std::ops::Index<usize> for Point {
    type Output = u32;
    #[inline]
    fn index(&self, i: usize) -> &u32 {
        debug_assert!(i < self.k());
        &self.c[i]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(serde::de::Error::custom("bad point dimension"));
        }
        Ok(Point::new(&v))
    }
}

/// Iterates the integer box `[lo, hi]` in lexicographic order, coordinate 0 fastest.
#[derive(Clone, Debug)]
pub struct BoxIter {
    lo: Point,
    hi: Point,
    cur: Option<Point>,
}

impl BoxIter {
    pub fn new(lo: Point, hi: Point) -> BoxIter {
        let cur = lo.leq(&hi).then_some(lo);
        BoxIter { lo, hi, cur }
    }

    pub fn volume(lo: &Point, hi: &Point) -> usize {
        if !lo.leq(hi) {
            return 0;
        }
        (0..lo.k()).map(|i| (hi[i] - lo[i] + 1) as usize).product()
    }
}

impl Iterator for BoxIter {
    type Item = Point;
    fn next(&mut self) -> Option<Point> {
        let out = self.cur?;
        let mut nxt = out;
        let mut i = 0;
        loop {
            if i == out.k() {
                self.cur = None;
                break;
            }
            if nxt.c[i] < self.hi.c[i] {
                nxt.c[i] += 1;
                self.cur = Some(nxt);
                break;
            }
            nxt.c[i] = self.lo.c[i];
            i += 1;
        }
        Some(out)
    }
}

/// A slice: every coordinate is free (stored as 0) or fixed to a value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slice {
    e: [u32; MAX_DIM],
    k: u8,
}

impl Slice {
    pub fn full(k: usize) -> Slice {
        Slice { e: [0; MAX_DIM], k: k as u8 }
    }

    /// Entries: `None` is free, `Some(v)` fixes the coordinate to `v`.
    pub fn new(entries: &[Option<u32>]) -> Slice {
        let mut e = [0u32; MAX_DIM];
        for (i, v) in entries.iter().enumerate() {
            e[i] = v.unwrap_or(0);
        }
        Slice { e, k: entries.len() as u8 }
    }

    /// The slice through `x` whose free coordinates are the bits of `mask`.
    pub fn through(x: &Point, mask: u8) -> Slice {
        let mut e = [0u32; MAX_DIM];
        for (i, ei) in e.iter_mut().enumerate().take(x.k()) {
            if mask & (1 << i) == 0 {
                *ei = x[i];
            }
        }
        Slice { e, k: x.k }
    }

    pub fn validate(&self, shape: &GridShape) -> Result<()> {
        if self.k() != shape.k() {
            return usage("slice dimension does not match grid");
        }
        for i in 0..self.k() {
            if self.e[i] > shape.extent(i) {
                return usage(format!("slice entry {} out of range", i + 1));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k as usize
    }

    #[inline]
    pub fn is_free(&self, i: usize) -> bool {
        self.e[i] == 0
    }

    #[inline]
    pub fn fixed(&self, i: usize) -> Option<u32> {
        (self.e[i] != 0).then_some(self.e[i])
    }

    pub fn free_mask(&self) -> u8 {
        (0..self.k()).filter(|&i| self.e[i] == 0).fold(0, |m, i| m | (1 << i))
    }

    pub fn free_coords(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k()).filter(move |&i| self.e[i] == 0)
    }

    pub fn dim(&self) -> usize {
        self.free_mask().count_ones() as usize
    }

    pub fn with_free(mut self, i: usize) -> Slice {
        self.e[i] = 0;
        self
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.k() == self.k() && (0..self.k()).all(|i| self.e[i] == 0 || self.e[i] == x[i])
    }

    pub fn bottom(&self) -> Point {
        let mut c = [0u32; MAX_DIM];
        for (i, ci) in c.iter_mut().enumerate().take(self.k()) {
            *ci = if self.e[i] == 0 { 1 } else { self.e[i] };
        }
        Point { c, k: self.k }
    }

    pub fn top(&self, shape: &GridShape) -> Point {
        let mut c = [0u32; MAX_DIM];
        for (i, ci) in c.iter_mut().enumerate().take(self.k()) {
            *ci = if self.e[i] == 0 { shape.extent(i) } else { self.e[i] };
        }
        Point { c, k: self.k }
    }

    pub fn len(&self, shape: &GridShape) -> usize {
        self.free_coords().map(|i| shape.extent(i) as usize).product()
    }

    pub fn is_empty(&self, _shape: &GridShape) -> bool {
        false
    }

    pub fn points(&self, shape: &GridShape) -> BoxIter {
        BoxIter::new(self.bottom(), self.top(shape))
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.k())
            .map(|i| if self.e[i] == 0 { "*".to_string() } else { self.e[i].to_string() })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Slice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Option<u32>> = (0..self.k()).map(|i| self.fixed(i)).collect();
        v.serialize(s)
    }
}

/// Dense ids for every slice of a shape: mixed radix over `n_i + 1` values
/// per coordinate, where 0 means free.
#[derive(Clone, Debug)]
pub struct SliceIndexer {
    k: usize,
    radix: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
    len: usize,
}

impl SliceIndexer {
    pub fn new(shape: &GridShape) -> SliceIndexer {
        let mut radix = [1usize; MAX_DIM];
        let mut strides = [0usize; MAX_DIM];
        let mut len = 1usize;
        for i in 0..shape.k() {
            radix[i] = shape.extent(i) as usize + 1;
            strides[i] = len;
            len *= radix[i];
        }
        SliceIndexer { k: shape.k(), radix, strides, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Id of the slice through `x` with free coordinates `mask`.
    #[inline]
    pub fn id(&self, x: &Point, mask: u8) -> usize {
        let mut id = 0;
        for i in 0..self.k {
            if mask & (1 << i) == 0 {
                id += x[i] as usize * self.strides[i];
            }
        }
        id
    }

    pub fn id_of(&self, s: &Slice) -> usize {
        (0..self.k).map(|i| s.e[i] as usize * self.strides[i]).sum()
    }

    pub fn slice(&self, mut id: usize) -> Slice {
        let mut e = [0u32; MAX_DIM];
        for (i, ei) in e.iter_mut().enumerate().take(self.k) {
            *ei = (id % self.radix[i]) as u32;
            id /= self.radix[i];
        }
        Slice { e, k: self.k as u8 }
    }
}

/// `x ≪_s y`: `x ⪯ y` with strict inequality on every free coordinate of `s`.
pub fn strictly_below_on_slice(x: &Point, y: &Point, s: &Slice) -> Result<bool> {
    if !s.contains(x) || !s.contains(y) {
        return usage("points are not on the slice");
    }
    Ok(x.leq(y) && s.free_coords().all(|i| x[i] < y[i]))
}

/// A sign vector on a coordinate subset.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPattern {
    mask: u8,
    signs: [i8; MAX_DIM],
}

impl SignPattern {
    pub fn new(pairs: &[(usize, i8)]) -> Result<SignPattern> {
        let mut p = SignPattern { mask: 0, signs: [0; MAX_DIM] };
        for &(i, s) in pairs {
            if i >= MAX_DIM || (s != 1 && s != -1) || p.mask & (1 << i) != 0 {
                return usage("bad sign pattern entry");
            }
            p.mask |= 1 << i;
            p.signs[i] = s;
        }
        if p.mask == 0 {
            return usage("sign pattern needs a nonempty domain");
        }
        Ok(p)
    }

    /// The all-`s` pattern on the coordinates in `mask`.
    pub fn uniform(mask: u8, s: i8) -> SignPattern {
        let mut signs = [0; MAX_DIM];
        for (i, v) in signs.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *v = s;
            }
        }
        SignPattern { mask, signs }
    }

    /// `a_i⁺`: +1 on `[k]` except -1 at `i`; `a_i⁻` is its negation.
    pub fn a_plus(k: usize, i: usize) -> SignPattern {
        let mut p = Self::uniform(((1u16 << k) - 1) as u8, 1);
        p.signs[i] = -1;
        p
    }

    pub fn a_minus(k: usize, i: usize) -> SignPattern {
        Self::a_plus(k, i).neg()
    }

    pub fn mask(&self) -> u8 {
        self.mask
    }

    pub fn get(&self, i: usize) -> Option<i8> {
        (self.mask & (1 << i) != 0).then_some(self.signs[i])
    }

    pub fn set(&mut self, i: usize, s: i8) {
        self.mask |= 1 << i;
        self.signs[i] = s;
    }

    pub fn neg(&self) -> SignPattern {
        let mut p = *self;
        for v in p.signs.iter_mut() {
            *v = -*v;
        }
        p
    }

    /// Whether `x` lies in the closed (or, with `inner`, open) orthant at `q`.
    #[inline]
    pub fn admits(&self, x: &Point, q: &Point, inner: bool) -> bool {
        (0..x.k()).all(|i| {
            if self.mask & (1 << i) == 0 {
                return true;
            }
            let d = (x[i] as i64 - q[i] as i64) * self.signs[i] as i64;
            if inner {
                d > 0
            } else {
                d >= 0
            }
        })
    }
}

impl fmt::Debug for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..MAX_DIM)
            .filter_map(|i| self.get(i).map(|s| format!("{}:{}", i + 1, if s > 0 { "+" } else { "-" })))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for SignPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(usize, i8)> = (0..MAX_DIM).filter_map(|i| self.get(i).map(|v| (i + 1, v))).collect();
        v.serialize(s)
    }
}

/// `B_s(q,φ)` or, with `inner`, `B^in_s(q,φ)`.
pub fn box_points(shape: &GridShape, s: &Slice, q: &Point, phi: &SignPattern, inner: bool) -> Result<Vec<Point>> {
    if !s.contains(q) {
        return usage("pivot is not on the slice");
    }
    if phi.mask() != s.free_mask() {
        return usage("sign pattern domain differs from the free coordinates");
    }
    Ok(s.points(shape).filter(|x| phi.admits(x, q, inner)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shave {
    Minus,
    Plus,
}

/// `x^{-i}` / `x^{+i}`; `i == k` exempts no coordinate.
pub fn shave(shape: &GridShape, x: &Point, i: usize, dir: Shave) -> Point {
    let mut y = *x;
    for j in 0..x.k() {
        if j == i {
            continue;
        }
        match dir {
            Shave::Minus if y[j] > 1 => y.set(j, y[j] - 1),
            Shave::Plus if y[j] < shape.extent(j) => y.set(j, y[j] + 1),
            _ => {}
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[u32]) -> Point {
        Point::new(c)
    }

    #[test]
    fn order_examples() {
        assert!(p(&[1, 2, 3]).leq(&p(&[1, 3, 3])));
        assert_eq!(p(&[1, 3]).join(&p(&[2, 1])), p(&[2, 3]));
        assert_eq!(p(&[1, 3]).meet(&p(&[2, 1])), p(&[1, 1]));
    }

    #[test]
    fn index_roundtrip_and_order() {
        let g = GridShape::new(&[3, 2, 4]).unwrap();
        for (idx, x) in g.points().enumerate() {
            assert_eq!(g.index(&x), idx);
            assert_eq!(g.point(idx), x);
            for i in 0..3 {
                assert_eq!(g.coord_of(idx, i), x[i]);
            }
        }
        assert_eq!(g.points().count(), 24);
        assert_eq!(g.points().nth(1).unwrap(), p(&[2, 1, 1]));
    }

    #[test]
    fn slice_examples() {
        let g = GridShape::cube(2, 8).unwrap();
        let s = Slice::new(&[None, Some(5)]);
        let pts: Vec<Point> = s.points(&g).collect();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0], p(&[1, 5]));
        assert_eq!(pts[7], p(&[8, 5]));
        let s0 = Slice::new(&[Some(3), Some(4)]);
        assert_eq!(s0.points(&g).collect::<Vec<_>>(), vec![p(&[3, 4])]);
        assert_eq!(Slice::full(2).points(&GridShape::cube(2, 3).unwrap()).count(), 9);
    }

    #[test]
    fn strictly_below_examples() {
        let row = Slice::new(&[None, Some(5)]);
        assert!(strictly_below_on_slice(&p(&[1, 5]), &p(&[5, 5]), &row).unwrap());
        let full = Slice::full(2);
        assert!(!strictly_below_on_slice(&p(&[2, 2]), &p(&[2, 3]), &full).unwrap());
        assert!(!strictly_below_on_slice(&p(&[2, 2]), &p(&[2, 2]), &full).unwrap());
        assert!(strictly_below_on_slice(&p(&[2, 4]), &p(&[5, 5]), &row).is_err());
    }

    #[test]
    fn box_examples() {
        let g = GridShape::cube(2, 3).unwrap();
        let full = Slice::full(2);
        let pp = SignPattern::new(&[(0, 1), (1, 1)]).unwrap();
        let closed = box_points(&g, &full, &p(&[2, 2]), &pp, false).unwrap();
        assert_eq!(closed, vec![p(&[2, 2]), p(&[3, 2]), p(&[2, 3]), p(&[3, 3])]);
        let inner = box_points(&g, &full, &p(&[2, 2]), &pp, true).unwrap();
        assert_eq!(inner, vec![p(&[3, 3])]);
        let g8 = GridShape::cube(2, 8).unwrap();
        let row = Slice::new(&[None, Some(5)]);
        let ray = box_points(&g8, &row, &p(&[4, 5]), &SignPattern::new(&[(0, 1)]).unwrap(), false).unwrap();
        assert_eq!(ray.len(), 5);
        assert_eq!(ray[0], p(&[4, 5]));
        assert!(box_points(&g8, &row, &p(&[4, 5]), &pp, false).is_err());
    }

    #[test]
    fn shave_examples() {
        let g = GridShape::cube(3, 5).unwrap();
        assert_eq!(shave(&g, &p(&[3, 1, 5]), 1, Shave::Minus), p(&[2, 1, 4]));
        assert_eq!(shave(&g, &p(&[3, 1, 5]), 1, Shave::Plus), p(&[4, 1, 5]));
        let g2 = GridShape::cube(2, 4).unwrap();
        assert_eq!(shave(&g2, &p(&[1, 1]), 2, Shave::Minus), p(&[1, 1]));
    }

    #[test]
    fn a_patterns() {
        let a = SignPattern::a_plus(3, 1);
        assert_eq!((a.get(0), a.get(1), a.get(2)), (Some(1), Some(-1), Some(1)));
        assert_eq!(SignPattern::a_minus(3, 1).get(1), Some(1));
    }
}
