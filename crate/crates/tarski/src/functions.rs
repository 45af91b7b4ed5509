//! Concrete sign functions, their validators and generators, and the
//! query-counting oracle.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumerate;
use crate::error::{usage, Error, Result};
use crate::lattice::{GridShape, Point, Slice, SliceIndexer, MAX_DIM};
use crate::pi::{check_safe_pi, PiState, SafetyViolation, Sym};

/// `h(x)`: `k` coordinate signs and a direction bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignVector {
    signs: [i8; MAX_DIM],
    k: u8,
    dir: i8,
}

impl SignVector {
    pub fn new(signs: &[i8], dir: i8) -> Result<SignVector> {
        if signs.is_empty() || signs.len() > MAX_DIM {
            return usage("bad sign vector length");
        }
        if signs.iter().any(|s| !(-1..=1).contains(s)) || (dir != 1 && dir != -1) {
            return usage("sign out of range");
        }
        let mut s = [0i8; MAX_DIM];
        s[..signs.len()].copy_from_slice(signs);
        Ok(SignVector { signs: s, k: signs.len() as u8, dir })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k as usize
    }

    #[inline]
    pub fn signs(&self) -> &[i8] {
        &self.signs[..self.k as usize]
    }

    #[inline]
    pub fn sign(&self, i: usize) -> i8 {
        self.signs[i]
    }

    #[inline]
    pub fn dir(&self) -> i8 {
        self.dir
    }

    pub fn is_zero(&self) -> bool {
        self.signs().iter().all(|&s| s == 0)
    }

    /// `h(x) ⪰ 0` including the direction bit.
    pub fn is_star_plus(&self) -> bool {
        self.dir == 1 && self.signs().iter().all(|&s| s >= 0)
    }

    pub fn is_star_minus(&self) -> bool {
        self.dir == -1 && self.signs().iter().all(|&s| s <= 0)
    }

    pub fn is_star_solution(&self) -> bool {
        self.is_star_plus() || self.is_star_minus()
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}|{:+}", self.signs(), self.dir)
    }
}

impl Serialize for SignVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut v: Vec<i8> = self.signs().to_vec();
        v.push(self.dir);
        v.serialize(s)
    }
}

/// A dense sign-function table.
#[derive(Clone, PartialEq, Eq)]
pub struct SignFunction {
    shape: GridShape,
    signs: Vec<i8>,
    dirs: Vec<i8>,
}

impl fmt::Debug for SignFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignFunction{}", self.shape)
    }
}

impl SignFunction {
    pub fn from_tables(shape: &GridShape, signs: Vec<i8>, dirs: Vec<i8>) -> Result<SignFunction> {
        if signs.len() != shape.len() * shape.k() || dirs.len() != shape.len() {
            return usage("table sizes do not match the grid");
        }
        if signs.iter().any(|s| !(-1..=1).contains(s)) || dirs.iter().any(|&d| d != 1 && d != -1) {
            return Err(Error::Data("sign out of range".into()));
        }
        Ok(SignFunction { shape: shape.clone(), signs, dirs })
    }

    /// Tabulates `h`; does not validate.
    pub fn from_fn(shape: &GridShape, mut h: impl FnMut(&Point) -> SignVector) -> SignFunction {
        let k = shape.k();
        let mut signs = Vec::with_capacity(shape.len() * k);
        let mut dirs = Vec::with_capacity(shape.len());
        for x in shape.points() {
            let v = h(&x);
            signs.extend_from_slice(v.signs());
            dirs.push(v.dir());
        }
        SignFunction { shape: shape.clone(), signs, dirs }
    }

    #[inline]
    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    #[inline]
    pub fn sign_at(&self, idx: usize, i: usize) -> i8 {
        self.signs[idx * self.shape.k() + i]
    }

    #[inline]
    pub fn dir_at(&self, idx: usize) -> i8 {
        self.dirs[idx]
    }

    pub fn at(&self, idx: usize) -> SignVector {
        let k = self.shape.k();
        let mut s = [0i8; MAX_DIM];
        s[..k].copy_from_slice(&self.signs[idx * k..idx * k + k]);
        SignVector { signs: s, k: k as u8, dir: self.dirs[idx] }
    }

    pub fn get(&self, x: &Point) -> SignVector {
        self.at(self.shape.index(x))
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn dirs(&self) -> &[i8] {
        &self.dirs
    }

    /// The fully revealed PI state `p = h`.
    pub fn to_pi(&self) -> PiState {
        PiState::from_tables(&self.shape, &self.signs, &self.dirs)
    }

    pub fn fixed_points(&self) -> Vec<Point> {
        (0..self.shape.len()).filter(|&i| self.at(i).is_zero()).map(|i| self.shape.point(i)).collect()
    }

    /// `Sol(h)`.
    pub fn star_solutions(&self) -> Vec<Point> {
        (0..self.shape.len()).filter(|&i| self.at(i).is_star_solution()).map(|i| self.shape.point(i)).collect()
    }

    /// Points of `s` where every free sign is 0.
    pub fn fixed_points_on(&self, s: &Slice) -> Vec<Point> {
        s.points(&self.shape)
            .filter(|x| {
                let v = self.get(x);
                s.free_coords().all(|i| v.sign(i) == 0)
            })
            .collect()
    }

    pub fn validated(self) -> Result<SignFunction> {
        if let Err(v) = check_monotone_sign(&self) {
            return Err(Error::Data(format!("not monotone: {v}")));
        }
        Ok(self)
    }
}

/// Sign-reduces a raw monotone map `G : grid → grid × {±1}`.
pub fn sgn_reduce(shape: &GridShape, mut raw: impl FnMut(&Point) -> (Point, i8)) -> Result<SignFunction> {
    let k = shape.k();
    let mut signs = Vec::with_capacity(shape.len() * k);
    let mut dirs = Vec::with_capacity(shape.len());
    for x in shape.points() {
        let (y, d) = raw(&x);
        if !shape.contains(&y) {
            return Err(Error::Data(format!("raw image {y} of {x} is outside the grid")));
        }
        if d != 1 && d != -1 {
            return Err(Error::Data(format!("raw direction {d} at {x}")));
        }
        for i in 0..k {
            signs.push((y[i] as i64 - x[i] as i64).signum() as i8);
        }
        dirs.push(d);
    }
    Ok(SignFunction { shape: shape.clone(), signs, dirs })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignViolation {
    /// Condition number; 6 and 7 are the lower and upper boundary facts.
    pub rule: u8,
    pub point: Point,
    pub other: Point,
    pub coord: usize,
}

impl fmt::Display for SignViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition ({}) at {} vs {} in coordinate {}", self.rule, self.point, self.other, self.coord + 1)
    }
}

/// Monotonicity plus boundary feasibility, via unit steps.
pub fn check_monotone_sign(h: &SignFunction) -> std::result::Result<(), SignViolation> {
    let shape = h.shape();
    let k = shape.k();
    for (idx, x) in shape.points().enumerate() {
        for i in 0..k {
            let v = h.sign_at(idx, i);
            if x[i] == 1 && v < 0 {
                return Err(SignViolation { rule: 6, point: x, other: x, coord: i });
            }
            if x[i] == shape.extent(i) && v > 0 {
                return Err(SignViolation { rule: 7, point: x, other: x, coord: i });
            }
        }
        for j in 0..k {
            let Some(y) = x.up(shape, j) else { continue };
            let yi = idx + shape.stride(j);
            for i in 0..k {
                let (a, b) = (h.sign_at(idx, i), h.sign_at(yi, i));
                let slack = if i == j { 1 } else { 0 };
                if a > b + slack {
                    let rule = if a == 1 { 1 } else { 2 };
                    return Err(SignViolation { rule, point: x, other: y, coord: i });
                }
            }
            if h.dir_at(idx) > h.dir_at(yi) {
                return Err(SignViolation { rule: 4, point: x, other: y, coord: k });
            }
        }
    }
    Ok(())
}

/// Why a slice fails the unique-fixed-point test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnsafeSlice {
    pub slice: Slice,
    /// Up to two fixed points of the slice (none, or the first two found).
    pub evidence: Vec<Point>,
}

/// Unique fixed point on every slice, cross-checked against the safe-PI
/// conditions on the fully revealed state. `Ok(None)` means safe.
pub fn check_safe(h: &SignFunction) -> Result<Option<UnsafeSlice>> {
    if let Err(v) = check_monotone_sign(h) {
        return usage(format!("check_safe needs a monotone function: {v}"));
    }
    let by_count = unique_fixed_point_violation(h);
    let by_pi: std::result::Result<(), SafetyViolation> = check_safe_pi(&h.to_pi());
    if by_count.is_none() != by_pi.is_ok() {
        return Err(Error::Invariant(format!(
            "safety criteria disagree on {:?}: count says {:?}, conditions say {:?}",
            h.shape(),
            by_count,
            by_pi.err()
        )));
    }
    Ok(by_count)
}

pub fn is_safe(h: &SignFunction) -> bool {
    check_monotone_sign(h).is_ok() && unique_fixed_point_violation(h).is_none()
}

fn unique_fixed_point_violation(h: &SignFunction) -> Option<UnsafeSlice> {
    let shape = h.shape();
    let k = shape.k();
    let ix = SliceIndexer::new(shape);
    let mut count = vec![0u32; ix.len()];
    for (idx, x) in shape.points().enumerate() {
        let mut z = 0u8;
        for i in 0..k {
            if h.sign_at(idx, i) == 0 {
                z |= 1 << i;
            }
        }
        let mut f = z;
        while f != 0 {
            count[ix.id(&x, f)] += 1;
            f = (f - 1) & z;
        }
    }
    for s in crate::pi::all_slices(shape) {
        if count[ix.id_of(&s)] != 1 {
            let mut ev = h.fixed_points_on(&s);
            ev.truncate(2);
            return Some(UnsafeSlice { slice: s, evidence: ev });
        }
    }
    None
}

/// `f|_p`.
pub fn restrict_given_pi(f: &SignFunction, p: &PiState) -> Result<SignFunction> {
    if f.shape() != p.shape() {
        return usage("shape mismatch");
    }
    let k = f.shape().k();
    let mut signs = f.signs.clone();
    for idx in 0..f.shape().len() {
        if !p.dir_at(idx).admits(f.dir_at(idx)) {
            return usage(format!("inconsistent last coordinate at {}", f.shape().point(idx)));
        }
        for i in 0..k {
            let v = f.sign_at(idx, i);
            signs[idx * k + i] = match p.sym_at(idx, i) {
                Sym::Ge => v.max(0),
                Sym::Le => v.min(0),
                Sym::Unknown => v,
                s => s.lo(),
            };
        }
    }
    Ok(SignFunction { shape: f.shape().clone(), signs, dirs: f.dirs.clone() })
}

/// `f ⇒ p` at every cell including the last coordinate.
pub fn consistent(f: &SignFunction, p: &PiState) -> bool {
    let k = f.shape().k();
    f.shape() == p.shape()
        && (0..f.shape().len()).all(|idx| {
            (0..k).all(|i| p.sym_at(idx, i).admits(f.sign_at(idx, i))) && p.dir_at(idx).admits(f.dir_at(idx))
        })
}

/// Whether `p` respects `f`.
pub fn respects(p: &PiState, f: &SignFunction) -> bool {
    first_respect_failure(p, f).is_none()
}

pub fn first_respect_failure(p: &PiState, f: &SignFunction) -> Option<Point> {
    let k = f.shape().k();
    (0..f.shape().len())
        .find(|&idx| {
            if (0..k).any(|i| matches!(p.sym_at(idx, i), Sym::Pos | Sym::Neg)) {
                return false;
            }
            let bad = (0..k).any(|i| {
                let v = f.sign_at(idx, i);
                match p.sym_at(idx, i) {
                    Sym::Ge => v < 0,
                    Sym::Le => v > 0,
                    Sym::Zero => v != 0,
                    _ => false,
                }
            });
            bad || !p.dir_at(idx).admits(f.dir_at(idx))
        })
        .map(|idx| f.shape().point(idx))
}

pub fn consistency_and_respect(f: &SignFunction, p: &PiState) -> (bool, bool) {
    (consistent(f, p), respects(p, f))
}

/// Instance families.
#[derive(Clone, Debug)]
pub enum Family {
    /// `sgn(t - x)` with an up-set direction labeling; always safe.
    Attractor { target: Option<Point>, generators: Option<Vec<Point>> },
    /// `sgn(τ_i(x_{-i}) - x_i)` for random monotone staircase targets `τ_i`
    /// of small slope, resampled until safe.
    Staircase,
    /// Sign reduction of a random monotone affine-floor map; monotone but
    /// not necessarily safe.
    Monotone,
    Explicit(SignFunction),
    ExhaustiveIndex(u64),
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Attractor { .. } => "attractor",
            Family::Staircase => "staircase",
            Family::Monotone => "monotone",
            Family::Explicit(_) => "explicit",
            Family::ExhaustiveIndex(_) => "exhaustive",
        }
    }

    /// The parameterless families by tag.
    pub fn from_tag(tag: &str) -> Option<Family> {
        Some(match tag {
            "attractor" => Family::Attractor { target: None, generators: None },
            "staircase" => Family::Staircase,
            "monotone" => Family::Monotone,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub family: Family,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(family: Family, seed: u64) -> InstanceSpec {
        InstanceSpec { family, seed }
    }
}

/// Largest grid accepted by the exhaustive-index family.
pub const EXHAUSTIVE_MAX_POINTS: usize = 16;

const STAIRCASE_ATTEMPTS: usize = 200;

pub fn generate_instance(spec: &InstanceSpec, shape: &GridShape) -> Result<SignFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let f = match &spec.family {
        Family::Attractor { target, generators } => {
            let t = match target {
                Some(t) => {
                    shape.check(t)?;
                    *t
                }
                None => random_point(shape, &mut rng),
            };
            let gens = match generators {
                Some(g) => {
                    for y in g {
                        shape.check(y)?;
                    }
                    g.clone()
                }
                None => random_generators(shape, &mut rng),
            };
            attractor(shape, &t, &gens)
        }
        Family::Staircase => {
            let mut found = None;
            for _ in 0..STAIRCASE_ATTEMPTS {
                let f = staircase(shape, &mut rng);
                if is_safe(&f) {
                    found = Some(f);
                    break;
                }
            }
            found.ok_or_else(|| Error::Data("no safe staircase instance found".into()))?
        }
        Family::Monotone => random_monotone(shape, &mut rng),
        Family::Explicit(f) => {
            if f.shape() != shape {
                return usage("explicit table has a different shape");
            }
            f.clone()
        }
        Family::ExhaustiveIndex(m) => {
            let mut out = None;
            let mut seen = 0u64;
            enumerate::for_each_function(&PiState::p0(shape), false, EXHAUSTIVE_MAX_POINTS, |f| {
                if seen == *m {
                    out = Some(f.clone());
                    return false;
                }
                seen += 1;
                true
            })?;
            out.ok_or_else(|| Error::Usage(format!("enumeration index {m} out of range ({seen} functions)")))?
        }
    };
    f.validated()
}

fn random_point(shape: &GridShape, rng: &mut ChaCha8Rng) -> Point {
    let c: Vec<u32> = shape.extents().iter().map(|&n| rng.gen_range(1..=n)).collect();
    Point::new(&c)
}

fn random_generators(shape: &GridShape, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let g = rng.gen_range(1..=3);
    (0..g).map(|_| random_point(shape, rng)).collect()
}

fn in_upset(x: &Point, gens: &[Point]) -> bool {
    gens.iter().any(|g| g.leq(x))
}

pub fn attractor(shape: &GridShape, t: &Point, gens: &[Point]) -> SignFunction {
    let k = shape.k();
    SignFunction::from_fn(shape, |x| {
        let s: Vec<i8> = (0..k).map(|i| (t[i] as i64 - x[i] as i64).signum() as i8).collect();
        SignVector::new(&s, if in_upset(x, gens) { 1 } else { -1 }).unwrap()
    })
}

fn staircase(shape: &GridShape, rng: &mut ChaCha8Rng) -> SignFunction {
    let k = shape.k();
    let gens = random_generators(shape, rng);
    let budget = if k > 1 { 38 / (k as u32 - 1) } else { 0 };
    let mut w = [[0u32; MAX_DIM]; MAX_DIM];
    let mut c = [0i64; MAX_DIM];
    for i in 0..k {
        for j in 0..k {
            if j != i {
                w[i][j] = rng.gen_range(0..=budget);
            }
        }
        let center: i64 = (0..k).map(|j| w[i][j] as i64 * (shape.extent(j) as i64 - 1)).sum::<i64>() / 128;
        c[i] = rng.gen_range(1..=shape.extent(i)) as i64 - center;
    }
    affine_floor(shape, &w, &c, &gens)
}

fn random_monotone(shape: &GridShape, rng: &mut ChaCha8Rng) -> SignFunction {
    let k = shape.k();
    let gens = random_generators(shape, rng);
    let mut w = [[0u32; MAX_DIM]; MAX_DIM];
    let mut c = [0i64; MAX_DIM];
    for i in 0..k {
        for j in 0..k {
            w[i][j] = rng.gen_range(0..=80);
        }
        let center: i64 = (0..k).map(|j| w[i][j] as i64 * (shape.extent(j) as i64 - 1)).sum::<i64>() / 128;
        c[i] = rng.gen_range(1..=shape.extent(i)) as i64 - center;
    }
    affine_floor(shape, &w, &c, &gens)
}

/// `G_i(x) = clamp(c_i + ⌊Σ_j w_ij (x_j - 1) / 64⌋)`, sign-reduced.
fn affine_floor(shape: &GridShape, w: &[[u32; MAX_DIM]; MAX_DIM], c: &[i64; MAX_DIM], gens: &[Point]) -> SignFunction {
    let k = shape.k();
    sgn_reduce(shape, |x| {
        let mut y = *x;
        for i in 0..k {
            let acc: i64 = (0..k).map(|j| w[i][j] as i64 * (x[j] as i64 - 1)).sum();
            let v = (c[i] + acc.div_euclid(64)).clamp(1, shape.extent(i) as i64);
            y.set(i, v as u32);
        }
        (y, if in_upset(x, gens) { 1 } else { -1 })
    })
    .expect("clamped image stays in the grid")
}

/// Read access to a sign function that counts distinct queries.
pub trait Oracle {
    fn shape(&self) -> &GridShape;
    /// A counted query; repeats are answered from the memo and not counted.
    fn query(&mut self, x: &Point) -> Result<SignVector>;
    /// Uncounted ground truth, for certificate checks.
    fn peek(&self, x: &Point) -> SignVector;
    fn queries(&self) -> u64;
}

pub struct QueryOracle<'a> {
    f: &'a SignFunction,
    seen: Vec<bool>,
    count: u64,
    log: Option<Vec<(Point, SignVector)>>,
}

impl<'a> QueryOracle<'a> {
    pub fn new(f: &'a SignFunction) -> QueryOracle<'a> {
        QueryOracle { f, seen: vec![false; f.shape().len()], count: 0, log: None }
    }

    pub fn with_log(f: &'a SignFunction) -> QueryOracle<'a> {
        let mut o = QueryOracle::new(f);
        o.log = Some(Vec::new());
        o
    }

    pub fn function(&self) -> &SignFunction {
        self.f
    }

    pub fn log(&self) -> Option<&[(Point, SignVector)]> {
        self.log.as_deref()
    }
}

impl Oracle for QueryOracle<'_> {
    fn shape(&self) -> &GridShape {
        self.f.shape()
    }

    fn query(&mut self, x: &Point) -> Result<SignVector> {
        self.f.shape().check(x)?;
        let idx = self.f.shape().index(x);
        let v = self.f.at(idx);
        if !self.seen[idx] {
            self.seen[idx] = true;
            self.count += 1;
            if let Some(log) = self.log.as_mut() {
                log.push((*x, v));
            }
        }
        Ok(v)
    }

    fn peek(&self, x: &Point) -> SignVector {
        self.f.get(x)
    }

    fn queries(&self) -> u64 {
        self.count
    }
}
