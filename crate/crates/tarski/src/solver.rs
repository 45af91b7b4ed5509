//! Solvers: the round-based Tarski* solver for `k = 3`, the
//! Tarski(n, 4) driver built on it, and the Kleene and recursive binary
//! search baselines.

use std::collections::HashSet;

use serde::Serialize;

use crate::candidates::cand_sets_between;
use crate::error::{usage, Error, Result};
use crate::functions::{respects, Oracle, SignFunction, SignVector};
use crate::game::{round_bound, round_plan};
use crate::lattice::{GridShape, Point};
use crate::tracker::SafeState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certificate {
    StarPlus,
    StarMinus,
    FixedPoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub algorithm: &'static str,
    pub solution: Point,
    pub certificate: Certificate,
    /// Distinct queries made through the oracle.
    pub queries: u64,
    /// Rounds of the main loop (round plans for the Tarski* solver, halving
    /// steps for the 4D driver).
    pub rounds: u64,
    /// Queries of the 4D driver's halving phase; zero elsewhere.
    pub search_queries: u64,
    /// Queries of the 4D driver's final 3D solve; zero elsewhere.
    pub terminal_queries: u64,
}

/// Options for [`solve_tarski_star`].
#[derive(Clone, Copy, Default)]
pub struct StarConfig<'a> {
    /// Asserts after every step that the state respects this function.
    pub respect: Option<&'a SignFunction>,
    pub audit: bool,
}

fn star_certificate(v: &SignVector) -> Option<Certificate> {
    if v.is_star_plus() {
        Some(Certificate::StarPlus)
    } else if v.is_star_minus() {
        Some(Certificate::StarMinus)
    } else {
        None
    }
}

/// Tarski* on a 3D monotone sign function: each round queries the pivot
/// neighbourhoods of balanced points of `Cand⁺` and `Cand⁻`, feeding every
/// answer through `f|_p` and Generate-PI-Function.
pub fn solve_tarski_star<O: Oracle>(oracle: &mut O, cfg: StarConfig) -> Result<SolveResult> {
    let shape = oracle.shape().clone();
    if shape.k() != 3 {
        return usage("the Tarski* solver is implemented for k = 3");
    }
    let start = oracle.queries();
    let mut st = SafeState::initial(&shape);
    st.set_audit(cfg.audit);
    let bound = round_bound(&shape);
    let mut rounds = 0u64;
    while st.solution().is_none() {
        rounds += 1;
        if rounds > bound {
            return Err(Error::Invariant(format!("round bound {bound} exceeded")));
        }
        let cand = cand_sets_between(st.state(), &st.j(), &st.m());
        let plan = round_plan(&st, &cand)?;
        let mut progressed = false;
        for q in &plan.points {
            if st.state().is_fully_concrete(shape.index(q)) {
                continue;
            }
            let v = oracle.query(q)?;
            st.reveal_by_generation(q, &v)?;
            progressed = true;
            if let Some(f) = cfg.respect {
                if !respects(st.state(), f) {
                    return Err(Error::Invariant(format!("state stopped respecting f after querying {q}")));
                }
            }
            if st.solution().is_some() {
                break;
            }
        }
        if !progressed {
            return Err(Error::Invariant("round plan revealed nothing".into()));
        }
    }
    let x = st.solution().unwrap();
    let certificate = star_certificate(&oracle.peek(&x))
        .ok_or_else(|| Error::Invariant(format!("returned point {x} is not a Tarski* solution")))?;
    Ok(SolveResult {
        algorithm: "star3",
        solution: x,
        certificate,
        queries: oracle.queries() - start,
        rounds,
        search_queries: 0,
        terminal_queries: 0,
    })
}

/// Kleene iteration `x ← x + f(x)` from the bottom (`from_top == false`)
/// or the top of the grid.
pub fn kleene_solve<O: Oracle>(oracle: &mut O, from_top: bool) -> Result<Point> {
    let shape = oracle.shape().clone();
    let k = shape.k();
    let mut x = if from_top { shape.top() } else { shape.bottom() };
    loop {
        let v = oracle.query(&x)?;
        if (0..k).all(|i| v.sign(i) == 0) {
            return Ok(x);
        }
        for i in 0..k {
            let s = v.sign(i);
            if (from_top && s > 0) || (!from_top && s < 0) {
                return Err(Error::Data(format!("Kleene iteration met sign {s} in coordinate {} at {x}", i + 1)));
            }
            if s != 0 {
                x.set(i, (x[i] as i64 + s as i64) as u32);
            }
        }
    }
}

/// Recursive binary search for a fixed point of the first `k` signs on the
/// box `[lo, hi]`, which needs `f(lo) ⪰ 0` and `f(hi) ⪯ 0`. The whole grid
/// always qualifies.
pub fn dqy_solve<O: Oracle>(oracle: &mut O, lo: &Point, hi: &Point) -> Result<Point> {
    let shape = oracle.shape().clone();
    shape.check(lo)?;
    shape.check(hi)?;
    if !lo.leq(hi) {
        return usage("empty box");
    }
    dqy_rec(oracle, *lo, *hi, shape.k())
}

/// Fixed point of the signs `0..d` on the box, with coordinates `d..`
/// pinned by `lo == hi`.
fn dqy_rec<O: Oracle>(oracle: &mut O, mut lo: Point, mut hi: Point, d: usize) -> Result<Point> {
    if d == 0 {
        return Ok(lo);
    }
    let c = d - 1;
    while lo[c] <= hi[c] {
        let mid = (lo[c] + hi[c]) / 2;
        let y = dqy_rec(oracle, lo.with(c, mid), hi.with(c, mid), c)?;
        let v = oracle.query(&y)?;
        if let Some(i) = (0..c).find(|&i| v.sign(i) != 0) {
            return Err(Error::Data(format!("{y} is not a fixed point of coordinate {} on its slice", i + 1)));
        }
        match v.sign(c) {
            0 => return Ok(y),
            1 => lo = y.with(c, mid + 1),
            _ => hi = y.with(c, mid - 1),
        }
    }
    Err(Error::Data(format!("binary search on coordinate {} ran out of room", c + 1)))
}

/// Largest `(2⌈log₂ n⌉ + 1)^k` over the extents, the query bound asserted
/// for [`dqy_solve`].
pub fn dqy_bound(shape: &GridShape) -> u64 {
    let n = shape.extents().iter().copied().max().unwrap_or(1) as u64;
    let lg = 64 - (n.max(1) - 1).leading_zeros() as u64;
    (2 * lg + 1).pow(shape.k() as u32)
}

/// A 3D box of a 4D oracle at a fixed fourth coordinate, shifted to start
/// at `1_3`. With `star`, the direction bit is `+1` iff the fourth sign is
/// nonnegative.
struct Slice3<'o, O: Oracle> {
    inner: &'o mut O,
    shape: GridShape,
    base: Point,
    x4: u32,
    star: bool,
    seen: HashSet<Point>,
}

impl<'o, O: Oracle> Slice3<'o, O> {
    fn new(inner: &'o mut O, lo: &Point, hi: &Point, x4: u32, star: bool) -> Result<Self> {
        let shape = GridShape::new(&[hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1])?;
        Ok(Slice3 { inner, shape, base: *lo, x4, star, seen: HashSet::new() })
    }

    fn lift(&self, y: &Point) -> Point {
        Point::new(&[self.base[0] + y[0] - 1, self.base[1] + y[1] - 1, self.base[2] + y[2] - 1, self.x4])
    }

    fn project(&self, v: &SignVector) -> SignVector {
        let dir = if self.star {
            if v.sign(3) >= 0 {
                1
            } else {
                -1
            }
        } else {
            v.dir()
        };
        SignVector::new(&v.signs()[..3], dir).expect("three signs and a direction")
    }
}

impl<O: Oracle> Oracle for Slice3<'_, O> {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn query(&mut self, y: &Point) -> Result<SignVector> {
        self.shape.check(y)?;
        let x = self.lift(y);
        let v = self.inner.query(&x)?;
        for i in 0..3 {
            let s = v.sign(i);
            if (y[i] == 1 && s < 0) || (y[i] == self.shape.extent(i) && s > 0) {
                return Err(Error::Data(format!("sub-instance leaves its box at {x} in coordinate {}", i + 1)));
            }
        }
        self.seen.insert(*y);
        Ok(self.project(&v))
    }

    fn peek(&self, y: &Point) -> SignVector {
        let x = self.lift(y);
        self.project(&self.inner.peek(&x))
    }

    fn queries(&self) -> u64 {
        self.seen.len() as u64
    }
}

/// One halving step of [`reduce_tarski4`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    pub lo: Point,
    pub hi: Point,
    pub mid: u32,
    pub answer: Point,
    pub certificate: Certificate,
}

/// Options for [`reduce_tarski4`].
#[derive(Clone, Copy, Default)]
pub struct Reduce4Config {
    /// Checks `f(lo) ⪰ 0` and `f(hi) ⪯ 0` with uncounted peeks after every
    /// step.
    pub check_box: bool,
}

/// Tarski(n, 4): Tarski* on the middle slice of the box `[lo, hi]` moves
/// `lo` up to a STAR_PLUS answer or `hi` to just below a STAR_MINUS answer;
/// once the fourth extent is a single value, the remaining 3D box is solved
/// by recursive binary search.
pub fn reduce_tarski4<O: Oracle>(oracle: &mut O, cfg: Reduce4Config) -> Result<(SolveResult, Vec<ReductionStep>)> {
    let shape = oracle.shape().clone();
    if shape.k() != 4 {
        return usage("the reduction needs a 4D instance");
    }
    let start = oracle.queries();
    let mut lo = shape.bottom();
    let mut hi = shape.top();
    let mut steps = Vec::new();
    let nonneg = |v: &SignVector| (0..4).all(|i| v.sign(i) >= 0);
    let nonpos = |v: &SignVector| (0..4).all(|i| v.sign(i) <= 0);
    while lo[3] < hi[3] {
        let mid = (lo[3] + hi[3]).div_ceil(2);
        let (y, cert) = {
            let mut sub = Slice3::new(oracle, &lo, &hi, mid, true)?;
            let r = solve_tarski_star(&mut sub, StarConfig::default())?;
            (sub.lift(&r.solution), r.certificate)
        };
        steps.push(ReductionStep { lo, hi, mid, answer: y, certificate: cert });
        match cert {
            Certificate::StarPlus => lo = y,
            _ => hi = y.with(3, mid - 1),
        }
        if cfg.check_box && !(nonneg(&oracle.peek(&lo)) && nonpos(&oracle.peek(&hi)) && lo.leq(&hi)) {
            return Err(Error::Invariant(format!("box [{lo}, {hi}] lost its corner signs")));
        }
    }
    let search = oracle.queries() - start;
    let y = {
        let mut sub = Slice3::new(oracle, &lo, &hi, lo[3], false)?;
        let (b, t) = (sub.shape.bottom(), sub.shape.top());
        let y3 = dqy_solve(&mut sub, &b, &t)?;
        sub.lift(&y3)
    };
    let total = oracle.queries() - start;
    if !oracle.peek(&y).is_zero() {
        return Err(Error::Invariant(format!("{y} is not a fixed point")));
    }
    let res = SolveResult {
        algorithm: "reduce4",
        solution: y,
        certificate: Certificate::FixedPoint,
        queries: total,
        rounds: steps.len() as u64,
        search_queries: search,
        terminal_queries: total - search,
    };
    Ok((res, steps))
}

/// [`dqy_solve`] on the whole grid, wrapped as a result.
pub fn dqy_result<O: Oracle>(oracle: &mut O) -> Result<SolveResult> {
    let start = oracle.queries();
    let shape = oracle.shape().clone();
    let x = dqy_solve(oracle, &shape.bottom(), &shape.top())?;
    if (0..shape.k()).any(|i| oracle.peek(&x).sign(i) != 0) {
        return Err(Error::Invariant(format!("{x} is not a fixed point")));
    }
    Ok(SolveResult {
        algorithm: "dqy",
        solution: x,
        certificate: Certificate::FixedPoint,
        queries: oracle.queries() - start,
        rounds: 0,
        search_queries: 0,
        terminal_queries: 0,
    })
}

/// [`kleene_solve`] from the bottom, wrapped as a result.
pub fn kleene_result<O: Oracle>(oracle: &mut O) -> Result<SolveResult> {
    let start = oracle.queries();
    let x = kleene_solve(oracle, false)?;
    Ok(SolveResult {
        algorithm: "kleene",
        solution: x,
        certificate: Certificate::FixedPoint,
        queries: oracle.queries() - start,
        rounds: 0,
        search_queries: 0,
        terminal_queries: 0,
    })
}
