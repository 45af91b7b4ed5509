//! Safety-preserving updates of a PI state with incremental `J_s` / `M_s`
//! bookkeeping.
//!
//! `SafeState` keeps `J_s` and `M_s` for every slice. When a point becomes
//! postfixed in more coordinates, the joins of the affected slices grow, and
//! only the newly covered region `[bottom, J_new] \ [bottom, J_old]` has to be
//! brought into line with the safety conditions. Each region is a disjoint
//! union of boxes, so the whole run touches every (slice, point) pair at most
//! once per side. The exhaustive scan in `pi::check_safe_pi` remains the
//! reference, and `audit` cross-checks against it after every operation.

use crate::error::{usage, Error, Result};
use crate::functions::SignFunction;
use crate::lattice::{BoxIter, GridShape, Point, Slice, SliceIndexer};
use crate::pi::{check_monotone_pi, check_safe_pi, ChangeLog, DirSym, PiState, Sym};

#[derive(Clone, Copy)]
enum Mode<'a> {
    /// Force the required concrete symbols (Generate-PI-Function repairs).
    Repair,
    /// Reveal the hidden function wherever concreteness is required.
    Witness(&'a SignFunction),
}

#[derive(Clone)]
pub struct SafeState {
    p: PiState,
    ix: SliceIndexer,
    post: Vec<u8>,
    pre: Vec<u8>,
    j: Vec<Point>,
    m: Vec<Point>,
    j_done: Vec<Point>,
    m_done: Vec<Point>,
    pend_j: Vec<u32>,
    pend_m: Vec<u32>,
    in_pend_j: Vec<bool>,
    in_pend_m: Vec<bool>,
    touched: Vec<u32>,
    in_touched: Vec<bool>,
    need_plus: Vec<(u32, u32)>,
    need_minus: Vec<(u32, u32)>,
    audit: bool,
}

impl SafeState {
    /// Wraps a safe PI state; validates it exhaustively once.
    pub fn new(p: PiState) -> Result<SafeState> {
        if let Err(v) = check_monotone_pi(&p) {
            return usage(format!("state is not monotone: condition ({}) at {}", v.rule, v.point));
        }
        if let Err(v) = check_safe_pi(&p) {
            return usage(format!("state is not safe: {v}"));
        }
        Ok(SafeState::new_unchecked(p))
    }

    /// `p⁰` for `shape`.
    pub fn initial(shape: &GridShape) -> SafeState {
        SafeState::new_unchecked(PiState::p0(shape))
    }

    fn new_unchecked(mut p: PiState) -> SafeState {
        let shape = p.shape().clone();
        let ix = SliceIndexer::new(&shape);
        let n = ix.len();
        let mut j = vec![Point::splat(shape.k(), 0); n];
        let mut m = vec![Point::splat(shape.k(), 0); n];
        for id in 0..n {
            let s = ix.slice(id);
            j[id] = s.bottom();
            m[id] = s.top(&shape);
        }
        let mut post = vec![0u8; shape.len()];
        let mut pre = vec![0u8; shape.len()];
        for (idx, x) in shape.points().enumerate() {
            post[idx] = p.post_mask(idx);
            pre[idx] = p.pre_mask(idx);
            for_subsets(post[idx], |f| {
                let id = ix.id(&x, f);
                j[id] = j[id].join(&x);
            });
            for_subsets(pre[idx], |f| {
                let id = ix.id(&x, f);
                m[id] = m[id].meet(&x);
            });
        }
        p.log = Some(ChangeLog::default());
        SafeState {
            p,
            post,
            pre,
            j_done: j.clone(),
            m_done: m.clone(),
            j,
            m,
            pend_j: Vec::new(),
            pend_m: Vec::new(),
            in_pend_j: vec![false; n],
            in_pend_m: vec![false; n],
            touched: Vec::new(),
            in_touched: vec![false; n],
            need_plus: Vec::new(),
            need_minus: Vec::new(),
            ix,
            audit: false,
        }
    }

    /// Enables the exhaustive cross-check after every operation.
    pub fn set_audit(&mut self, on: bool) {
        self.audit = on;
    }

    pub fn state(&self) -> &PiState {
        &self.p
    }

    pub fn into_state(mut self) -> PiState {
        self.p.log = None;
        self.p
    }

    pub fn shape(&self) -> &GridShape {
        self.p.shape()
    }

    pub fn j_of(&self, s: &Slice) -> Point {
        self.j[self.ix.id_of(s)]
    }

    pub fn m_of(&self, s: &Slice) -> Point {
        self.m[self.ix.id_of(s)]
    }

    /// `J(p)` on the full grid.
    pub fn j(&self) -> Point {
        self.j[0]
    }

    pub fn m(&self) -> Point {
        self.m[0]
    }

    /// A point of `Sol(p)` if one exists. For a safe state `Sol(p)` is
    /// nonempty iff `J(p)` carries PLUS or `M(p)` carries MINUS.
    pub fn solution(&self) -> Option<Point> {
        let shape = self.shape();
        let (j, m) = (self.j(), self.m());
        let jx = shape.index(&j);
        if self.p.dir_at(jx) == DirSym::Plus && self.p.is_solution(jx) {
            return Some(j);
        }
        let mx = shape.index(&m);
        if self.p.dir_at(mx) == DirSym::Minus && self.p.is_solution(mx) {
            return Some(m);
        }
        None
    }

    /// Generate-PI-Function: sets `p(q)_ℓ = b` and restores safety.
    pub fn generate(&mut self, q: &Point, l: usize, b: i8) -> Result<()> {
        let shape = self.shape().clone();
        shape.check(q)?;
        if l >= shape.k() {
            return usage("coordinate out of range");
        }
        let idx = shape.index(q);
        let cur = self.p.sym_at(idx, l);
        let ok = match b {
            1 => matches!(cur, Sym::Ge | Sym::Unknown),
            -1 => matches!(cur, Sym::Le | Sym::Unknown),
            0 => matches!(cur, Sym::Le | Sym::Ge | Sym::Unknown),
            _ => false,
        };
        if !ok {
            return usage(format!("cannot set symbol {} at {q} coordinate {} to {b}", cur.token(), l + 1));
        }
        let before = self.audit.then(|| self.p.clone());
        let res = self.p.raise_lo(idx, l, b).and_then(|_| self.p.lower_hi(idx, l, b)).and_then(|_| self.sync(Mode::Repair));
        match res {
            Ok(()) => {}
            Err(Error::Contradiction { point, coord }) => {
                return Err(Error::Gap(format!("repair hit a contradiction at {point} coordinate {}", coord + 1)))
            }
            Err(e) => return Err(e),
        }
        if self.p.sym_at(idx, l) != Sym::from_sign(b) {
            return Err(Error::Gap(format!("value at {q} coordinate {} not set", l + 1)));
        }
        if let Some(before) = before {
            self.check_against(&before)?;
        }
        Ok(())
    }

    /// Update-Last-Coordinate.
    pub fn update_last(&mut self, q: &Point, b: i8) -> Result<()> {
        self.shape().check(q)?;
        if b != 1 && b != -1 {
            return usage("direction must be +1 or -1");
        }
        let idx = self.shape().index(q);
        self.p.assert_dir(idx, DirSym::from_sign(b))
    }

    /// Reveals `h(q)` and then `h` wherever safety demands concreteness.
    pub fn reveal_witness(&mut self, q: &Point, h: &SignFunction) -> Result<()> {
        let shape = self.shape().clone();
        shape.check(q)?;
        if h.shape() != &shape {
            return usage("witness shape differs");
        }
        let idx = shape.index(q);
        if self.p.is_fully_concrete(idx) {
            return usage(format!("{q} is already fully revealed"));
        }
        let before = self.audit.then(|| self.p.clone());
        let v = h.at(idx);
        let mut res = Ok(());
        for i in 0..shape.k() {
            res = res.and_then(|_| self.p.assert_sym(idx, i, Sym::from_sign(v.sign(i))));
        }
        res = res.and_then(|_| self.p.assert_dir(idx, DirSym::from_sign(v.dir())));
        res = res.and_then(|_| self.sync(Mode::Witness(h)));
        if let Err(e) = res {
            return Err(match e {
                Error::Contradiction { point, coord } => {
                    Error::Usage(format!("witness is inconsistent with the state at {point} coordinate {}", coord + 1))
                }
                e => e,
            });
        }
        if let Some(before) = before {
            self.check_against(&before)?;
        }
        Ok(())
    }

    /// One step of the solver: reveal the raw answer `v = f(q)` through
    /// `f|_p(q)` and Generate-PI-Function, then the last coordinate.
    pub fn reveal_by_generation(&mut self, q: &Point, v: &crate::functions::SignVector) -> Result<()> {
        let shape = self.shape().clone();
        let idx = shape.index(q);
        for i in 0..shape.k() {
            let cur = self.p.sym_at(idx, i);
            if cur.is_concrete() {
                continue;
            }
            let b = match cur {
                Sym::Ge => v.sign(i).max(0),
                Sym::Le => v.sign(i).min(0),
                _ => v.sign(i),
            };
            self.generate(q, i, b)?;
        }
        self.update_last(q, v.dir())
    }

    fn check_against(&self, before: &PiState) -> Result<()> {
        if !self.p.dominates(before) {
            return Err(Error::Invariant("update lost information".into()));
        }
        if let Err(v) = check_monotone_pi(&self.p) {
            return Err(Error::Invariant(format!("update broke monotonicity: condition ({}) at {}", v.rule, v.point)));
        }
        if let Err(v) = check_safe_pi(&self.p) {
            return Err(Error::Invariant(format!("incremental tracker missed {v}")));
        }
        for s in crate::pi::all_slices(self.shape()) {
            let full = crate::pi::post_pre_j_m(&self.p, &s);
            if full.j != Some(self.j_of(&s)) || full.m != Some(self.m_of(&s)) {
                return Err(Error::Invariant(format!("cached J/M drifted on slice {s}")));
            }
        }
        Ok(())
    }

    fn touch(&mut self, id: usize) {
        if !self.in_touched[id] {
            self.in_touched[id] = true;
            self.touched.push(id as u32);
        }
    }

    fn drain_log(&mut self) {
        let Some(log) = self.p.log.as_mut() else { return };
        let posts = std::mem::take(&mut log.post);
        let pres = std::mem::take(&mut log.pre);
        let shape = self.p.shape().clone();
        for &x in &posts {
            let x = x as usize;
            let new = self.p.post_mask(x);
            let old = self.post[x];
            if new == old {
                continue;
            }
            self.post[x] = new;
            let delta = new & !old;
            let pt = shape.point(x);
            let mut f = new;
            while f != 0 {
                if f & delta != 0 {
                    let id = self.ix.id(&pt, f);
                    let nj = self.j[id].join(&pt);
                    if nj != self.j[id] {
                        self.j[id] = nj;
                        if !self.in_pend_j[id] {
                            self.in_pend_j[id] = true;
                            self.pend_j.push(id as u32);
                        }
                        self.touch(id);
                    }
                }
                f = (f - 1) & new;
            }
        }
        for &x in &pres {
            let x = x as usize;
            let new = self.p.pre_mask(x);
            let old = self.pre[x];
            if new == old {
                continue;
            }
            self.pre[x] = new;
            let delta = new & !old;
            let pt = shape.point(x);
            let mut f = new;
            while f != 0 {
                if f & delta != 0 {
                    let id = self.ix.id(&pt, f);
                    let nm = self.m[id].meet(&pt);
                    if nm != self.m[id] {
                        self.m[id] = nm;
                        if !self.in_pend_m[id] {
                            self.in_pend_m[id] = true;
                            self.pend_m.push(id as u32);
                        }
                        self.touch(id);
                    }
                }
                f = (f - 1) & new;
            }
        }
        if let Some(log) = self.p.log.as_mut() {
            let (mut posts, mut pres) = (posts, pres);
            posts.clear();
            pres.clear();
            log.post = posts;
            log.pre = pres;
        }
    }

    fn sync(&mut self, mode: Mode) -> Result<()> {
        loop {
            self.drain_log();
            if let Some(id) = self.pend_j.pop() {
                self.in_pend_j[id as usize] = false;
                self.process(id as usize, true, mode)?;
                continue;
            }
            if let Some(id) = self.pend_m.pop() {
                self.in_pend_m[id as usize] = false;
                self.process(id as usize, false, mode)?;
                continue;
            }
            break;
        }
        self.final_checks(mode)
    }

    /// Handles the region newly covered below `J_s` (`upper`) or above `M_s`.
    fn process(&mut self, id: usize, upper: bool, mode: Mode) -> Result<()> {
        let (new, old) = if upper { (self.j[id], self.j_done[id]) } else { (self.m[id], self.m_done[id]) };
        if new == old {
            return Ok(());
        }
        if upper {
            self.j_done[id] = new;
        } else {
            self.m_done[id] = new;
        }
        let shape = self.p.shape().clone();
        let s = self.ix.slice(id);
        let (bottom, top) = (s.bottom(), s.top(&shape));
        let free: Vec<usize> = s.free_coords().collect();
        let grew: Vec<usize> = free.iter().copied().filter(|&i| old[i] != new[i]).collect();
        for (gi, &g) in grew.iter().enumerate() {
            // Piece: the first grown coordinate at which y leaves the old region is g.
            let (mut lo, mut hi) = if upper { (bottom, new) } else { (new, top) };
            let mut empty = false;
            for &e in &grew[..gi] {
                if upper {
                    if old[e] == bottom[e] {
                        empty = true;
                    } else {
                        hi.set(e, old[e] - 1);
                    }
                } else if old[e] == top[e] {
                    empty = true;
                } else {
                    lo.set(e, old[e] + 1);
                }
            }
            if empty {
                continue;
            }
            if upper {
                lo.set(g, old[g]);
            } else {
                hi.set(g, old[g]);
            }
            for y in BoxIter::new(lo, hi) {
                if y == new {
                    continue;
                }
                self.visit(id, &s, &free, &y, &new, &old, upper, mode)?;
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &mut self,
        id: usize,
        s: &Slice,
        free: &[usize],
        y: &Point,
        new: &Point,
        old: &Point,
        upper: bool,
        mode: Mode,
    ) -> Result<()> {
        let shape = self.p.shape();
        let idx = shape.index(y);
        let inside_old = if upper { y.leq(old) } else { old.leq(y) };
        let mut any_open = false;
        for &i in free {
            let forced = if upper { y[i] < new[i] } else { y[i] > new[i] };
            let was = inside_old && if upper { y[i] < old[i] } else { y[i] > old[i] };
            if !forced || was {
                continue;
            }
            let c = self.p.sym_at(idx, i);
            if c.is_concrete() {
                continue;
            }
            match mode {
                Mode::Repair => {
                    if upper {
                        self.p.raise_lo(idx, i, if c.hi() == 1 { 1 } else { 0 })?;
                    } else {
                        self.p.lower_hi(idx, i, if c.lo() == -1 { -1 } else { 0 })?;
                    }
                }
                Mode::Witness(_) => any_open = true,
            }
        }
        if let (Mode::Witness(h), true) = (mode, any_open) {
            let v = h.at(idx);
            for i in s.free_coords() {
                if !self.p.sym_at(idx, i).is_concrete() {
                    self.p.assert_sym(idx, i, Sym::from_sign(v.sign(i)))?;
                }
            }
        }
        if upper {
            self.need_plus.push((id as u32, idx as u32));
        } else {
            self.need_minus.push((id as u32, idx as u32));
        }
        Ok(())
    }

    fn final_checks(&mut self, mode: Mode) -> Result<()> {
        let fail = |msg: String| match mode {
            Mode::Repair => Error::Gap(msg),
            Mode::Witness(_) => Error::Protocol(msg),
        };
        let shape = self.p.shape().clone();
        for (upper, list) in [(true, std::mem::take(&mut self.need_plus)), (false, std::mem::take(&mut self.need_minus))] {
            for &(id, idx) in &list {
                let (id, idx) = (id as usize, idx as usize);
                let s = self.ix.slice(id);
                let bound = if upper { self.j[id] } else { self.m[id] };
                let y = shape.point(idx);
                let mut hit = false;
                for i in s.free_coords() {
                    let below = if upper { y[i] < bound[i] } else { y[i] > bound[i] };
                    if !below {
                        continue;
                    }
                    let c = self.p.sym_at(idx, i);
                    if !c.is_concrete() {
                        return Err(fail(format!("symbol at {y} coordinate {} left open on slice {s}", i + 1)));
                    }
                    hit |= c == if upper { Sym::Pos } else { Sym::Neg };
                }
                if !hit {
                    let what = if upper { "+1 below J" } else { "-1 above M" };
                    return Err(fail(format!("no {what} at {y} on slice {s}")));
                }
            }
        }
        for id in std::mem::take(&mut self.touched) {
            let id = id as usize;
            self.in_touched[id] = false;
            if !self.j[id].leq(&self.m[id]) {
                return Err(fail(format!("J not below M on slice {}", self.ix.slice(id))));
            }
        }
        Ok(())
    }
}

#[inline]
fn for_subsets(mask: u8, mut f: impl FnMut(u8)) {
    let mut s = mask;
    while s != 0 {
        f(s);
        s = (s - 1) & mask;
    }
}

/// Contract-level Generate-PI-Function on a snapshot; validates the result
/// exhaustively.
pub fn generate_pi_function(p: &PiState, q: &Point, l: usize, b: i8) -> Result<PiState> {
    let mut st = SafeState::new(p.clone())?;
    st.generate(q, l, b)?;
    let out = st.into_state();
    if check_safe_pi(&out).is_err() || check_monotone_pi(&out).is_err() {
        return Err(Error::Gap("output is not a safe PI state".into()));
    }
    if !out.dominates(p) {
        return Err(Error::Gap("output does not dominate the input".into()));
    }
    Ok(out)
}

pub fn update_last_coordinate(p: &PiState, q: &Point, b: i8) -> Result<PiState> {
    let mut out = p.clone();
    if b != 1 && b != -1 {
        return usage("direction must be +1 or -1");
    }
    out.assert_direction(q, DirSym::from_sign(b))?;
    Ok(out)
}

/// How the game oracle answers and restores safety.
#[derive(Clone, Copy, Debug)]
pub enum RevealPolicy<'a> {
    Witness(&'a SignFunction),
    /// Answers from the function but repairs via Generate-PI-Function.
    RuleClosure(&'a SignFunction),
}

pub fn witness_reveal(p: &PiState, q: &Point, policy: RevealPolicy) -> Result<PiState> {
    let mut st = SafeState::new(p.clone())?;
    if st.solution().is_some() {
        return usage("state already contains a solution");
    }
    match policy {
        RevealPolicy::Witness(h) => {
            if !crate::functions::consistent(h, p) {
                return usage("witness is inconsistent with the state");
            }
            st.reveal_witness(q, h)?;
        }
        RevealPolicy::RuleClosure(h) => {
            let idx = st.shape().index(q);
            if st.state().is_fully_concrete(idx) {
                return usage(format!("{q} is already fully revealed"));
            }
            st.reveal_by_generation(q, &h.get(q))?;
        }
    }
    let out = st.into_state();
    debug_assert!(out.dominates(p));
    Ok(out)
}
