//! Depth-first enumeration of the monotone (optionally safe) sign functions
//! dominating a PI state, for tiny grids.
//!
//! Points are assigned in linear order, so every lower unit neighbour of the
//! current point is already fixed and the unit-step monotonicity rules can be
//! checked immediately. Safety is pruned through per-slice counts of fixed
//! points: a second fixed point kills the branch at once, and a slice whose
//! top point has just been assigned must have exactly one.

use crate::error::{Error, Result};
use crate::functions::SignFunction;
use crate::lattice::{GridShape, SliceIndexer};
use crate::pi::PiState;

/// Default cap on the number of grid points for enumeration.
pub const DEFAULT_CAP: usize = 16;

struct Dfs<F: FnMut(&SignFunction) -> bool> {
    shape: GridShape,
    k: usize,
    safe: bool,
    ix: SliceIndexer,
    zeros: Vec<u8>,
    signs: Vec<i8>,
    dirs: Vec<i8>,
    choices: Vec<Vec<([i8; 4], i8)>>,
    visit: F,
    yielded: u64,
    stopped: bool,
}

impl<F: FnMut(&SignFunction) -> bool> Dfs<F> {
    fn run(&mut self, idx: usize) {
        if self.stopped {
            return;
        }
        if idx == self.shape.len() {
            let f = SignFunction::from_tables(&self.shape, self.signs.clone(), self.dirs.clone())
                .expect("enumerated tables are well formed");
            self.yielded += 1;
            if !(self.visit)(&f) {
                self.stopped = true;
            }
            return;
        }
        let x = self.shape.point(idx);
        let k = self.k;
        for c in 0..self.choices[idx].len() {
            let (s, d) = self.choices[idx][c];
            let mut ok = true;
            for j in 0..k {
                if x[j] == 1 {
                    continue;
                }
                let y = idx - self.shape.stride(j);
                if self.dirs[y] > d {
                    ok = false;
                    break;
                }
                for (i, &si) in s.iter().enumerate().take(k) {
                    let slack = if i == j { 1 } else { 0 };
                    if self.signs[y * k + i] > si + slack {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                continue;
            }
            self.signs[idx * k..idx * k + k].copy_from_slice(&s[..k]);
            self.dirs[idx] = d;
            if self.safe {
                let z = s[..k].iter().enumerate().fold(0u8, |m, (i, &v)| if v == 0 { m | 1 << i } else { m });
                let mut f = z;
                let mut bad = false;
                while f != 0 {
                    let id = self.ix.id(&x, f);
                    self.zeros[id] += 1;
                    bad |= self.zeros[id] > 1;
                    f = (f - 1) & z;
                }
                if !bad {
                    let t = (0..k).fold(0u8, |m, i| if x[i] == self.shape.extent(i) { m | 1 << i } else { m });
                    let mut f = t;
                    while f != 0 {
                        if self.zeros[self.ix.id(&x, f)] != 1 {
                            bad = true;
                            break;
                        }
                        f = (f - 1) & t;
                    }
                }
                if !bad {
                    self.run(idx + 1);
                }
                let mut f = z;
                while f != 0 {
                    self.zeros[self.ix.id(&x, f)] -= 1;
                    f = (f - 1) & z;
                }
            } else {
                self.run(idx + 1);
            }
            if self.stopped {
                return;
            }
        }
    }
}

/// Calls `visit` on every monotone (with `safe_only`, safe) sign function
/// `f ⇒ p`, in deterministic order, until it returns `false`. Returns the
/// number of functions visited.
pub fn for_each_function(
    p: &PiState,
    safe_only: bool,
    cap: usize,
    visit: impl FnMut(&SignFunction) -> bool,
) -> Result<u64> {
    let shape = p.shape().clone();
    if shape.len() > cap {
        return Err(Error::Resource(format!("enumeration over {} points exceeds the cap of {cap}", shape.len())));
    }
    let k = shape.k();
    let mut choices = Vec::with_capacity(shape.len());
    for idx in 0..shape.len() {
        let x = shape.point(idx);
        let mut opts = Vec::new();
        let combos = 3usize.pow(k as u32);
        for d in [-1i8, 1] {
            if !p.dir_at(idx).admits(d) {
                continue;
            }
            for mut code in 0..combos {
                let mut s = [0i8; 4];
                let mut fine = true;
                for (i, si) in s.iter_mut().enumerate().take(k) {
                    let v = (code % 3) as i8 - 1;
                    code /= 3;
                    *si = v;
                    let feasible = !(x[i] == 1 && v < 0) && !(x[i] == shape.extent(i) && v > 0);
                    fine &= feasible && p.sym_at(idx, i).admits(v);
                }
                if fine {
                    opts.push((s, d));
                }
            }
        }
        choices.push(opts);
    }
    let mut dfs = Dfs {
        ix: SliceIndexer::new(&shape),
        zeros: vec![0; SliceIndexer::new(&shape).len()],
        signs: vec![0; shape.len() * k],
        dirs: vec![0; shape.len()],
        shape,
        k,
        safe: safe_only,
        choices,
        visit,
        yielded: 0,
        stopped: false,
    };
    dfs.run(0);
    Ok(dfs.yielded)
}

/// Every safe function consistent with the safe state `p`; errors if there
/// is none, which would contradict consistency of safe PI states.
pub fn enumerate_consistent_safe(p: &PiState, cap: usize) -> Result<Vec<SignFunction>> {
    let mut out = Vec::new();
    for_each_function(p, true, cap, |f| {
        out.push(f.clone());
        true
    })?;
    if out.is_empty() {
        return Err(Error::Invariant("safe PI state admits no consistent safe function".into()));
    }
    Ok(out)
}

pub fn count_monotone(shape: &GridShape, cap: usize) -> Result<u64> {
    for_each_function(&PiState::p0(shape), false, cap, |_| true)
}

pub fn count_safe(shape: &GridShape, cap: usize) -> Result<u64> {
    for_each_function(&PiState::p0(shape), true, cap, |_| true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_counts() {
        let g = GridShape::new(&[2]).unwrap();
        assert_eq!(count_monotone(&g, DEFAULT_CAP).unwrap(), 9);
        assert_eq!(count_safe(&g, DEFAULT_CAP).unwrap(), 6);
    }

    #[test]
    fn fully_revealed_state_has_one_completion() {
        let g = GridShape::cube(2, 3).unwrap();
        let f = crate::functions::attractor(&g, &crate::lattice::Point::new(&[2, 3]), &[crate::lattice::Point::new(&[1, 2])]);
        let all = enumerate_consistent_safe(&f.to_pi(), DEFAULT_CAP).unwrap();
        assert_eq!(all, vec![f]);
    }

    #[test]
    fn cap_is_enforced() {
        let g = GridShape::cube(2, 5).unwrap();
        assert!(matches!(count_safe(&g, DEFAULT_CAP), Err(Error::Resource(_))));
    }
}
