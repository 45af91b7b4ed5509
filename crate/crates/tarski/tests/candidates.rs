//! Candidate sets on a hand-checked fixture.

use tarski::candidates::{cand_sets, in_interior_minus, in_interior_plus, interior_on_slice, interior_plus};
use tarski::enumerate::{enumerate_consistent_safe, DEFAULT_CAP};
use tarski::io::{write_instance, write_pi};
use tarski::verify::sample_safe_states;
use tarski::lattice::{GridShape, Point, Slice};
use tarski::pi::{is_safe_pi, PiState, Sym};

/// `[8]²` with `+1` in coordinate 1 on `{x_1 ≤ 4, x_2 ≥ 5}`.
fn f1s() -> PiState {
    let g = GridShape::cube(2, 8).unwrap();
    let mut p = PiState::p0(&g);
    for x1 in 1..=4 {
        for x2 in 5..=8 {
            p.assert_cell(&Point::new(&[x1, x2]), 0, Sym::Pos).unwrap();
        }
    }
    assert!(is_safe_pi(&p));
    p
}

#[test]
fn fixture_interiors() {
    let p = f1s();
    let mut want: Vec<Point> = p.shape().points().filter(|x| x[0] <= 4 && x[1] >= 6).collect();
    want.sort_by_key(|x| p.shape().index(x));
    assert_eq!(interior_plus(&p, 0), want);
    // only coordinate 1 is free in (*,5), so nothing is shaved and (1,5) counts
    let row = interior_on_slice(&p, &Slice::new(&[None, Some(5)]), 0).unwrap();
    assert_eq!(row, (1..=4).map(|v| Point::new(&[v, 5])).collect::<Vec<_>>());
}

/// The slice-interior definition evaluated literally on every slice and
/// free coordinate.
#[test]
fn slice_interiors_match_the_definition() {
    let p = f1s();
    let g = p.shape().clone();
    for s in tarski::pi::all_slices(&g) {
        for i in s.free_coords() {
            let want: Vec<Point> = s
                .points(&g)
                .filter(|x| {
                    let mut y = *x;
                    for j in s.free_coords().filter(|&j| j != i && x[j] > 1) {
                        y.set(j, x[j] - 1);
                    }
                    p.sym(x, i) == Sym::Pos && p.sym(&y, i) == Sym::Pos
                })
                .collect();
            assert_eq!(interior_on_slice(&p, &s, i).unwrap(), want, "{s} coordinate {}", i + 1);
            // outside the slice interior implies outside the global one
            let global = interior_plus(&p, i);
            for x in s.points(&g).filter(|x| !want.contains(x)) {
                assert!(!global.contains(&x));
            }
        }
    }
}

#[test]
fn fixture_sizes() {
    let c = cand_sets(&f1s());
    assert_eq!((c.plus_len, c.minus_len, c.union_len), (52, 48, 52));
    assert_eq!((c.plus.len(), c.minus.len()), (52, 48));
}

#[test]
fn initial_sets_cover_the_grid_twice() {
    for ext in [&[1u32][..], &[5], &[3, 4], &[2, 3, 4], &[4, 4, 4], &[2, 2, 3, 2]] {
        let g = GridShape::new(ext).unwrap();
        let c = cand_sets(&PiState::p0(&g));
        assert_eq!(c.plus_len + c.minus_len, 2 * g.len(), "{g}");
        assert_eq!(c.union_len, g.len());
    }
}

/// `Cand_[k](p) ∩ Cand_{k+1}(p)`: no concrete ±1 in the first `k`
/// coordinates and outside both direction interiors.
fn naive_intersection(p: &PiState) -> Vec<Point> {
    let g = p.shape();
    let k = g.k();
    (0..g.len())
        .filter(|&idx| {
            (0..k).all(|i| !matches!(p.sym_at(idx, i), Sym::Pos | Sym::Neg))
                && !in_interior_plus(p, idx, k)
                && !in_interior_minus(p, idx, k)
        })
        .map(|idx| g.point(idx))
        .collect()
}

/// Searches tiny safe states for one where the naive intersection misses
/// every Tarski* solution of some consistent safe function, while the
/// real candidate sets do not.
#[test]
fn naive_intersection_is_not_a_candidate_set() {
    let mut found = None;
    'search: for ext in [&[3u32, 3][..], &[2, 2, 2], &[4, 3], &[4, 4]] {
        let g = GridShape::new(ext).unwrap();
        for seed in 0..40 {
            for p in sample_safe_states(&g, 60, seed).unwrap() {
                let naive = naive_intersection(&p);
                for f in enumerate_consistent_safe(&p, DEFAULT_CAP).unwrap() {
                    if !naive.iter().any(|x| f.get(x).is_star_solution()) {
                        found = Some((p.clone(), f));
                        break 'search;
                    }
                }
            }
        }
    }
    let (p, f) = found.expect("no counterexample on the searched shapes");
    let c = cand_sets(&p);
    assert!(c.plus.iter().chain(&c.minus).any(|x| f.get(x).is_star_solution()));
    eprintln!("state:\n{}function:\n{}", write_pi(&p), write_instance(&f));
}
