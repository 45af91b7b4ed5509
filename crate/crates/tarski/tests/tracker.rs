//! Randomized cross-checks of the incremental safety tracker against the
//! exhaustive scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tarski::functions::{consistent, generate_instance, respects, Family, InstanceSpec};
use tarski::lattice::GridShape;
use tarski::pi::Sym;
use tarski::tracker::SafeState;
use tarski::Error;

fn shapes() -> Vec<GridShape> {
    [&[3u32, 3][..], &[4, 4], &[2, 5], &[3, 3, 3], &[4, 4, 4], &[2, 3, 4], &[5, 5, 5], &[2, 2, 2, 2], &[6]]
        .iter()
        .map(|e| GridShape::new(e).unwrap())
        .collect()
}

#[test]
fn random_generate_sequences_stay_safe() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut calls = 0;
    for shape in shapes() {
        for _ in 0..25 {
            let mut st = SafeState::initial(&shape);
            st.set_audit(true);
            for _ in 0..60 {
                let idx = rng.gen_range(0..shape.len());
                let l = rng.gen_range(0..shape.k());
                let q = shape.point(idx);
                let b = match st.state().sym_at(idx, l) {
                    Sym::Ge => rng.gen_range(0..=1),
                    Sym::Le => rng.gen_range(-1..=0),
                    Sym::Unknown => rng.gen_range(-1..=1),
                    _ => continue,
                };
                match st.generate(&q, l, b) {
                    Ok(()) => calls += 1,
                    Err(e @ Error::Gap(_)) => panic!("gap on {shape} at {q} coord {l} b={b}: {e}"),
                    Err(e) => panic!("unexpected {e}"),
                }
            }
        }
    }
    assert!(calls > 1000, "{calls}");
}

#[test]
fn witness_reveals_stay_safe_and_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for shape in shapes() {
        for seed in 0..20u64 {
            let fam = if seed % 2 == 0 { "attractor" } else { "staircase" };
            let h = generate_instance(&InstanceSpec::new(Family::from_tag(fam).unwrap(), seed), &shape).unwrap();
            let mut st = SafeState::initial(&shape);
            st.set_audit(true);
            while st.solution().is_none() {
                let open: Vec<usize> = (0..shape.len()).filter(|&i| !st.state().is_fully_concrete(i)).collect();
                let idx = open[rng.gen_range(0..open.len())];
                st.reveal_witness(&shape.point(idx), &h).unwrap();
                assert!(consistent(&h, st.state()));
            }
            let x = st.solution().unwrap();
            assert!(h.get(&x).is_star_solution());
        }
    }
}

#[test]
fn generation_steps_respect_monotone_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for shape in shapes() {
        for seed in 0..20u64 {
            let f = generate_instance(&InstanceSpec::new(Family::Monotone, seed), &shape).unwrap();
            let mut st = SafeState::initial(&shape);
            st.set_audit(true);
            let mut steps = 0;
            while st.solution().is_none() {
                let open: Vec<usize> = (0..shape.len()).filter(|&i| !st.state().is_fully_concrete(i)).collect();
                assert!(!open.is_empty(), "no open points but no solution on {shape}");
                let idx = open[rng.gen_range(0..open.len())];
                let q = shape.point(idx);
                st.reveal_by_generation(&q, &f.get(&q)).unwrap();
                assert!(respects(st.state(), &f), "respect lost on {shape} seed {seed}");
                steps += 1;
            }
            let x = st.solution().unwrap();
            assert!(f.get(&x).is_star_solution(), "{shape} seed {seed} after {steps} steps");
        }
    }
}
