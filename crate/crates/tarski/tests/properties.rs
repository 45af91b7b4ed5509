use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tarski::candidates::cand_sets;
use tarski::enumerate::{for_each_function, DEFAULT_CAP};
use tarski::functions::{
    check_monotone_sign, consistent, generate_instance, is_safe, respects, restrict_given_pi, Family, InstanceSpec,
};
use tarski::game::balanced_select_3d;
use tarski::io::{parse_instance, parse_pi, write_instance, write_pi};
use tarski::lattice::{box_points, shave, strictly_below_on_slice, GridShape, Point, Shave, SignPattern, Slice};
use tarski::pi::{check_safe_pi, is_safe_pi, post_pre_j_m, all_slices, PiState};
use tarski::verify::{brute_force_balanced, random_subset, sample_safe_states};

fn shape_strategy(max_k: usize, max_n: u32) -> impl Strategy<Value = GridShape> {
    prop::collection::vec(1..=max_n, 1..=max_k).prop_map(|e| GridShape::new(&e).unwrap())
}

fn point_in(shape: &GridShape, rng: &mut ChaCha8Rng) -> Point {
    let c: Vec<u32> = shape.extents().iter().map(|&n| rng.gen_range(1..=n)).collect();
    Point::new(&c)
}

fn random_slice(shape: &GridShape, x: &Point, rng: &mut ChaCha8Rng) -> Slice {
    let mask = rng.gen_range(1..(1u16 << shape.k())) as u8;
    Slice::through(x, mask)
}

fn family(tag: u8) -> Family {
    match tag % 3 {
        0 => Family::Attractor { target: None, generators: None },
        1 => Family::Staircase,
        _ => Family::Monotone,
    }
}

proptest! {
    #[test]
    fn lattice_laws(shape in shape_strategy(4, 6), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (point_in(&shape, &mut rng), point_in(&shape, &mut rng), point_in(&shape, &mut rng));
        prop_assert_eq!(x.join(&y), y.join(&x));
        prop_assert_eq!(x.meet(&y), y.meet(&x));
        prop_assert_eq!(x.join(&y).join(&z), x.join(&y.join(&z)));
        prop_assert_eq!(x.meet(&y).meet(&z), x.meet(&y.meet(&z)));
        prop_assert_eq!(x.join(&x), x);
        prop_assert!(x.leq(&x.join(&y)) && x.meet(&y).leq(&x));
        prop_assert_eq!(shape.point(shape.index(&x)), x);
        if x.leq(&y) && y.leq(&x) {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn boxes_shaves_and_strict_order(shape in shape_strategy(3, 5), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = point_in(&shape, &mut rng);
        let s = random_slice(&shape, &q, &mut rng);
        let pairs: Vec<(usize, i8)> = s.free_coords().map(|i| (i, if rng.gen_bool(0.5) { 1 } else { -1 })).collect();
        let phi = SignPattern::new(&pairs).unwrap();
        let outer = box_points(&shape, &s, &q, &phi, false).unwrap();
        let inner = box_points(&shape, &s, &q, &phi, true).unwrap();
        prop_assert!(inner.iter().all(|x| outer.contains(x)));
        for x in outer.iter().filter(|x| !inner.contains(x)) {
            prop_assert!(s.free_coords().any(|i| x[i] == q[i]));
        }
        let x = point_in(&shape, &mut rng);
        let i = rng.gen_range(0..=shape.k());
        let clamped = (0..shape.k()).any(|j| j != i && (x[j] == 1 || x[j] == shape.extent(j)));
        if !clamped {
            prop_assert_eq!(shave(&shape, &shave(&shape, &x, i, Shave::Plus), i, Shave::Minus), x);
        }
        let y = point_in(&shape, &mut rng);
        let sy = Slice::through(&x, s.free_mask());
        if sy.contains(&y) && strictly_below_on_slice(&x, &y, &sy).unwrap() {
            prop_assert!(x.leq(&y) && x != y);
        }
    }

    #[test]
    fn instance_dumps_roundtrip(shape in shape_strategy(4, 4), tag: u8, seed: u64) {
        let f = generate_instance(&InstanceSpec::new(family(tag), seed), &shape).unwrap();
        prop_assert_eq!(parse_instance(&write_instance(&f)).unwrap(), f);
    }

    #[test]
    fn instances_are_monotone_and_safe(shape in shape_strategy(3, 5), tag: u8, seed: u64) {
        let f = generate_instance(&InstanceSpec::new(family(tag), seed), &shape).unwrap();
        prop_assert!(check_monotone_sign(&f).is_ok());
        if tag % 3 != 2 {
            prop_assert!(is_safe(&f));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_states(shape in shape_strategy(3, 4), seed: u64) {
        let states = sample_safe_states(&shape, 12, seed).unwrap();
        let prev = &states[0];
        for p in &states {
            prop_assert!(is_safe_pi(p));
            prop_assert_eq!(parse_pi(&write_pi(p)).unwrap(), p.clone());
            let c = p.monotone_closure().unwrap();
            prop_assert_eq!(&c.monotone_closure().unwrap(), &c);
            prop_assert_eq!(&c, p);
            for s in all_slices(&shape) {
                let sm = post_pre_j_m(p, &s);
                if let (Some(j), Some(m)) = (sm.j, sm.m) {
                    prop_assert!(j.leq(&m), "J {} M {} on {}", j, m, s);
                }
            }
            // candidate sets only shrink as information is added
            if p.dominates(prev) {
                let (a, b) = (cand_sets(prev), cand_sets(p));
                prop_assert!(b.plus.iter().all(|x| a.plus.contains(x)));
                prop_assert!(b.minus.iter().all(|x| a.minus.contains(x)));
            }
        }
    }

    #[test]
    fn restriction_is_monotone_and_consistent(shape in shape_strategy(3, 4), tag: u8, seed: u64) {
        let f = generate_instance(&InstanceSpec::new(family(tag), seed), &shape).unwrap();
        for p in sample_safe_states(&shape, 8, seed ^ 0x55).unwrap() {
            let dir_ok = (0..shape.len()).all(|i| p.dir_at(i).admits(f.dir_at(i)));
            if !dir_ok {
                continue;
            }
            let r = restrict_given_pi(&f, &p).unwrap();
            prop_assert!(check_monotone_sign(&r).is_ok());
            prop_assert!(consistent(&r, &p));
            if consistent(&f, &p) {
                prop_assert!(respects(&p, &f));
            }
        }
    }

    #[test]
    fn balanced_selections_certify(n in 1u32..=7, seed: u64) {
        let shape = GridShape::cube(3, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_subset(&shape, &mut rng);
        let sel = balanced_select_3d(&s, &shape).unwrap();
        prop_assert!(sel.masses.0 * sel.divisor() >= s.len() && sel.masses.1 * sel.divisor() >= s.len());
        prop_assert!(brute_force_balanced(&s, &shape).unwrap().ok());
    }
}

/// On fully revealed states, the state-level safety check agrees with the
/// function-level one.
#[test]
fn safety_checks_agree_on_tiny_grids() {
    for ext in [&[3u32][..], &[2, 2], &[2, 3], &[2, 2, 2]] {
        let g = GridShape::new(ext).unwrap();
        let mut n = 0;
        for_each_function(&PiState::p0(&g), false, DEFAULT_CAP, |f| {
            assert_eq!(check_safe_pi(&f.to_pi()).is_ok(), is_safe(f), "{f:?}");
            n += 1;
            true
        })
        .unwrap();
        assert!(n > 0);
    }
}
