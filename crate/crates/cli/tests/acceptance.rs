//! Acceptance criteria 1 to 9. Each prints one PASS/FAIL line straight to
//! stdout, so the lines show up even when output capture is on.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use tarski::candidates::cand_sets;
use tarski::enumerate::{for_each_function, DEFAULT_CAP};
use tarski::functions::{attractor, generate_instance, Family, InstanceSpec, QueryOracle};
use tarski::game::{play_game, GameConfig};
use tarski::lattice::GridShape;
use tarski::pi::PiState;
use tarski::solver::{dqy_solve, kleene_solve, reduce_tarski4, solve_tarski_star, Certificate, Reduce4Config, StarConfig};
use tarski::tracker::RevealPolicy;
use tarski::verify::{balanced_suite, generate_contract_suite, lemma_candidates_suite, paths_suite, SuiteReport};
use tarski::functions::Oracle;

const SEED: u64 = 20_240_601;

fn report(n: u32, ok: bool, detail: String, elapsed: Duration) -> bool {
    let line = format!(
        "criterion {n}: {} {detail} ({:.1}s)\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    ok
}

fn suite_detail(s: &SuiteReport) -> String {
    let mut d = format!("{}: {} cases, {} failures", s.suite, s.cases, s.failures);
    if let Some(w) = &s.first_witness {
        d.push_str(&format!("; first: {w}"));
    }
    d
}

fn median(v: &mut [u64]) -> f64 {
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    }
}

fn shrink_and_nonempty() -> (bool, bool) {
    let t = Instant::now();
    let (mut games, mut rounds, mut violations, mut init_bad, mut empty, mut errors) = (0, 0, 0, 0, 0, 0);
    for n in [8u32, 16, 32, 64] {
        let shape = GridShape::cube(3, n).unwrap();
        let c0 = cand_sets(&PiState::p0(&shape));
        if c0.plus.len() + c0.minus.len() != 2 * shape.len() {
            init_bad += 1;
        }
        for g in 0..50u64 {
            let fam = if g % 2 == 0 { Family::Attractor { target: None, generators: None } } else { Family::Staircase };
            let h = generate_instance(&InstanceSpec::new(fam, SEED + g), &shape).unwrap();
            let tr = match play_game(&shape, RevealPolicy::Witness(&h), GameConfig::default()) {
                Ok(tr) => tr,
                Err(_) => {
                    errors += 1;
                    continue;
                }
            };
            games += 1;
            if let Some(r) = tr.rounds.first() {
                if r.cand_plus_before + r.cand_minus_before != 2 * shape.len() {
                    init_bad += 1;
                }
            }
            for r in &tr.rounds {
                if r.cand_plus_before == 0 || r.cand_minus_before == 0 {
                    empty += 1;
                }
                if r.completed() {
                    rounds += 1;
                    if !r.shrink_ok() {
                        violations += 1;
                    }
                }
            }
        }
    }
    let el = t.elapsed();
    let c1 = report(
        1,
        games >= 200 && violations == 0 && errors == 0 && el < Duration::from_secs(300),
        format!("{games} games, {rounds} completed rounds, {violations} shrink violations, {errors} errors"),
        el,
    );
    let c2 = report(
        2,
        init_bad == 0 && empty == 0 && errors == 0,
        format!("{init_bad} initial-size mismatches, {empty} rounds with an empty candidate set"),
        el,
    );
    (c1, c2)
}

fn lemma_candidates() -> bool {
    let t = Instant::now();
    let shapes = [GridShape::new(&[2]).unwrap(), GridShape::cube(2, 3).unwrap(), GridShape::cube(3, 2).unwrap()];
    let s = lemma_candidates_suite(&shapes, 100, SEED).unwrap();
    let g = GridShape::new(&[2]).unwrap();
    let m = tarski::enumerate::count_monotone(&g, DEFAULT_CAP).unwrap();
    let sf = tarski::enumerate::count_safe(&g, DEFAULT_CAP).unwrap();
    report(
        3,
        s.passed() && s.cases >= 100 && m == 9 && sf == 6,
        format!("{}; [2] counts {m} monotone, {sf} safe; {}", suite_detail(&s), s.notes.join("; ")),
        t.elapsed(),
    )
}

fn balanced() -> bool {
    let t = Instant::now();
    let s = balanced_suite(&GridShape::cube(3, 16).unwrap(), 10_000, SEED).unwrap();
    let el = t.elapsed();
    report(
        4,
        s.passed() && s.cases == 10_000 && el < Duration::from_secs(180),
        format!("{}; {}", suite_detail(&s), s.notes.join("; ")),
        el,
    )
}

fn contract() -> bool {
    let t = Instant::now();
    let shapes = [
        GridShape::new(&[2]).unwrap(),
        GridShape::cube(2, 4).unwrap(),
        GridShape::new(&[3, 5]).unwrap(),
        GridShape::cube(3, 3).unwrap(),
        GridShape::new(&[2, 4, 6]).unwrap(),
        GridShape::cube(3, 6).unwrap(),
    ];
    let (c, r) = generate_contract_suite(&shapes, 1000, 200, SEED).unwrap();
    report(
        5,
        c.passed() && r.passed() && c.cases >= 1000 && r.cases >= 200,
        format!("{}; {}", suite_detail(&c), suite_detail(&r)),
        t.elapsed(),
    )
}

fn solvers() -> bool {
    let t = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    let mut medians = Vec::new();
    for n in [8u32, 16, 32, 64] {
        let shape = GridShape::cube(3, n).unwrap();
        let mut qs = Vec::new();
        for i in 0..500u64 {
            let f = generate_instance(&InstanceSpec::new(Family::Monotone, SEED + i), &shape).unwrap();
            let r = solve_tarski_star(&mut QueryOracle::new(&f), StarConfig::default());
            let verified = r.as_ref().is_ok_and(|r| {
                let v = f.get(&r.solution);
                match r.certificate {
                    Certificate::StarPlus => v.is_star_plus(),
                    Certificate::StarMinus => v.is_star_minus(),
                    Certificate::FixedPoint => v.is_zero(),
                }
            });
            if !verified {
                ok = false;
                detail.push(format!("[{n}]^3 seed {} failed", SEED + i));
                continue;
            }
            qs.push(r.unwrap().queries);
        }
        let m = median(&mut qs);
        medians.push((n, m));
    }
    let (num, den) = medians.iter().fold((0.0, 0.0), |(a, b), &(n, m)| {
        let l = (n as f64).log2();
        (a + m * l, b + l * l)
    });
    let c = num / den;
    let ratio = medians[3].1 / medians[0].1;
    ok &= ratio <= 3.5;
    let per: Vec<String> = medians.iter().map(|(n, m)| format!("n={n} median={m}")).collect();
    detail.push(format!("{}; C={c:.2} (median ≈ C·log2 n); q(64)/q(8)={ratio:.2}", per.join(" ")));

    let mut fits = Vec::new();
    let mut sq = (0.0, 0.0);
    for n in [4u32, 8, 16] {
        let shape = GridShape::cube(4, n).unwrap();
        let mut search = Vec::new();
        for i in 0..50u64 {
            let f = generate_instance(&InstanceSpec::new(Family::Monotone, SEED + i), &shape).unwrap();
            match reduce_tarski4(&mut QueryOracle::new(&f), Reduce4Config { check_box: true }) {
                Ok((r, _)) if f.get(&r.solution).is_zero() => search.push(r.search_queries),
                _ => {
                    ok = false;
                    detail.push(format!("[{n}]^4 seed {} failed", SEED + i));
                }
            }
        }
        let m = median(&mut search);
        let l2 = (n as f64).log2().powi(2);
        sq = (sq.0 + m * l2, sq.1 + l2 * l2);
        fits.push(format!("n={n} search median={m}"));
    }
    detail.push(format!("reduce4 {}; C'={:.2} (search ≈ C'·log2² n)", fits.join(" "), sq.0 / sq.1));
    report(6, ok, detail.join("; "), t.elapsed())
}

fn baselines() -> bool {
    let t = Instant::now();
    let mut ok = true;
    let mut kleene = Vec::new();
    for n in [4u32, 8, 16, 32] {
        let shape = GridShape::cube(3, n).unwrap();
        let top = shape.top();
        let f = attractor(&shape, &top, &[top]);
        let mut o = QueryOracle::new(&f);
        let x = kleene_solve(&mut o, false).unwrap();
        ok &= x == top && o.queries() == n as u64;
        kleene.push(format!("n={n}:{}", o.queries()));
    }
    let g = GridShape::cube(2, 3).unwrap();
    let mut monotone = 0u64;
    let mut wrong = 0u64;
    for_each_function(&PiState::p0(&g), false, DEFAULT_CAP, |f| {
        monotone += 1;
        let mut o = QueryOracle::new(f);
        match dqy_solve(&mut o, &g.bottom(), &g.top()) {
            Ok(x) if f.get(&x).is_zero() => {}
            _ => wrong += 1,
        }
        true
    })
    .unwrap();
    let g16 = GridShape::cube(3, 16).unwrap();
    let mut wrong16 = 0;
    for i in 0..200u64 {
        let f = generate_instance(&InstanceSpec::new(Family::Monotone, SEED + i), &g16).unwrap();
        match dqy_solve(&mut QueryOracle::new(&f), &g16.bottom(), &g16.top()) {
            Ok(x) if f.get(&x).is_zero() => {}
            _ => wrong16 += 1,
        }
    }
    ok &= wrong == 0 && wrong16 == 0 && monotone > 0;
    report(
        7,
        ok,
        format!(
            "kleene queries {}; dqy wrong on {wrong} of {monotone} monotone [3]^2 functions, {wrong16} of 200 on [16]^3",
            kleene.join(" ")
        ),
        t.elapsed(),
    )
}

fn paths() -> bool {
    let t = Instant::now();
    let s = paths_suite(&[GridShape::cube(2, 3).unwrap(), GridShape::cube(3, 4).unwrap()], 200, SEED).unwrap();
    report(8, s.passed() && s.cases >= 200, format!("{}; {}", suite_detail(&s), s.notes.join("; ")), t.elapsed())
}

fn determinism() -> bool {
    let t = Instant::now();
    let run = |args: &[&str]| {
        let o = Command::new(env!("CARGO_BIN_EXE_tarski")).args(args).output().unwrap();
        assert!(o.status.success(), "{args:?}");
        o.stdout
    };
    let seed = SEED.to_string();
    let cases: [&[&str]; 4] = [
        &["bench", "--n", "16", "--reps", "40", "--seed", &seed, "--jobs", "4"],
        &["bench", "--shape", "4:6", "--reps", "10", "--seed", &seed],
        &["game", "--n", "32", "--family", "staircase", "--seed", &seed],
        &["game", "--n", "16", "--family", "attractor", "--seed", &seed, "--closure"],
    ];
    let mut same = 0;
    for args in cases {
        if run(args) == run(args) {
            same += 1;
        }
    }
    report(9, same == cases.len(), format!("{same} of {} replays byte-identical", cases.len()), t.elapsed())
}

#[test]
fn acceptance() {
    let (c1, c2) = shrink_and_nonempty();
    let results = [c1, c2, lemma_candidates(), balanced(), contract(), solvers(), baselines(), paths(), determinism()];
    let failed: Vec<usize> = (1..=9).filter(|&i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
