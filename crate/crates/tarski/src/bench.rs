//! Batch runs of the solvers over seeded instance families.

use std::fmt::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{usage, Error, Result};
use crate::functions::{generate_instance, Family, InstanceSpec, QueryOracle};
use crate::lattice::GridShape;
use crate::solver::{dqy_result, kleene_result, reduce_tarski4, solve_tarski_star, Reduce4Config, SolveResult, StarConfig};

pub const CSV_HEADER: &str =
    "instance_id,family,seed,k,extents,algorithm,queries,rounds,phase_terminal_queries,solved,solution,wall_ms";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Tarski* for `k = 3`, the reduction for `k = 4`, binary search
    /// otherwise.
    Auto,
    Star,
    Reduce4,
    Dqy,
    Kleene,
}

impl Algorithm {
    pub fn from_tag(tag: &str) -> Option<Algorithm> {
        Some(match tag {
            "auto" => Algorithm::Auto,
            "star" => Algorithm::Star,
            "reduce4" => Algorithm::Reduce4,
            "dqy" => Algorithm::Dqy,
            "kleene" => Algorithm::Kleene,
            _ => return None,
        })
    }

    fn resolve(self, k: usize) -> Algorithm {
        match (self, k) {
            (Algorithm::Auto, 3) => Algorithm::Star,
            (Algorithm::Auto, 4) => Algorithm::Reduce4,
            (Algorithm::Auto, _) => Algorithm::Dqy,
            (a, _) => a,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub shape: GridShape,
    pub family: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub reps: usize,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub timing: bool,
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub instance_id: usize,
    pub seed: u64,
    pub result: std::result::Result<SolveResult, String>,
    pub wall_ms: u128,
}

/// Seed of the `i`-th instance of a run.
pub fn instance_seed(base: u64, i: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

pub fn solve_once(shape: &GridShape, family: &Family, algorithm: Algorithm, seed: u64) -> Result<SolveResult> {
    let f = generate_instance(&InstanceSpec::new(family.clone(), seed), shape)?;
    let mut o = QueryOracle::new(&f);
    match algorithm.resolve(shape.k()) {
        Algorithm::Star => solve_tarski_star(&mut o, StarConfig::default()),
        Algorithm::Reduce4 => reduce_tarski4(&mut o, Reduce4Config::default()).map(|r| r.0),
        Algorithm::Dqy => dqy_result(&mut o),
        Algorithm::Kleene => kleene_result(&mut o),
        Algorithm::Auto => unreachable!("resolved above"),
    }
}

/// Runs `reps` instances, in parallel, and returns the rows in instance
/// order.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let Some(family) = Family::from_tag(&cfg.family) else {
        return usage(format!("unknown family {:?}", cfg.family));
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?;
    let rows = pool.install(|| {
        (0..cfg.reps)
            .into_par_iter()
            .map(|i| {
                let seed = instance_seed(cfg.seed, i);
                let t = Instant::now();
                let result = solve_once(&cfg.shape, &family, cfg.algorithm, seed).map_err(|e| e.to_string());
                let wall_ms = if cfg.timing { t.elapsed().as_millis() } else { 0 };
                BenchRow { instance_id: i, seed, result, wall_ms }
            })
            .collect()
    });
    Ok(rows)
}

pub fn to_csv(cfg: &BenchConfig, rows: &[BenchRow]) -> String {
    let ext: Vec<String> = cfg.shape.extents().iter().map(u32::to_string).collect();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (alg, queries, rounds, terminal, solved, sol) = match &r.result {
            Ok(s) => {
                let c: Vec<String> = s.solution.coords().iter().map(u32::to_string).collect();
                (s.algorithm, s.queries, s.rounds, s.terminal_queries, true, c.join(" "))
            }
            Err(_) => ("-", 0, 0, 0, false, String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{alg},{queries},{rounds},{terminal},{solved},{sol},{}",
            r.instance_id,
            cfg.family,
            r.seed,
            cfg.shape.k(),
            ext.join(" "),
            r.wall_ms
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_ordered_and_untimed() {
        let cfg = BenchConfig {
            shape: GridShape::cube(3, 4).unwrap(),
            family: "monotone".into(),
            algorithm: Algorithm::Auto,
            seed: 7,
            reps: 6,
            jobs: 2,
            timing: false,
        };
        let rows = run_bench(&cfg).unwrap();
        assert!(rows.iter().enumerate().all(|(i, r)| r.instance_id == i && r.wall_ms == 0 && r.result.is_ok()));
        let csv = to_csv(&cfg, &rows);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,monotone,"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",0"));
    }
}
