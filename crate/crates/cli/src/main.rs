use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tarski::bench::{run_bench, to_csv, Algorithm, BenchConfig};
use tarski::functions::{generate_instance, Family, InstanceSpec, QueryOracle, SignFunction};
use tarski::game::{play_game, GameConfig};
use tarski::io::{parse_instance, write_instance};
use tarski::lattice::GridShape;
use tarski::solver::{reduce_tarski4, solve_tarski_star, Reduce4Config, StarConfig};
use tarski::tracker::RevealPolicy;
use tarski::verify::{run_all, VerifyConfig};
use tarski::{Error, Result};

#[derive(Parser)]
#[command(name = "tarski", version, about = "Monotone fixed-point solvers on integer grids")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance as a text dump.
    Gen(InstanceArgs),
    /// Play the witness game and write one JSON record per round.
    Game {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Repair answers through Generate-PI-Function instead of the
        /// witness closure.
        #[arg(long)]
        closure: bool,
        #[arg(long)]
        audit: bool,
    },
    /// Solve a 3D instance with the Tarski* solver.
    SolveStar(SolveArgs),
    /// Solve a 4D instance through the slice reduction.
    Solve4(SolveArgs),
    /// Solve many seeded instances and write CSV.
    Bench {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// auto, star, reduce4, dqy or kleene.
        #[arg(long, default_value = "auto")]
        algorithm: String,
        /// Worker threads (0: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Record wall-clock times; otherwise `wall_ms` is 0.
        #[arg(long)]
        timing: bool,
    },
    /// Run the brute-force verification suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        tiny_max: u32,
        #[arg(long, default_value_t = 1000)]
        balanced_sets: usize,
        #[arg(long, default_value_t = 20)]
        games: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// `k:n_1,...,n_k`, or `k:n` for a cube.
    #[arg(long)]
    shape: Option<String>,
    /// Side length of a cube; the dimension comes from the subcommand.
    #[arg(long)]
    n: Option<u32>,
    /// attractor, staircase or monotone.
    #[arg(long, default_value = "monotone")]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Read the instance from a dump instead of generating it.
    #[arg(long)]
    input: Option<PathBuf>,
}

fn parse_shape(spec: &str) -> Result<GridShape> {
    let bad = || Error::Usage(format!("bad shape {spec:?}; expected k:n_1,...,n_k"));
    let (k, ext) = spec.split_once(':').ok_or_else(bad)?;
    let k: usize = k.parse().map_err(|_| bad())?;
    let ext: Vec<u32> = ext.split(',').map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    match ext.len() {
        1 => GridShape::cube(k, ext[0]),
        l if l == k => GridShape::new(&ext),
        _ => Err(bad()),
    }
}

impl InstanceArgs {
    fn shape(&self, default_k: usize) -> Result<GridShape> {
        match (&self.shape, self.n) {
            (Some(s), None) => parse_shape(s),
            (None, Some(n)) => GridShape::cube(default_k, n),
            (None, None) => Err(Error::Usage("give --shape or --n".into())),
            (Some(_), Some(_)) => Err(Error::Usage("--shape and --n are exclusive".into())),
        }
    }

    fn family(&self) -> Result<Family> {
        Family::from_tag(&self.family).ok_or_else(|| Error::Usage(format!("unknown family {:?}", self.family)))
    }

    fn instance(&self, default_k: usize) -> Result<SignFunction> {
        generate_instance(&InstanceSpec::new(self.family()?, self.seed), &self.shape(default_k)?)
    }
}

impl SolveArgs {
    fn instance(&self, default_k: usize) -> Result<SignFunction> {
        match &self.input {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
                parse_instance(&text)?.validated()
            }
            None => self.inst.instance(default_k),
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Resource(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(|e| Error::Resource(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen(a) => {
            emit(&a.out, &write_instance(&a.instance(3)?))?;
        }
        Cmd::Game { inst, closure, audit } => {
            let h = inst.instance(3)?;
            let policy = if closure { RevealPolicy::RuleClosure(&h) } else { RevealPolicy::Witness(&h) };
            let t = play_game(h.shape(), policy, GameConfig { audit, ..GameConfig::default() })?;
            emit(&inst.out, &t.to_jsonl())?;
            eprintln!(
                "{} rounds, {} queries, solution {} ({})",
                t.rounds.len(),
                t.total_queries,
                t.solution,
                t.termination
            );
            return Ok(t.shrink_violations() == 0);
        }
        Cmd::SolveStar(a) => {
            let f = a.instance(3)?;
            let r = solve_tarski_star(&mut QueryOracle::new(&f), StarConfig::default())?;
            emit(&a.inst.out, &format!("{}\n", serde_json::to_string_pretty(&r).expect("results serialize")))?;
        }
        Cmd::Solve4(a) => {
            let f = a.instance(4)?;
            let (r, steps) = reduce_tarski4(&mut QueryOracle::new(&f), Reduce4Config { check_box: true })?;
            let v = json!({ "result": r, "steps": steps });
            emit(&a.inst.out, &format!("{}\n", serde_json::to_string_pretty(&v).expect("results serialize")))?;
        }
        Cmd::Bench { inst, reps, algorithm, jobs, timing } => {
            let algorithm =
                Algorithm::from_tag(&algorithm).ok_or_else(|| Error::Usage(format!("unknown algorithm {algorithm:?}")))?;
            inst.family()?;
            let cfg = BenchConfig {
                shape: inst.shape(3)?,
                family: inst.family.clone(),
                algorithm,
                seed: inst.seed,
                reps,
                jobs,
                timing,
            };
            let rows = run_bench(&cfg)?;
            emit(&inst.out, &to_csv(&cfg, &rows))?;
            return Ok(rows.iter().all(|r| r.result.is_ok()));
        }
        Cmd::Verify { seed, tiny_max, balanced_sets, games, json, out } => {
            let cfg = VerifyConfig { seed, tiny_max, balanced_sets, games, ..VerifyConfig::default() };
            let rep = run_all(&cfg)?;
            emit(&out, &if json { rep.to_json() + "\n" } else { rep.to_text() })?;
            return Ok(rep.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tarski: {e}");
            match e {
                Error::Usage(_) | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
