use std::process::{Command, Output};

fn tarski(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tarski")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let o = tarski(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn gen_roundtrips_through_the_solver() {
    let dir = std::env::temp_dir().join(format!("tarski-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("inst.txt");
    let p = path.to_str().unwrap();
    stdout(&["gen", "--shape", "3:3,4,5", "--family", "staircase", "--seed", "4", "--out", p]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&["solve-star", "--input", p])).unwrap();
    assert_eq!(v["algorithm"], "star3");
    assert!(v["queries"].as_u64().unwrap() > 0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bench_and_game_are_deterministic() {
    let bench = ["bench", "--n", "8", "--reps", "12", "--seed", "5", "--jobs", "3"];
    let a = stdout(&bench);
    assert_eq!(a, stdout(&bench));
    assert!(a.lines().skip(1).all(|l| l.ends_with(",0") && l.contains(",true,")));
    let game = ["game", "--n", "8", "--family", "attractor", "--seed", "2"];
    assert_eq!(stdout(&game), stdout(&game));
}

#[test]
fn timing_flag_fills_wall_ms() {
    let out = stdout(&["bench", "--n", "16", "--reps", "2", "--timing"]);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn solve4_reports_both_phases() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["solve4", "--n", "8", "--seed", "3"])).unwrap();
    let r = &v["result"];
    assert_eq!(r["certificate"], "FIXED_POINT");
    let q = r["queries"].as_u64().unwrap();
    assert_eq!(q, r["search_queries"].as_u64().unwrap() + r["terminal_queries"].as_u64().unwrap());
    assert_eq!(v["steps"].as_array().unwrap().len() as u64, r["rounds"].as_u64().unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["gen", "--shape", "3:0"][..],
        &["gen", "--family", "nope", "--n", "3"],
        &["gen"],
        &["solve-star", "--shape", "2:4"],
        &["bench", "--n", "4", "--algorithm", "nope"],
        &["frobnicate"],
    ] {
        assert_eq!(tarski(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_runs_small() {
    let o = tarski(&["verify", "--balanced-sets", "20", "--games", "2", "--tiny-max", "2"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 8, "{text}");
}
