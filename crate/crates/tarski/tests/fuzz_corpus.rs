//! The committed fuzz seeds go through the parsers with the same checks as
//! the fuzz targets.

use std::fs;
use std::path::Path;

use tarski::io::{parse_instance, parse_pi, write_instance, write_pi};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn instance_seeds() {
    let all = seeds("parse_instance");
    assert!(all.len() >= 4);
    for (name, text) in all {
        match parse_instance(&text) {
            Ok(f) => {
                assert_eq!(write_instance(&f), text, "{name}");
                f.validated().unwrap();
            }
            Err(e) => assert!(name.contains("truncated"), "{name}: {e}"),
        }
    }
}

#[test]
fn pi_seeds() {
    for (name, text) in seeds("parse_pi") {
        let p = parse_pi(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(write_pi(&p), text, "{name}");
    }
}
