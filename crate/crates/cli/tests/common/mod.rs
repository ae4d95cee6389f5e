#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use fsec_cli::Outcome;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus(name: &str) -> String {
    corpus_dir().join(name).to_string_lossy().into_owned()
}

pub fn fsec(args: &[&str]) -> Outcome {
    fsec_cli::run(std::iter::once("fsec").chain(args.iter().copied()))
}

/// Programs in the corpus, sorted by file name.
pub fn programs() -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".fsec"))
        .collect();
    names.sort();
    names
}

pub fn observes(name: &str) -> bool {
    let text = fs::read_to_string(corpus_dir().join(name)).unwrap_or_default();
    text.lines().any(|l| l.trim_start().starts_with("observe "))
}

pub fn render(o: &Outcome) -> String {
    format!("exit {}\n--- stdout\n{}--- stderr\n{}", o.code, o.stdout, o.stderr)
}

/// The command whose output is recorded for `golden/<stem>.<cmd>`.
pub fn golden_run(cmd: &str, program: &str) -> Outcome {
    fsec(&[cmd, &corpus(program)])
}

pub fn golden_path(cmd: &str, program: &str) -> PathBuf {
    let stem = program.trim_end_matches(".fsec");
    corpus_dir().join("golden").join(format!("{stem}.{cmd}"))
}

/// Golden files that exist for the corpus, as (command, program) pairs.
pub fn golden_cases() -> Vec<(&'static str, String)> {
    let mut cases = Vec::new();
    for p in programs() {
        cases.push(("check", p.clone()));
        if observes(&p) {
            cases.push(("erni", p));
        }
    }
    cases
}

/// Compares every golden case, returning a description of each mismatch.
pub fn golden_mismatches() -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let cases = golden_cases();
    for (cmd, p) in &cases {
        let got = render(&golden_run(cmd, p));
        match fs::read_to_string(golden_path(cmd, p)) {
            Ok(want) if want == got => {}
            Ok(want) => bad.push(format!("{cmd} {p}: expected\n{want}got\n{got}")),
            Err(e) => bad.push(format!("{cmd} {p}: missing golden file: {e}")),
        }
    }
    (cases.len(), bad)
}
