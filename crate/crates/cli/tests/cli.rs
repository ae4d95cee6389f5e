mod common;

use std::fs;
use std::path::PathBuf;

use common::*;
use fsec_cli::*;
use serde_json::Value as Json;

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("fsec-cli-tests-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path: PathBuf = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(o: &Outcome) -> Json {
    assert_eq!(o.stdout.lines().count(), 1, "{}", o.stdout);
    serde_json::from_str(&o.stdout).unwrap()
}

#[test]
fn run_prints_the_value() {
    let o = fsec(&["run", &corpus("salary_packages.fsec")]);
    assert_eq!((o.code, o.stdout.as_str()), (EXIT_OK, "true\n"));
}

#[test]
fn trace_numbers_each_step() {
    let f = scratch("trace.fsec", "(1 + 2) + 3");
    let o = fsec(&["trace", &f]);
    assert_eq!(o.code, EXIT_OK);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines, ["   0  1 + 2 + 3", "   1  3 + 3", "   2  6", "6"]);
}

#[test]
fn partial_operations_are_runtime_errors() {
    let f = scratch("mod.fsec", "1 % 0");
    let o = fsec(&["run", &f]);
    assert_eq!(o.code, EXIT_RUNTIME);
    assert!(o.stdout.starts_with("error:"), "{}", o.stdout);
}

#[test]
fn fuel_exhaustion_is_a_runtime_error() {
    let f = scratch("fuel.fsec", "((1 + 2) + 3) + 4");
    assert_eq!(fsec(&["run", "--fuel", "2", &f]).code, EXIT_RUNTIME);
    assert_eq!(fsec(&["run", "--fuel", "3", &f]).code, EXIT_OK);
}

#[test]
fn unchecked_runs_skip_only_security_typing() {
    let f = scratch("leak.fsec", "observe pub Int; (fun (x: priv Int) => x) 1");
    assert_eq!(fsec(&["check", &f]).code, EXIT_TYPE_ERROR);
    let o = fsec(&["run", "--unchecked", &f]);
    assert_eq!((o.code, o.stdout.as_str()), (EXIT_OK, "1\n"));
    let bad = scratch("bad.fsec", "1 + true");
    assert_eq!(fsec(&["run", "--unchecked", &bad]).code, EXIT_TYPE_ERROR);
}

#[test]
fn parse_errors_carry_positions() {
    let f = scratch("parse.fsec", "let x = ;\nx");
    let o = fsec(&["check", &f]);
    assert_eq!(o.code, EXIT_PARSE_ERROR);
    assert!(o.stderr.starts_with("parse.fsec:1:"), "{}", o.stderr);
}

#[test]
fn usage_and_missing_files() {
    assert_eq!(fsec(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(fsec(&["check", "/nonexistent/nowhere.fsec"]).code, EXIT_NO_INPUT);
    assert_eq!(fsec(&["erni", &corpus("account_store.fsec")]).code, EXIT_USAGE);
    assert_eq!(fsec(&["run", &corpus("salary_ok.fsec")]).code, EXIT_USAGE);
    assert_eq!(fsec(&["--help"]).code, EXIT_OK);
}

#[test]
fn structured_check_output() {
    let v = json(&fsec(&["check", "--format", "structured", &corpus("login_faceted.fsec")]));
    assert_eq!(v["type"], "priv Bool");
    let o = fsec(&["check", "--format", "structured", &corpus("leak_direct.fsec")]);
    assert_eq!(o.code, EXIT_TYPE_ERROR);
    let v = json(&o);
    assert!(v.to_string().contains("escape"), "{v}");
}

#[test]
fn structured_erni_verdicts() {
    let o = fsec(&["erni", "--format", "structured", &corpus("salary_parity.fsec")]);
    assert_eq!(o.code, EXIT_VIOLATED);
    let v = json(&o);
    assert_eq!(v["verdict"], "violated");
    assert_eq!(v["relations"][0]["pairs"][0], serde_json::json!(["100001", "100002"]));
    assert_eq!(v["outputs"], serde_json::json!(["1", "0"]));

    let v = json(&fsec(&["erni", "--format", "structured", &corpus("salary_ok.fsec")]));
    assert_eq!(v["verdict"], "holds");
    assert_eq!(v["relation_environments"], 512);
}

#[test]
fn witness_files_replay() {
    let o = fsec(&["erni", "--witness", &corpus("salary_parity.witness"), &corpus("salary_parity.fsec")]);
    assert_eq!(o.code, EXIT_VIOLATED);
    assert!(o.stdout.contains("-- outputs: 1 | 0"), "{}", o.stdout);
    let o = fsec(&[
        "erni",
        "--mode",
        "witness",
        "--witness",
        &corpus("length_public.witness"),
        &corpus("length_public.fsec"),
    ]);
    assert_eq!(o.code, EXIT_VIOLATED);
    assert!(o.stdout.contains("-- outputs: 1 | 2"), "{}", o.stdout);
}

#[test]
fn emitted_witnesses_replay_to_the_same_outputs() {
    let o = fsec(&["erni", &corpus("salary_raw.fsec")]);
    assert_eq!(o.code, EXIT_VIOLATED);
    let w = scratch("raw.witness", o.stdout.strip_prefix("violated\n").unwrap());
    let again = fsec(&["erni", "--witness", &w, &corpus("salary_raw.fsec")]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn invalid_witnesses_are_rejected() {
    let w = scratch("bad.witness", "x := \"a\" | \"aa\"");
    let o = fsec(&["erni", "--witness", &w, &corpus("length_private.fsec")]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
    let w = scratch("wrong.witness", "x := 1 | 2");
    assert_eq!(fsec(&["erni", "--witness", &w, &corpus("length_public.fsec")]).code, EXIT_TYPE_ERROR);
}

#[test]
fn sampled_mode_is_inconclusive_without_a_violation() {
    let o = fsec(&["erni", "--mode", "sampled", "--samples", "10", "--seed", "3", &corpus("salary_ok.fsec")]);
    assert_eq!(o.code, EXIT_INCONCLUSIVE, "{}", o.stdout);
    let o = fsec(&["erni", "--mode", "sampled", "--samples", "50", &corpus("length_public.fsec")]);
    assert_eq!(o.code, EXIT_VIOLATED);
}

#[test]
fn carrier_flags_extend_the_domain() {
    let f = scratch("carrier.fsec", "tyvar X : Int; input x : Int!X; observe pub Bool; x <= 5");
    let o = fsec(&["erni", "--carrier", "Int=0..1", &f]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    let o = fsec(&["erni", "--carrier", "Int=4..6", &f]);
    assert_eq!(o.code, EXIT_VIOLATED, "{}", o.stdout);
}
