//! Acceptance criteria. Prints one PASS or FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use fsec_cli::{Outcome, EXIT_OK, EXIT_TYPE_ERROR, EXIT_VIOLATED};
use fsec_core::selftest;
use serde_json::Value as Json;

/// Wall-clock budget for the exhaustive check of the policy-respecting client.
const SALARY_BUDGET: Duration = Duration::from_secs(60);
/// Generated closed terms for type safety and determinism.
const CLOSED_TERMS: usize = 1000;
/// Generated open terms for self-relatedness.
const OPEN_TERMS: usize = 100;
const SEED: u64 = 0x5eed;

type Criterion = (&'static str, fn() -> Result<String, String>);

/// Expected `check` exit code for every corpus program.
const EXPECTED_CHECK: &[(&str, i32)] = &[
    ("account_store.fsec", EXIT_OK),
    ("leak_as_string.fsec", EXIT_TYPE_ERROR),
    ("leak_direct.fsec", EXIT_TYPE_ERROR),
    ("length_abstract.fsec", EXIT_TYPE_ERROR),
    ("length_prefacet.fsec", EXIT_TYPE_ERROR),
    ("length_private.fsec", EXIT_OK),
    ("length_public.fsec", EXIT_TYPE_ERROR),
    ("login_faceted.fsec", EXIT_OK),
    ("salary_ok.fsec", EXIT_OK),
    ("salary_packages.fsec", EXIT_OK),
    ("salary_parity.fsec", EXIT_TYPE_ERROR),
    ("salary_raw.fsec", EXIT_TYPE_ERROR),
    ("upgrade_private.fsec", EXIT_OK),
    ("upgrade_public.fsec", EXIT_OK),
    ("usersalary_public_rejected.fsec", EXIT_TYPE_ERROR),
];

fn structured(args: &[&str]) -> Result<(Outcome, Json), String> {
    let mut all = vec!["erni", "--format", "structured"];
    all.extend_from_slice(args);
    let o = fsec(&all);
    let v = serde_json::from_str(o.stdout.trim()).map_err(|e| format!("bad output ({e}): {}{}", o.stdout, o.stderr))?;
    Ok((o, v))
}

fn ints(pair: &Json) -> Option<(i64, i64)> {
    let a = pair.get(0)?.as_str()?.parse().ok()?;
    let b = pair.get(1)?.as_str()?.parse().ok()?;
    Some((a, b))
}

fn salary_client_holds() -> Result<String, String> {
    let start = Instant::now();
    let (o, v) = structured(&[&corpus("salary_ok.fsec")])?;
    let elapsed = start.elapsed();
    if o.code != EXIT_OK || v["verdict"] != "holds" || v["mode"] != "exhaustive" {
        return Err(format!("expected an exhaustive proof, got {v}"));
    }
    if elapsed > SALARY_BUDGET {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} relation environments in {elapsed:.2?}", v["relation_environments"]))
}

fn parity_client_leaks() -> Result<String, String> {
    let (o, v) = structured(&[&corpus("salary_parity.fsec")])?;
    if o.code != EXIT_VIOLATED {
        return Err(format!("expected a violation, got {v}"));
    }
    let pairs = v["relations"][0]["pairs"].as_array().cloned().unwrap_or_default();
    let leak = pairs.iter().filter_map(ints).find(|&(a, b)| a != b && a.rem_euclid(2) != b.rem_euclid(2));
    let Some((a, b)) = leak else { return Err(format!("no pair of differing parity in {v}")) };
    let Some((o1, o2)) = ints(&v["outputs"]) else { return Err(format!("no integer outputs in {v}")) };
    if o1 == o2 {
        return Err(format!("outputs agree: {o1}"));
    }
    let (o, w) = structured(&["--witness", &corpus("salary_parity.witness"), &corpus("salary_parity.fsec")])?;
    if o.code != EXIT_VIOLATED || ints(&w["outputs"]) != Some((1, 0)) {
        return Err(format!("witness file replay gave {w}"));
    }
    Ok(format!("R = {{({a}, {b})}}, outputs ({o1}, {o2}); witness file gives (1, 0)"))
}

fn length_leaks_publicly() -> Result<String, String> {
    let (o, v) = structured(&["--witness", &corpus("length_public.witness"), &corpus("length_public.fsec")])?;
    if o.code != EXIT_VIOLATED || ints(&v["outputs"]) != Some((1, 2)) {
        return Err(format!("public observation: {v}"));
    }
    let (o, v) = structured(&[&corpus("length_public.fsec")])?;
    if o.code != EXIT_VIOLATED {
        return Err(format!("exhaustive search at pub Int: {v}"));
    }
    let (o, v) = structured(&[&corpus("length_private.fsec")])?;
    if o.code != EXIT_OK || v["verdict"] != "holds" {
        return Err(format!("private observation: {v}"));
    }
    Ok("violated at pub Int with outputs (1, 2), holds at priv Int".into())
}

fn typechecker_matches_corpus() -> Result<String, String> {
    let progs = programs();
    let listed: Vec<&str> = EXPECTED_CHECK.iter().map(|(p, _)| *p).collect();
    if progs != listed {
        return Err(format!("corpus is {progs:?}"));
    }
    let mut bad = Vec::new();
    for (p, code) in EXPECTED_CHECK {
        let got = fsec(&["check", &corpus(p)]).code;
        if got != *code {
            bad.push(format!("{p}: exit {got}, expected {code}"));
        }
    }
    let (n, golden) = golden_mismatches();
    bad.extend(golden);
    if bad.is_empty() {
        Ok(format!("{} programs, {n} golden outputs", progs.len()))
    } else {
        Err(bad.join("; "))
    }
}

fn reports(rs: Vec<selftest::Report>) -> Result<String, String> {
    let summary: Vec<String> = rs.iter().map(|r| format!("{} {}", r.name, r.checked)).collect();
    match rs.iter().find(|r| !r.passed()) {
        None => Ok(summary.join(", ")),
        Some(r) => Err(r.to_string()),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("salary client respects the policy", salary_client_holds),
        ("parity client leaks", parity_client_leaks),
        ("length leaks at pub, not at priv", length_leaks_publicly),
        ("type checker agrees with the corpus", typechecker_matches_corpus),
        ("type safety and determinism", || {
            reports(vec![selftest::type_safety(SEED, CLOSED_TERMS), selftest::determinism(SEED, CLOSED_TERMS)])
        }),
        ("open terms are self-related", || reports(vec![selftest::self_relatedness(SEED, OPEN_TERMS)])),
        ("relation laws", || {
            reports(vec![selftest::per_law(), selftest::subtyping_soundness(), selftest::union_clause()])
        }),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
