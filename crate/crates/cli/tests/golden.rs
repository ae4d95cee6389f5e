mod common;

use std::fs;

use common::*;

/// Set `UPDATE_GOLDEN=1` to rewrite the golden files.
#[test]
fn corpus_matches_golden_files() {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        for (cmd, p) in golden_cases() {
            fs::write(golden_path(cmd, &p), render(&golden_run(cmd, &p))).unwrap();
        }
    }
    let (n, bad) = golden_mismatches();
    assert!(n >= 20, "only {n} golden cases");
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn rejected_examples_are_type_errors() {
    for p in ["leak_direct.fsec", "leak_as_string.fsec", "length_prefacet.fsec", "usersalary_public_rejected.fsec"] {
        let o = golden_run("check", p);
        assert_eq!(o.code, fsec_cli::EXIT_TYPE_ERROR, "{p}\n{}", o.stderr);
        assert!(o.stderr.starts_with(p), "{}", o.stderr);
    }
}

#[test]
fn accepted_examples_print_their_types() {
    for (p, ty) in [
        ("account_store.fsec", "pub Bool"),
        ("login_faceted.fsec", "priv Bool"),
        ("upgrade_public.fsec", "pub Bool"),
        ("upgrade_private.fsec", "priv Int"),
        ("salary_ok.fsec", "pub Bool"),
        ("length_private.fsec", "priv Int"),
    ] {
        let o = golden_run("check", p);
        assert_eq!((o.code, o.stdout.trim()), (0, ty), "{p}\n{}", o.stderr);
    }
}
