mod common;

use fsec_core::generate::{closed_terms, open_terms, GenConfig};
use fsec_core::{
    eval, parse_sec_type, parse_term, step, subtype, theta, trace, type_of, BinOp, EvalError, Literal, StepResult,
    TyVarEnv, TypeEnv,
};
use proptest::prelude::*;

const FUEL: u64 = 100_000;

#[test]
fn well_typed_closed_terms_never_get_stuck() {
    let terms = closed_terms(2024, 1000, &GenConfig::closed());
    for g in &terms {
        match eval(&g.term, FUEL) {
            Ok(_) => {}
            Err(e) => panic!("{} : {}\n{e}", g.term, g.ty),
        }
    }
}

#[test]
fn small_step_agrees_with_big_step_oracle() {
    for g in closed_terms(99, 500, &GenConfig::closed()) {
        let v = eval(&g.term, FUEL).unwrap();
        let o = common::eval(&g.term).unwrap_or_else(|e| panic!("oracle failed on {}: {e:?}", g.term));
        assert_eq!(common::value_shape(&v), common::shape(&o), "{}", g.term);
    }
}

#[test]
fn every_step_preserves_the_type_and_is_deterministic() {
    let delta = TyVarEnv::new();
    let gamma = TypeEnv::new();
    for g in closed_terms(5, 300, &GenConfig::closed()) {
        let t = trace(&g.term, FUEL);
        assert!(t.outcome.is_ok(), "{}", g.term);
        for (i, e) in t.terms.iter().enumerate() {
            let s = type_of(&delta, &gamma, e).unwrap_or_else(|err| panic!("step {i} of {}: {e}\n{err}", g.term));
            assert!(subtype(&s, &g.ty), "step {i} of {}: {e} : {s}, expected {}", g.term, g.ty);
            assert_eq!(step(e), step(e));
        }
        let again = trace(&g.term, FUEL);
        assert_eq!(t.terms, again.terms);
        assert_eq!(t.outcome, again.outcome);
    }
}

#[test]
fn intermediate_terms_reach_the_same_value() {
    for g in closed_terms(17, 100, &GenConfig::closed()) {
        let t = trace(&g.term, FUEL);
        let v = t.outcome.clone().unwrap();
        for e in &t.terms {
            assert_eq!(eval(e, FUEL).unwrap(), v);
        }
    }
}

#[test]
fn fuel_bounds_the_number_of_steps() {
    let e = parse_term("((1 + 2) + 3) + 4").unwrap();
    assert_eq!(eval(&e, 3).unwrap(), fsec_core::Value::int(10));
    assert_eq!(eval(&e, 2), Err(EvalError::FuelExhausted { steps: 2 }));
    assert!(matches!(step(&parse_term("10").unwrap()), StepResult::Done(_)));
}

fn int_lit() -> impl Strategy<Value = i64> {
    prop_oneof![any::<i64>(), -5i64..5, Just(i64::MIN), Just(i64::MAX)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pretty_then_parse_is_identity(seed in any::<u64>()) {
        for g in closed_terms(seed, 2, &GenConfig::closed()).into_iter().chain(open_terms(seed, 2, &GenConfig::open())) {
            let text = g.term.to_string();
            let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{text}\n{e}")))?;
            prop_assert!(back.alpha_eq(&g.term), "{} vs {}", text, back);
            let ty = g.ty.to_string();
            prop_assert_eq!(parse_sec_type(&ty).unwrap(), g.ty);
        }
    }

    #[test]
    fn theta_matches_oracle(a in int_lit(), b in int_lit()) {
        for op in [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Mod, BinOp::Le, BinOp::Eq] {
            let (x, y) = (Literal::Int(a), Literal::Int(b));
            prop_assert_eq!(theta(op, &x, &y), common::op(op, &x, &y).ok());
        }
    }

    #[test]
    fn string_operators_match_oracle(a in "[a-c]{0,4}", b in "[a-c]{0,4}") {
        for op in [BinOp::Concat, BinOp::Eq] {
            let (x, y) = (Literal::Str(a.clone()), Literal::Str(b.clone()));
            prop_assert_eq!(theta(op, &x, &y), common::op(op, &x, &y).ok());
        }
        prop_assert_eq!(theta(BinOp::Add, &Literal::Str(a), &Literal::Int(1)), None);
    }

    #[test]
    fn generation_is_reproducible(seed in any::<u64>()) {
        let a: Vec<String> = closed_terms(seed, 3, &GenConfig::closed()).iter().map(|g| g.term.to_string()).collect();
        let b: Vec<String> = closed_terms(seed, 3, &GenConfig::closed()).iter().map(|g| g.term.to_string()).collect();
        prop_assert_eq!(a, b);
    }
}
