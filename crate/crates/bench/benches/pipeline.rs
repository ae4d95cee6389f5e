use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fsec_core::generate::{closed_terms, GenConfig};
use fsec_core::{eval, parse_term, type_of, TyVarEnv, TypeEnv};

fn pipeline(c: &mut Criterion) {
    let terms = closed_terms(7, 200, &GenConfig::closed());
    let sources: Vec<String> = terms.iter().map(|g| g.term.to_string()).collect();

    c.bench_function("parse 200 terms", |b| {
        b.iter(|| sources.iter().filter(|s| parse_term(black_box(s)).is_ok()).count())
    });
    c.bench_function("typecheck 200 terms", |b| {
        let (delta, gamma) = (TyVarEnv::new(), TypeEnv::new());
        b.iter(|| terms.iter().filter(|g| type_of(&delta, &gamma, black_box(&g.term)).is_ok()).count())
    });
    c.bench_function("evaluate 200 terms", |b| {
        b.iter(|| terms.iter().filter(|g| eval(black_box(&g.term), 100_000).is_ok()).count())
    });
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
