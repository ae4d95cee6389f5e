use criterion::{criterion_group, criterion_main, Criterion};
use fsec_core::{check_erni, parse_sec_type, parse_term, DomainSpec, Literal, Mode, Prim, Type};

fn salary(c: &mut Criterion) {
    let delta = [("X".to_string(), Type::int())].into_iter().collect();
    let gamma = [("x".to_string(), parse_sec_type("pub (Int!X * (Int!X -> pub Bool))").unwrap())].into_iter().collect();
    let carrier = [(Prim::Int, vec![Literal::Int(100000), Literal::Int(100001), Literal::Int(100002)])];

    let mut group = c.benchmark_group("erni");
    group.sample_size(10);
    for (name, src, ty) in
        [("salary holds", "(snd x) (fst x)", "pub Bool"), ("parity violated", "fst x % 2", "pub Int")]
    {
        let e = parse_term(src).unwrap();
        let s = parse_sec_type(ty).unwrap();
        let dom = DomainSpec::for_program(&e, &carrier);
        group.bench_function(name, |b| b.iter(|| check_erni(&delta, &gamma, &e, &s, &dom, &Mode::Exhaustive).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, salary);
criterion_main!(benches);
