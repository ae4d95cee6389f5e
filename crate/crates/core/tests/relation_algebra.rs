use fsec_core::lrcheck::{values_of, Side};
use fsec_core::{
    enum_rel_envs, in_value_rel, parse_safety_type, parse_sec_type, subtype, DomainSpec, Mode, RelEnv, SecType, Truth,
    TyVarEnv, Type, Value,
};

fn small_domain() -> DomainSpec {
    DomainSpec {
        ints: vec![0, 1, 2],
        bools: vec![true, false],
        strings: vec!["a".into(), "aa".into(), String::new()],
        ..DomainSpec::default()
    }
}

fn values(t: &str, dom: &DomainSpec) -> Vec<Value> {
    let (vs, complete) = values_of(&parse_safety_type(t).unwrap(), dom);
    assert!(complete, "values of {t} are not exhaustive");
    vs
}

fn holds(s: &SecType, rho: &RelEnv, a: &Value, b: &Value, dom: &DomainSpec) -> bool {
    match in_value_rel(s, rho, a, b, dom) {
        Truth::Yes => true,
        Truth::No => false,
        Truth::Unknown => panic!("undecided: ({a}, {b}) at {s}"),
    }
}

fn relations_over_int(dom: &DomainSpec) -> Vec<RelEnv> {
    let delta: TyVarEnv = [("X".to_string(), Type::int())].into_iter().collect();
    enum_rel_envs(&delta, dom, &Mode::Exhaustive).unwrap().collect()
}

const CLOSED_TYPES: &[&str] = &[
    "Int",
    "Bool",
    "String",
    "Unit",
    "pub Int * pub Bool",
    "pub Bool + pub Unit",
    "priv Int * pub Bool",
    "pub Bool -> pub Bool",
    "pub Int -> priv Bool",
    "priv Bool -> pub Bool",
    "exists Y. Bool!Y * pub (Bool!Y -> pub Bool)",
    "exists Y. Bool!Y * pub Int",
];

#[test]
fn public_relation_is_a_per() {
    let dom = small_domain();
    let rho = RelEnv::new();
    for t in CLOSED_TYPES {
        let s = SecType::public(parse_safety_type(t).unwrap());
        let vs = values(t, &dom);
        let rel: Vec<Vec<bool>> = vs.iter().map(|a| vs.iter().map(|b| holds(&s, &rho, a, b, &dom)).collect()).collect();
        let n = vs.len();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(rel[i][j], rel[j][i], "symmetry at {t}: {} {}", vs[i], vs[j]);
                if !rel[i][j] {
                    continue;
                }
                for k in 0..n {
                    if rel[j][k] {
                        assert!(rel[i][k], "transitivity at {t}: {} {} {}", vs[i], vs[j], vs[k]);
                    }
                }
            }
        }
    }
}

#[test]
fn top_facet_relates_all_values() {
    let dom = small_domain();
    for t in ["Int", "String", "pub Int * pub Bool", "pub Bool -> pub Bool"] {
        let s = SecType::private(parse_safety_type(t).unwrap());
        let vs = values(t, &dom);
        for a in &vs {
            for b in &vs {
                assert!(holds(&s, &RelEnv::new(), a, b, &dom), "{a} {b} at {s}");
            }
        }
    }
}

#[test]
fn subtyping_is_sound_for_the_relation() {
    let mut dom = small_domain();
    dom.ints = vec![0, 1];
    let rules: &[(&str, &str)] = &[
        ("Int!X", "Int!X"),
        ("pub Int", "pub Int"),
        ("pub Int * Int!X", "pub Int * Int!X"),
        ("pub Int", "priv Int"),
        ("Int!X", "priv Int"),
        ("pub (Int!X * pub Bool)", "priv (Int!X * pub Bool)"),
        ("pub (pub Int -> Int!X)", "priv (pub Int -> Int!X)"),
        ("pub Int", "Int!X"),
    ];
    for rho in relations_over_int(&dom) {
        for (a, b) in rules {
            let (s1, s2) = (parse_sec_type(a).unwrap(), parse_sec_type(b).unwrap());
            assert!(subtype(&s1, &s2), "{a} <: {b}");
            let (vs, complete) = values_of(&rho.apply(Side::Left, &s1.safety), &dom);
            assert!(complete);
            for v1 in &vs {
                for v2 in &vs {
                    if holds(&s1, &rho, v1, v2, &dom) {
                        assert!(holds(&s2, &rho, v1, v2, &dom), "{a} <: {b} under {rho}: ({v1}, {v2})");
                    }
                }
            }
        }
    }
}

#[test]
fn union_clause_holds_pointwise() {
    let dom = small_domain();
    let abs = parse_sec_type("Int!X").unwrap();
    let public = parse_sec_type("pub Int").unwrap();
    let ints = values("Int", &dom);
    let envs = relations_over_int(&dom);
    assert_eq!(envs.len(), 512);
    for rho in envs {
        let entry = rho.get("X").unwrap();
        for a in &ints {
            for b in &ints {
                let union = entry.contains(a, b) || holds(&public, &rho, a, b, &dom);
                assert_eq!(holds(&abs, &rho, a, b, &dom), union, "({a}, {b}) under {rho}");
            }
        }
    }
}
