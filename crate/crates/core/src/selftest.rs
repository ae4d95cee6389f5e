//! Property suites over generated programs and enumerated relations, with
//! fixed seeds so that runs are reproducible.

use std::fmt;

use crate::eval::{eval, step, trace, EvalError};
use crate::generate::{closed_terms, open_terms, GenConfig};
use crate::lrcheck::{
    check_self_related, enum_rel_envs, in_value_rel, values_of, DomainSpec, Mode, RelEnv, Side, Truth, Verdict,
};
use crate::parser::{parse_safety_type, parse_sec_type};
use crate::syntax::{SecType, TyVarEnv, Type};
use crate::typecheck::subtype;

/// Outcome of one suite.
#[derive(Clone, Debug)]
pub struct Report {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl Report {
    fn new(name: &'static str) -> Self {
        Report { name, checked: 0, failures: Vec::new() }
    }

    fn fail(&mut self, msg: String) {
        if self.failures.len() < 10 {
            self.failures.push(msg);
        } else if self.failures.len() == 10 {
            self.failures.push("...".into());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {} checked, {} failure(s)", self.name, self.checked, self.failures.len())?;
        for m in &self.failures {
            write!(f, "\n  {m}")?;
        }
        Ok(())
    }
}

const FUEL: u64 = 100_000;

/// Generated closed well-typed terms evaluate to values.
pub fn type_safety(seed: u64, n: usize) -> Report {
    let mut r = Report::new("type safety");
    for g in closed_terms(seed, n, &GenConfig::closed()) {
        r.checked += 1;
        match eval(&g.term, FUEL) {
            Ok(_) => {}
            Err(EvalError::Stuck { term, reason }) => r.fail(format!("{} is stuck at `{term}`: {reason}", g.term)),
            Err(e) => r.fail(format!("{}: {e}", g.term)),
        }
    }
    r
}

/// Each step is a function of the term, and repeated runs agree.
pub fn determinism(seed: u64, n: usize) -> Report {
    let mut r = Report::new("determinism");
    for g in closed_terms(seed, n, &GenConfig::closed()) {
        r.checked += 1;
        let a = trace(&g.term, FUEL);
        let b = trace(&g.term, FUEL);
        if a.terms != b.terms || a.outcome != b.outcome {
            r.fail(format!("two runs of {} differ", g.term));
            continue;
        }
        if let Some(e) = a.terms.iter().find(|e| step(e) != step(e)) {
            r.fail(format!("step of {e} is not deterministic"));
        }
    }
    r
}

/// Generated open well-typed terms are related to themselves.
pub fn self_relatedness(seed: u64, n: usize) -> Report {
    let mut r = Report::new("self-relatedness");
    let base = DomainSpec { ints: vec![0, 1], strings: vec!["a".into(), String::new()], ..DomainSpec::default() };
    for g in open_terms(seed, n, &GenConfig::open()) {
        r.checked += 1;
        let mut dom = base.clone();
        dom.add_literals(&g.term.literals());
        dom.add_closures(&g.term);
        match check_self_related(&g.delta, &g.gamma, &g.term, &g.ty, &dom, &Mode::Exhaustive) {
            Ok(Verdict::Holds { .. }) => {}
            Ok(v @ Verdict::Violated { .. }) => r.fail(format!("{} : {} violated\n{v}", g.term, g.ty)),
            Ok(v) => r.fail(format!("{} : {}: {v}", g.term, g.ty)),
            Err(e) => r.fail(format!("{} : {}: {e}", g.term, g.ty)),
        }
    }
    r
}

fn decide(
    r: &mut Report,
    s: &SecType,
    rho: &RelEnv,
    a: &crate::eval::Value,
    b: &crate::eval::Value,
    dom: &DomainSpec,
) -> Option<bool> {
    match in_value_rel(s, rho, a, b, dom) {
        Truth::Yes => Some(true),
        Truth::No => Some(false),
        Truth::Unknown => {
            r.fail(format!("undecided: ({a}, {b}) at {s}"));
            None
        }
    }
}

fn small_domain() -> DomainSpec {
    DomainSpec { ints: vec![0, 1, 2], strings: vec!["a".into(), "aa".into(), String::new()], ..DomainSpec::default() }
}

fn int_relations(dom: &DomainSpec) -> Vec<RelEnv> {
    let delta: TyVarEnv = [("X".to_string(), Type::int())].into_iter().collect();
    enum_rel_envs(&delta, dom, &Mode::Exhaustive).map(|s| s.collect()).unwrap_or_default()
}

/// The public relation is symmetric and transitive on enumerated values.
pub fn per_law() -> Report {
    let mut r = Report::new("public relation is a PER");
    let dom = small_domain();
    let rho = RelEnv::new();
    for t in [
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
    ] {
        let ty = parse_safety_type(t).expect("fixed type");
        let s = SecType::public(ty.clone());
        let (vs, complete) = values_of(&ty, &dom);
        if !complete {
            r.fail(format!("values of {t} are not exhaustive"));
        }
        let mut rel = vec![vec![false; vs.len()]; vs.len()];
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                rel[i][j] = decide(&mut r, &s, &rho, a, b, &dom).unwrap_or(false);
            }
        }
        for i in 0..vs.len() {
            for j in 0..vs.len() {
                r.checked += 1;
                if rel[i][j] != rel[j][i] {
                    r.fail(format!("not symmetric at {t}: {} {}", vs[i], vs[j]));
                }
                if rel[i][j] {
                    if let Some(k) = (0..vs.len()).find(|&k| rel[j][k] && !rel[i][k]) {
                        r.fail(format!("not transitive at {t}: {} {} {}", vs[i], vs[j], vs[k]));
                    }
                }
            }
        }
    }
    r
}

/// Related at a subtype implies related at the supertype, for each
/// subtyping rule.
pub fn subtyping_soundness() -> Report {
    let mut r = Report::new("subtyping soundness");
    let mut dom = small_domain();
    dom.ints = vec![0, 1];
    let rules = [
        ("Int!X", "Int!X"),
        ("pub Int", "pub Int"),
        ("pub (pub Int * Int!X)", "pub (pub Int * Int!X)"),
        ("pub Int", "priv Int"),
        ("Int!X", "priv Int"),
        ("pub (Int!X * pub Bool)", "priv (Int!X * pub Bool)"),
        ("pub (pub Int -> Int!X)", "priv (pub Int -> Int!X)"),
        ("pub Int", "Int!X"),
        ("pub Bool", "priv Bool"),
    ];
    for rho in int_relations(&dom) {
        for (a, b) in rules {
            let (s1, s2) = (parse_sec_type(a).expect("fixed type"), parse_sec_type(b).expect("fixed type"));
            if !subtype(&s1, &s2) {
                r.fail(format!("{a} is not a subtype of {b}"));
                continue;
            }
            let (vs, _) = values_of(&rho.apply(Side::Left, &s1.safety), &dom);
            for v1 in &vs {
                for v2 in &vs {
                    r.checked += 1;
                    if decide(&mut r, &s1, &rho, v1, v2, &dom) == Some(true)
                        && decide(&mut r, &s2, &rho, v1, v2, &dom) == Some(false)
                    {
                        r.fail(format!("({v1}, {v2}) related at {a} but not at {b} under {rho}"));
                    }
                }
            }
        }
    }
    r
}

/// `Int!X` relates exactly the pairs of `ρ(X)` plus the publicly equal pairs.
pub fn union_clause() -> Report {
    let mut r = Report::new("union clause");
    let dom = small_domain();
    let abs = parse_sec_type("Int!X").expect("fixed type");
    let public = parse_sec_type("pub Int").expect("fixed type");
    let ints = dom.carrier(crate::syntax::Prim::Int);
    for rho in int_relations(&dom) {
        let Some(entry) = rho.get("X") else { continue };
        for a in &ints {
            for b in &ints {
                r.checked += 1;
                let union = entry.contains(a, b) || decide(&mut r, &public, &rho, a, b, &dom) == Some(true);
                if decide(&mut r, &abs, &rho, a, b, &dom) != Some(union) {
                    r.fail(format!("({a}, {b}) under {rho}"));
                }
            }
        }
    }
    r
}

/// Every suite, in a fixed order.
pub fn run_all(seed: u64) -> Vec<Report> {
    vec![
        type_safety(seed, 1000),
        determinism(seed, 1000),
        self_relatedness(seed, 100),
        per_law(),
        subtyping_soundness(),
        union_clause(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_runs() {
        for r in [type_safety(1, 50), determinism(1, 50), self_relatedness(1, 10), union_clause()] {
            assert!(r.passed(), "{r}");
            assert!(r.checked > 0);
        }
    }
}
