//! Environment-based big-step evaluator used as an oracle for the
//! substitution-based small-step machine.

#![allow(dead_code)]

use std::rc::Rc;

use fsec_core::{BinOp, Literal, Term, TermKind, UnOp, Value};

#[derive(Clone, Debug)]
pub enum OVal {
    Lit(Literal),
    Unit,
    Pair(Box<OVal>, Box<OVal>),
    Inl(Box<OVal>),
    Inr(Box<OVal>),
    Pack(Box<OVal>),
    Fun { param: String, body: Term, env: Env },
}

#[derive(Clone, Debug, Default)]
pub struct Env(Option<Rc<(String, OVal, Env)>>);

impl Env {
    fn bind(&self, x: &str, v: OVal) -> Env {
        Env(Some(Rc::new((x.to_string(), v, self.clone()))))
    }

    fn lookup(&self, x: &str) -> Option<&OVal> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.0 == x {
                return Some(&node.1);
            }
            cur = &node.2;
        }
        None
    }
}

#[derive(Debug, PartialEq)]
pub enum OErr {
    Wrong(&'static str),
    Partial,
    OutOfFuel,
}

pub fn op(o: BinOp, a: &Literal, b: &Literal) -> Result<Literal, OErr> {
    use Literal::*;
    Ok(match (o, a, b) {
        (BinOp::Add, Int(x), Int(y)) => Int(x.wrapping_add(*y)),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.wrapping_sub(*y)),
        (BinOp::Mul, Int(x), Int(y)) => Int(x.wrapping_mul(*y)),
        (BinOp::Mod, Int(x), Int(y)) => Int(x.checked_rem_euclid(*y).ok_or(OErr::Partial)?),
        (BinOp::Le, Int(x), Int(y)) => Bool(x <= y),
        (BinOp::Eq, Int(x), Int(y)) => Bool(x == y),
        (BinOp::Eq, Bool(x), Bool(y)) => Bool(x == y),
        (BinOp::Eq, Str(x), Str(y)) => Bool(x == y),
        (BinOp::Concat, Str(x), Str(y)) => Str(format!("{x}{y}")),
        _ => return Err(OErr::Wrong("operands")),
    })
}

pub fn run(e: &Term, env: &Env, fuel: &mut u64) -> Result<OVal, OErr> {
    if *fuel == 0 {
        return Err(OErr::OutOfFuel);
    }
    *fuel -= 1;
    match &e.kind {
        TermKind::Var(x) => env.lookup(x).cloned().ok_or(OErr::Wrong("unbound")),
        TermKind::Lit(l) => Ok(OVal::Lit(l.clone())),
        TermKind::Unit => Ok(OVal::Unit),
        TermKind::Lam(x, _, body) => Ok(OVal::Fun { param: x.clone(), body: (**body).clone(), env: env.clone() }),
        TermKind::App(f, a) => {
            let fv = run(f, env, fuel)?;
            let av = run(a, env, fuel)?;
            match fv {
                OVal::Fun { param, body, env: cenv } => run(&body, &cenv.bind(&param, av), fuel),
                _ => Err(OErr::Wrong("not a function")),
            }
        }
        TermKind::BinOp(o, a, b) => match (run(a, env, fuel)?, run(b, env, fuel)?) {
            (OVal::Lit(x), OVal::Lit(y)) => op(*o, &x, &y).map(OVal::Lit),
            _ => Err(OErr::Wrong("operands")),
        },
        TermKind::UnOp(UnOp::Length, a) => match run(a, env, fuel)? {
            OVal::Lit(Literal::Str(s)) => Ok(OVal::Lit(Literal::Int(s.chars().count() as i64))),
            _ => Err(OErr::Wrong("length")),
        },
        TermKind::Pair(a, b) => Ok(OVal::Pair(Box::new(run(a, env, fuel)?), Box::new(run(b, env, fuel)?))),
        TermKind::Fst(a) => match run(a, env, fuel)? {
            OVal::Pair(x, _) => Ok(*x),
            _ => Err(OErr::Wrong("fst")),
        },
        TermKind::Snd(a) => match run(a, env, fuel)? {
            OVal::Pair(_, y) => Ok(*y),
            _ => Err(OErr::Wrong("snd")),
        },
        TermKind::Inl(a, _) => Ok(OVal::Inl(Box::new(run(a, env, fuel)?))),
        TermKind::Inr(a, _) => Ok(OVal::Inr(Box::new(run(a, env, fuel)?))),
        TermKind::Case { scrutinee, left_var, left, right_var, right } => match run(scrutinee, env, fuel)? {
            OVal::Inl(v) => run(left, &env.bind(left_var, *v), fuel),
            OVal::Inr(v) => run(right, &env.bind(right_var, *v), fuel),
            _ => Err(OErr::Wrong("case")),
        },
        TermKind::Pack { payload, .. } => Ok(OVal::Pack(Box::new(run(payload, env, fuel)?))),
        TermKind::Open { var, package, body, .. } => match run(package, env, fuel)? {
            OVal::Pack(v) => run(body, &env.bind(var, *v), fuel),
            _ => Err(OErr::Wrong("open")),
        },
        TermKind::Table(_) => Err(OErr::Wrong("tables are not supported")),
    }
}

pub fn eval(e: &Term) -> Result<OVal, OErr> {
    run(e, &Env::default(), &mut 1_000_000)
}

/// First-order shape of an oracle value; functions are opaque.
pub fn shape(v: &OVal) -> String {
    match v {
        OVal::Lit(l) => format!("{l:?}"),
        OVal::Unit => "unit".into(),
        OVal::Pair(a, b) => format!("({}, {})", shape(a), shape(b)),
        OVal::Inl(a) => format!("inl {}", shape(a)),
        OVal::Inr(a) => format!("inr {}", shape(a)),
        OVal::Pack(a) => format!("pack {}", shape(a)),
        OVal::Fun { .. } => "<fun>".into(),
    }
}

/// Same projection for values of the small-step machine.
pub fn value_shape(v: &Value) -> String {
    match v {
        Value::Prim(l) => format!("{l:?}"),
        Value::Unit => "unit".into(),
        Value::Pair(a, b) => format!("({}, {})", value_shape(a), value_shape(b)),
        Value::Inl(a, _) => format!("inl {}", value_shape(a)),
        Value::Inr(a, _) => format!("inr {}", value_shape(a)),
        Value::Pack { payload, .. } => format!("pack {}", value_shape(payload)),
        Value::Closure { .. } | Value::Table(_) => "<fun>".into(),
    }
}
