//! Call-by-value small-step evaluation.

use std::fmt;

use thiserror::Error;

use crate::syntax::{BinOp, FnTable, Literal, Name, SecType, Term, TermKind, Type, UnOp};

/// Closed values.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Closure { param: Name, annot: SecType, body: Term },
    Prim(Literal),
    Unit,
    Pair(Box<Value>, Box<Value>),
    Inl(Box<Value>, SecType),
    Inr(Box<Value>, SecType),
    Pack { witness: Type, payload: Box<Value>, annot: Type },
    Table(FnTable),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Prim(Literal::Int(n))
    }

    pub fn bool(b: bool) -> Value {
        Value::Prim(Literal::Bool(b))
    }

    pub fn str(s: &str) -> Value {
        Value::Prim(Literal::Str(s.to_string()))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    /// `None` unless `t` matches the value grammar.
    pub fn from_term(t: &Term) -> Option<Value> {
        Some(match &t.kind {
            TermKind::Lam(x, s, body) => Value::Closure { param: x.clone(), annot: s.clone(), body: (**body).clone() },
            TermKind::Lit(l) => Value::Prim(l.clone()),
            TermKind::Unit => Value::Unit,
            TermKind::Pair(a, b) => Value::pair(Value::from_term(a)?, Value::from_term(b)?),
            TermKind::Inl(a, s) => Value::Inl(Box::new(Value::from_term(a)?), s.clone()),
            TermKind::Inr(a, s) => Value::Inr(Box::new(Value::from_term(a)?), s.clone()),
            TermKind::Pack { witness, payload, annot } => Value::Pack {
                witness: witness.clone(),
                payload: Box::new(Value::from_term(payload)?),
                annot: annot.clone(),
            },
            TermKind::Table(t) => Value::Table(t.clone()),
            _ => return None,
        })
    }

    pub fn to_term(&self) -> Term {
        match self {
            Value::Closure { param, annot, body } => Term::lam(param, annot.clone(), body.clone()),
            Value::Prim(l) => TermKind::Lit(l.clone()).into(),
            Value::Unit => Term::unit(),
            Value::Pair(a, b) => Term::pair(a.to_term(), b.to_term()),
            Value::Inl(a, s) => Term::inl(a.to_term(), s.clone()),
            Value::Inr(a, s) => Term::inr(a.to_term(), s.clone()),
            Value::Pack { witness, payload, annot } => Term::pack(witness.clone(), payload.to_term(), annot.clone()),
            Value::Table(t) => TermKind::Table(t.clone()).into(),
        }
    }

    /// Equality that ignores injection and package annotations and treats
    /// closures up to renaming.
    pub fn matches(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Prim(a), Value::Prim(b)) => a == b,
            (Value::Unit, Value::Unit) => true,
            (Value::Pair(a1, b1), Value::Pair(a2, b2)) => a1.matches(a2) && b1.matches(b2),
            (Value::Inl(a, _), Value::Inl(b, _)) | (Value::Inr(a, _), Value::Inr(b, _)) => a.matches(b),
            (Value::Pack { witness: w1, payload: p1, .. }, Value::Pack { witness: w2, payload: p2, .. }) => {
                w1 == w2 && p1.matches(p2)
            }
            (Value::Closure { .. }, Value::Closure { .. }) => self.to_term().alpha_eq(&other.to_term()),
            (Value::Table(t1), Value::Table(t2)) => {
                t1.entries.len() == t2.entries.len()
                    && t1
                        .entries
                        .iter()
                        .zip(&t2.entries)
                        .all(|((k1, v1), (k2, v2))| term_matches(k1, k2) && term_matches(v1, v2))
            }
            _ => false,
        }
    }
}

fn term_matches(a: &Term, b: &Term) -> bool {
    match (Value::from_term(a), Value::from_term(b)) {
        (Some(x), Some(y)) => x.matches(&y),
        _ => a.alpha_eq(b),
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::pretty::term(&self.to_term()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StuckReason {
    NotAFunction,
    NotAPair,
    NotASum,
    NotAPackage,
    BadOperands,
    /// `%` by zero or overflowing remainder.
    PartialOperation,
    FreeVariable,
    /// A function table applied outside its graph.
    MissingTableEntry,
}

impl StuckReason {
    /// Stuck states that come from finite inputs rather than ill-typed code.
    pub fn is_partiality(self) -> bool {
        matches!(self, StuckReason::PartialOperation | StuckReason::MissingTableEntry)
    }
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StuckReason::NotAFunction => "application of a non-function",
            StuckReason::NotAPair => "projection from a non-pair",
            StuckReason::NotASum => "case analysis of a non-sum",
            StuckReason::NotAPackage => "open of a non-package",
            StuckReason::BadOperands => "operator applied to operands of the wrong type",
            StuckReason::PartialOperation => "remainder by zero or overflow",
            StuckReason::FreeVariable => "free variable",
            StuckReason::MissingTableEntry => "function table has no entry for the argument",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepResult {
    Stepped(Term),
    Done(Value),
    Stuck(Term, StuckReason),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("stuck: {reason} in `{term}`")]
    Stuck { term: Box<Term>, reason: StuckReason },
    #[error("fuel exhausted after {steps} steps")]
    FuelExhausted { steps: u64 },
}

/// Binary primitive operations.
pub fn theta(op: BinOp, a: &Literal, b: &Literal) -> Option<Literal> {
    use Literal::*;
    Some(match (op, a, b) {
        (BinOp::Add, Int(x), Int(y)) => Int(x.wrapping_add(*y)),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.wrapping_sub(*y)),
        (BinOp::Mul, Int(x), Int(y)) => Int(x.wrapping_mul(*y)),
        (BinOp::Mod, Int(x), Int(y)) => Int(x.checked_rem_euclid(*y)?),
        (BinOp::Le, Int(x), Int(y)) => Bool(x <= y),
        (BinOp::Eq, x, y) if x.prim() == y.prim() => Bool(x == y),
        (BinOp::Concat, Str(x), Str(y)) => Str(format!("{x}{y}")),
        _ => return None,
    })
}

/// Unary primitive operations.
pub fn theta_unary(op: UnOp, a: &Literal) -> Option<Literal> {
    match (op, a) {
        (UnOp::Length, Literal::Str(s)) => Some(Literal::Int(s.chars().count() as i64)),
        _ => None,
    }
}

fn binop_stuck_reason(op: BinOp, a: &Literal, b: &Literal) -> StuckReason {
    match (op, a, b) {
        (BinOp::Mod, Literal::Int(_), Literal::Int(_)) => StuckReason::PartialOperation,
        _ => StuckReason::BadOperands,
    }
}

/// One reduction step of a closed term.
pub fn step(e: &Term) -> StepResult {
    if let Some(v) = Value::from_term(e) {
        return StepResult::Done(v);
    }
    match reduce(e) {
        Ok(next) => StepResult::Stepped(next),
        Err(b) => StepResult::Stuck(b.0, b.1),
    }
}

type Reduced = Result<Term, Box<(Term, StuckReason)>>;

fn stuck(t: &Term, reason: StuckReason) -> Reduced {
    Err(Box::new((t.clone(), reason)))
}

fn lit(t: &Term) -> Option<&Literal> {
    match &t.kind {
        TermKind::Lit(l) => Some(l),
        _ => None,
    }
}

// Reduces the leftmost-innermost redex of a non-value.
fn reduce(e: &Term) -> Reduced {
    let re = |kind: TermKind| Ok(Term::new(kind, e.span));
    match &e.kind {
        TermKind::Var(_) => stuck(e, StuckReason::FreeVariable),
        TermKind::App(f, a) => {
            if !f.is_value() {
                return re(TermKind::App(Box::new(reduce(f)?), a.clone()));
            }
            if !a.is_value() {
                return re(TermKind::App(f.clone(), Box::new(reduce(a)?)));
            }
            match &f.kind {
                TermKind::Lam(x, _, body) => Ok(body.subst(x, a)),
                TermKind::Table(t) => {
                    let arg = Value::from_term(a).expect("argument is a value");
                    t.entries
                        .iter()
                        .find(|(k, _)| Value::from_term(k).is_some_and(|k| k.matches(&arg)))
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| Box::new((e.clone(), StuckReason::MissingTableEntry)))
                }
                _ => stuck(e, StuckReason::NotAFunction),
            }
        }
        TermKind::BinOp(op, a, b) => {
            if !a.is_value() {
                return re(TermKind::BinOp(*op, Box::new(reduce(a)?), b.clone()));
            }
            if !b.is_value() {
                return re(TermKind::BinOp(*op, a.clone(), Box::new(reduce(b)?)));
            }
            match (lit(a), lit(b)) {
                (Some(x), Some(y)) => match theta(*op, x, y) {
                    Some(r) => re(TermKind::Lit(r)),
                    None => stuck(e, binop_stuck_reason(*op, x, y)),
                },
                _ => stuck(e, StuckReason::BadOperands),
            }
        }
        TermKind::UnOp(op, a) => {
            if !a.is_value() {
                return re(TermKind::UnOp(*op, Box::new(reduce(a)?)));
            }
            match lit(a).and_then(|x| theta_unary(*op, x)) {
                Some(r) => re(TermKind::Lit(r)),
                None => stuck(e, StuckReason::BadOperands),
            }
        }
        TermKind::Pair(a, b) => {
            if !a.is_value() {
                return re(TermKind::Pair(Box::new(reduce(a)?), b.clone()));
            }
            re(TermKind::Pair(a.clone(), Box::new(reduce(b)?)))
        }
        TermKind::Fst(a) | TermKind::Snd(a) => {
            let first = matches!(e.kind, TermKind::Fst(_));
            if !a.is_value() {
                let inner = Box::new(reduce(a)?);
                return re(if first { TermKind::Fst(inner) } else { TermKind::Snd(inner) });
            }
            match &a.kind {
                TermKind::Pair(l, r) => Ok(if first { (**l).clone() } else { (**r).clone() }),
                _ => stuck(e, StuckReason::NotAPair),
            }
        }
        TermKind::Inl(a, s) => re(TermKind::Inl(Box::new(reduce(a)?), s.clone())),
        TermKind::Inr(a, s) => re(TermKind::Inr(Box::new(reduce(a)?), s.clone())),
        TermKind::Case { scrutinee, left_var, left, right_var, right } => {
            if !scrutinee.is_value() {
                return re(TermKind::Case {
                    scrutinee: Box::new(reduce(scrutinee)?),
                    left_var: left_var.clone(),
                    left: left.clone(),
                    right_var: right_var.clone(),
                    right: right.clone(),
                });
            }
            match &scrutinee.kind {
                TermKind::Inl(v, _) => Ok(left.subst(left_var, v)),
                TermKind::Inr(v, _) => Ok(right.subst(right_var, v)),
                _ => stuck(e, StuckReason::NotASum),
            }
        }
        TermKind::Pack { witness, payload, annot } => {
            re(TermKind::Pack { witness: witness.clone(), payload: Box::new(reduce(payload)?), annot: annot.clone() })
        }
        TermKind::Open { tyvar, var, package, body } => {
            if !package.is_value() {
                return re(TermKind::Open {
                    tyvar: tyvar.clone(),
                    var: var.clone(),
                    package: Box::new(reduce(package)?),
                    body: body.clone(),
                });
            }
            match &package.kind {
                TermKind::Pack { witness, payload, .. } => Ok(body.subst(var, payload).subst_type(tyvar, witness)),
                _ => stuck(e, StuckReason::NotAPackage),
            }
        }
        TermKind::Lam(..) | TermKind::Lit(_) | TermKind::Unit | TermKind::Table(_) => {
            unreachable!("values do not reduce")
        }
    }
}

/// Runs at most `fuel` steps.
pub fn eval(e: &Term, fuel: u64) -> Result<Value, EvalError> {
    let mut cur = e.clone();
    let mut steps = 0;
    loop {
        match step(&cur) {
            StepResult::Done(v) => return Ok(v),
            StepResult::Stuck(term, reason) => return Err(EvalError::Stuck { term: Box::new(term), reason }),
            StepResult::Stepped(next) => {
                if steps == fuel {
                    return Err(EvalError::FuelExhausted { steps });
                }
                steps += 1;
                cur = next;
            }
        }
    }
}

/// Every intermediate term of an evaluation, starting with `e`.
#[derive(Clone, Debug)]
pub struct Trace {
    pub terms: Vec<Term>,
    pub outcome: Result<Value, EvalError>,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.terms.len() - 1
    }
}

pub fn trace(e: &Term, fuel: u64) -> Trace {
    let mut terms = vec![e.clone()];
    loop {
        let cur = terms.last().expect("nonempty");
        match step(cur) {
            StepResult::Done(v) => return Trace { terms, outcome: Ok(v) },
            StepResult::Stuck(term, reason) => {
                return Trace { terms, outcome: Err(EvalError::Stuck { term: Box::new(term), reason }) }
            }
            StepResult::Stepped(next) => {
                let steps = (terms.len() - 1) as u64;
                if steps == fuel {
                    return Trace { terms, outcome: Err(EvalError::FuelExhausted { steps }) };
                }
                terms.push(next);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn run(src: &str) -> Result<Value, EvalError> {
        eval(&parse_term(src).unwrap(), 1000)
    }

    #[test]
    fn projection_steps() {
        let t = parse_term("fst (1, 2)").unwrap();
        assert_eq!(step(&t), StepResult::Stepped(Term::int(1)));
        assert!(matches!(step(&parse_term("fst 5").unwrap()), StepResult::Stuck(_, StuckReason::NotAPair)));
    }

    #[test]
    fn unpack_substitutes_term_and_type() {
        let t = parse_term("open (pack <Int, 5> as exists X. X) as <X, x> in x").unwrap();
        assert_eq!(step(&t), StepResult::Stepped(Term::int(5)));
        let t = parse_term("open (pack <Int, 5> as exists X. X) as <X, x> in (fun (y: pub X) => y) x").unwrap();
        let StepResult::Stepped(next) = step(&t) else { panic!() };
        assert_eq!(next, parse_term("(fun (y: pub Int) => y) 5").unwrap());
    }

    #[test]
    fn primitive_table() {
        assert_eq!(theta(BinOp::Mod, &Literal::Int(100001), &Literal::Int(2)), Some(Literal::Int(1)));
        assert_eq!(theta(BinOp::Mod, &Literal::Int(-3), &Literal::Int(2)), Some(Literal::Int(1)));
        assert_eq!(theta(BinOp::Mod, &Literal::Int(3), &Literal::Int(0)), None);
        assert_eq!(theta_unary(UnOp::Length, &Literal::Str("aa".into())), Some(Literal::Int(2)));
        let a = Literal::Str("a".into());
        assert_eq!(theta(BinOp::Eq, &a, &a), Some(Literal::Bool(true)));
        assert_eq!(theta(BinOp::Eq, &a, &Literal::Int(1)), None);
        assert_eq!(theta(BinOp::Add, &Literal::Int(i64::MAX), &Literal::Int(1)), Some(Literal::Int(i64::MIN)));
    }

    #[test]
    fn evaluation() {
        assert_eq!(run("(fun (x: pub Int) => x + 1) 4"), Ok(Value::int(5)));
        assert_eq!(run("(fun (y: pub Int) => 100000 <= y) 100001"), Ok(Value::bool(true)));
        assert_eq!(run("\"ab\" ++ \"c\""), Ok(Value::str("abc")));
        assert_eq!(run("case inr 2 : pub Bool + pub Int of inl b => 0 | inr n => n * 3"), Ok(Value::int(6)));
        assert!(matches!(run("5 % 0"), Err(EvalError::Stuck { reason: StuckReason::PartialOperation, .. })));
    }

    #[test]
    fn pair_payloads_are_evaluated() {
        assert_eq!(run("(1 + 1, 2 + 2)"), Ok(Value::pair(Value::int(2), Value::int(4))));
        let v = run("pack <Int, 1 + 1> as exists X. X").unwrap();
        assert!(matches!(v, Value::Pack { payload, .. } if *payload == Value::int(2)));
    }

    #[test]
    fn fuel() {
        let t = parse_term("(fun (x: pub Int) => x) ((fun (x: pub Int) => x) 1)").unwrap();
        assert_eq!(eval(&t, 1), Err(EvalError::FuelExhausted { steps: 1 }));
        assert_eq!(eval(&t, 2), Ok(Value::int(1)));
    }

    #[test]
    fn traces() {
        let tr = trace(&parse_term("fst (1, 2)").unwrap(), 10);
        assert_eq!(tr.terms, vec![parse_term("fst (1, 2)").unwrap(), Term::int(1)]);
        let tr = trace(&parse_term("(fun (x: pub Int) => x) 3").unwrap(), 10);
        assert_eq!(tr.terms.len(), 2);
        assert_eq!(tr.steps(), 1);
    }

    #[test]
    fn tables_apply_by_lookup() {
        let t = crate::parser::parse_value_term("table (pub Int -> pub Bool) { 1 => true, 2 => false } 2").unwrap();
        assert_eq!(eval(&t, 10), Ok(Value::bool(false)));
        let t = crate::parser::parse_value_term("table (pub Int -> pub Bool) { 1 => true } 3").unwrap();
        assert!(matches!(eval(&t, 10), Err(EvalError::Stuck { reason: StuckReason::MissingTableEntry, .. })));
    }
}
