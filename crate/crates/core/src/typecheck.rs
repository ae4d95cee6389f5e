//! Security type checking and the erased simple type system.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{
    check_wf, check_wf_safety, erase, erase_safety, rep_type, BinOp, Name, Prim, SecType, Simple, Span, Term, TermKind,
    TyVarEnv, Type, TypeEnv, UnOp,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeErrorKind {
    Mismatch,
    Unbound,
    IllFormed,
    Escape,
    NotAFunction,
    NotAPackage,
    Precision,
}

impl TypeErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            TypeErrorKind::Mismatch => "mismatch",
            TypeErrorKind::Unbound => "unbound",
            TypeErrorKind::IllFormed => "ill-formed",
            TypeErrorKind::Escape => "escape",
            TypeErrorKind::NotAFunction => "not-a-function",
            TypeErrorKind::NotAPackage => "not-a-package",
            TypeErrorKind::Precision => "precision",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub span: Span,
    pub message: String,
    pub expected: Option<String>,
    pub found: Option<String>,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} error: {}", self.span, self.kind.name(), self.message)?;
        if let Some(e) = &self.expected {
            write!(f, "\n  expected: {e}")?;
        }
        if let Some(found) = &self.found {
            write!(f, "\n  found:    {found}")?;
        }
        Ok(())
    }
}

fn err(kind: TypeErrorKind, span: Span, message: impl Into<String>) -> TypeError {
    TypeError { kind, span, message: message.into(), expected: None, found: None }
}

fn mismatch(span: Span, message: impl Into<String>, expected: impl ToString, found: impl ToString) -> TypeError {
    TypeError {
        kind: TypeErrorKind::Mismatch,
        span,
        message: message.into(),
        expected: Some(expected.to_string()),
        found: Some(found.to_string()),
    }
}

/// The three subtyping rules: reflexivity, `T!U <: T!Top`, and
/// `pub T <: T!X`.
pub fn subtype(s1: &SecType, s2: &SecType) -> bool {
    if s1 == s2 {
        return true;
    }
    if s1.safety != s2.safety {
        return false;
    }
    match &s2.declass {
        Type::Top => true,
        Type::Var(_) => s1.is_public(),
        _ => false,
    }
}

/// `t1 ⊑ t2`: equal, or `t2` is a type variable.
pub fn precise(t1: &Type, t2: &Type) -> bool {
    t1 == t2 || t2.is_var()
}

/// Eliminating a non-public value makes the result private.
pub fn stamp(result: &SecType, source: &SecType) -> SecType {
    if source.is_public() {
        result.clone()
    } else {
        SecType::private(result.safety.clone())
    }
}

/// Least upper bound under subtyping, if any.
pub fn join(s1: &SecType, s2: &SecType) -> Option<SecType> {
    if subtype(s1, s2) {
        Some(s2.clone())
    } else if subtype(s2, s1) {
        Some(s1.clone())
    } else if s1.safety == s2.safety {
        Some(SecType::private(s1.safety.clone()))
    } else {
        None
    }
}

/// Operand and result primitives of a binary operator. `None` for `==`,
/// whose operands may be any primitive.
pub fn binop_signature(op: BinOp) -> (Option<(Prim, Prim)>, Prim) {
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Mod => (Some((Prim::Int, Prim::Int)), Prim::Int),
        BinOp::Le => (Some((Prim::Int, Prim::Int)), Prim::Bool),
        BinOp::Eq => (None, Prim::Bool),
        BinOp::Concat => (Some((Prim::String, Prim::String)), Prim::String),
    }
}

pub fn unop_signature(op: UnOp) -> (Prim, Prim) {
    match op {
        UnOp::Length => (Prim::String, Prim::Int),
    }
}

fn wf(delta: &TyVarEnv, s: &SecType, span: Span) -> Result<(), TypeError> {
    check_wf(delta, s).map_err(|e| err(TypeErrorKind::IllFormed, span, format!("ill-formed type `{s}`: {e}")))
}

fn wf_safety(delta: &TyVarEnv, t: &Type, span: Span) -> Result<(), TypeError> {
    check_wf_safety(delta, t).map_err(|e| err(TypeErrorKind::IllFormed, span, format!("ill-formed type `{t}`: {e}")))
}

/// The minimal security type of `e`, with subsumption applied at function
/// arguments, package payloads, injections, table entries and case joins.
pub fn type_of(delta: &TyVarEnv, gamma: &TypeEnv, e: &Term) -> Result<SecType, TypeError> {
    let span = e.span;
    match &e.kind {
        TermKind::Var(x) => {
            gamma.lookup(x).cloned().ok_or_else(|| err(TypeErrorKind::Unbound, span, format!("unbound variable `{x}`")))
        }
        TermKind::Lit(l) => Ok(SecType::public(Type::Prim(l.prim()))),
        TermKind::Unit => Ok(SecType::public(Type::Unit)),
        TermKind::Lam(x, s, body) => {
            wf(delta, s, span)?;
            let res = type_of(delta, &gamma.with(x, s.clone()), body)?;
            Ok(SecType::public(Type::fun(s.clone(), res)))
        }
        TermKind::App(f, a) => {
            let sf = type_of(delta, gamma, f)?;
            let Type::Fun(dom, cod) = &sf.safety else {
                return Err(TypeError {
                    kind: TypeErrorKind::NotAFunction,
                    span: f.span,
                    message: "applied term is not a function".into(),
                    expected: Some("a function type".into()),
                    found: Some(sf.to_string()),
                });
            };
            let sa = type_of(delta, gamma, a)?;
            if !subtype(&sa, dom) {
                return Err(mismatch(a.span, "argument type does not match the function's domain", dom, &sa));
            }
            Ok(stamp(cod, &sf))
        }
        TermKind::BinOp(op, a, b) => {
            let sa = type_of(delta, gamma, a)?;
            let sb = type_of(delta, gamma, b)?;
            let (operands, result) = binop_signature(*op);
            match operands {
                Some((pa, pb)) => {
                    if sa.safety != Type::Prim(pa) {
                        return Err(mismatch(a.span, format!("bad left operand for `{}`", op.symbol()), pa, &sa));
                    }
                    if sb.safety != Type::Prim(pb) {
                        return Err(mismatch(b.span, format!("bad right operand for `{}`", op.symbol()), pb, &sb));
                    }
                }
                None => {
                    let Type::Prim(p) = sa.safety else {
                        return Err(mismatch(a.span, "`==` compares primitive values", "a primitive type", &sa));
                    };
                    if sb.safety != Type::Prim(p) {
                        return Err(mismatch(b.span, "operands of `==` differ in type", p, &sb));
                    }
                }
            }
            Ok(stamp(&stamp(&SecType::public(Type::Prim(result)), &sa), &sb))
        }
        TermKind::UnOp(op, a) => {
            let sa = type_of(delta, gamma, a)?;
            let (arg, result) = unop_signature(*op);
            if sa.safety != Type::Prim(arg) {
                return Err(mismatch(a.span, format!("bad operand for `{}`", op.symbol()), arg, &sa));
            }
            Ok(stamp(&SecType::public(Type::Prim(result)), &sa))
        }
        TermKind::Pair(a, b) => {
            let sa = type_of(delta, gamma, a)?;
            let sb = type_of(delta, gamma, b)?;
            Ok(SecType::public(Type::pair(sa, sb)))
        }
        TermKind::Fst(a) | TermKind::Snd(a) => {
            let sa = type_of(delta, gamma, a)?;
            let Type::Pair(l, r) = &sa.safety else {
                return Err(mismatch(a.span, "projection from a non-pair", "a pair type", &sa));
            };
            let part = if matches!(e.kind, TermKind::Fst(_)) { l } else { r };
            Ok(stamp(part, &sa))
        }
        TermKind::Inl(a, s) | TermKind::Inr(a, s) => {
            wf(delta, s, span)?;
            let Type::Sum(l, r) = &s.safety else {
                return Err(mismatch(span, "injection annotation must be a sum type", "a sum type", s));
            };
            let want = if matches!(e.kind, TermKind::Inl(..)) { l } else { r };
            let sa = type_of(delta, gamma, a)?;
            if !subtype(&sa, want) {
                return Err(mismatch(a.span, "injected value does not match the sum component", want, &sa));
            }
            Ok(SecType::public(s.safety.clone()))
        }
        TermKind::Case { scrutinee, left_var, left, right_var, right } => {
            let ss = type_of(delta, gamma, scrutinee)?;
            let Type::Sum(l, r) = &ss.safety else {
                return Err(mismatch(scrutinee.span, "case analysis of a non-sum", "a sum type", &ss));
            };
            let sl = type_of(delta, &gamma.with(left_var, (**l).clone()), left)?;
            let sr = type_of(delta, &gamma.with(right_var, (**r).clone()), right)?;
            let joined = join(&sl, &sr)
                .ok_or_else(|| mismatch(right.span, "case branches have incompatible types", &sl, &sr))?;
            Ok(stamp(&joined, &ss))
        }
        TermKind::Pack { witness, payload, annot } => {
            wf_safety(delta, witness, span)?;
            wf_safety(delta, annot, span)?;
            let Type::Exists(x, body) = annot else {
                return Err(mismatch(span, "package annotation must be existential", "an existential type", annot));
            };
            let rep = rep_type(annot).map_err(|e| err(TypeErrorKind::IllFormed, span, e.to_string()))?;
            if !precise(witness, &rep) {
                return Err(TypeError {
                    kind: TypeErrorKind::Precision,
                    span,
                    message: format!("`{witness}` cannot represent `{x}`"),
                    expected: Some(rep.to_string()),
                    found: Some(witness.to_string()),
                });
            }
            let want = SecType::public(body.subst(x, witness));
            let sp = type_of(delta, gamma, payload)?;
            if !subtype(&sp, &want) {
                return Err(mismatch(payload.span, "package payload does not match the existential body", &want, &sp));
            }
            Ok(SecType::public(annot.clone()))
        }
        TermKind::Open { tyvar, var, package, body } => {
            let sp = type_of(delta, gamma, package)?;
            let Type::Exists(y, inner) = &sp.safety else {
                return Err(TypeError {
                    kind: TypeErrorKind::NotAPackage,
                    span: package.span,
                    message: "opened term is not a package".into(),
                    expected: Some("an existential type".into()),
                    found: Some(sp.to_string()),
                });
            };
            if delta.contains(tyvar) {
                return Err(err(
                    TypeErrorKind::IllFormed,
                    span,
                    format!("type variable `{tyvar}` is already in scope"),
                ));
            }
            let inner = inner.subst(y, &Type::Var(tyvar.clone()));
            let renamed = Type::Exists(tyvar.clone(), Box::new(inner.clone()));
            let rep = rep_type(&renamed).map_err(|e| err(TypeErrorKind::IllFormed, span, e.to_string()))?;
            let delta2 = delta.with(tyvar, rep);
            let sb = type_of(&delta2, &gamma.with(var, SecType::public(inner)), body)?;
            if sb.mentions(tyvar) {
                return Err(TypeError {
                    kind: TypeErrorKind::Escape,
                    span: body.span,
                    message: format!("type variable `{tyvar}` escapes its scope"),
                    expected: Some(format!("a type not mentioning `{tyvar}`")),
                    found: Some(sb.to_string()),
                });
            }
            Ok(stamp(&sb, &sp))
        }
        TermKind::Table(t) => {
            wf(delta, &t.domain, span)?;
            wf(delta, &t.codomain, span)?;
            for (k, v) in &t.entries {
                let sk = type_of(delta, gamma, k)?;
                if !subtype(&sk, &t.domain) {
                    return Err(mismatch(k.span, "table key does not match the domain", &t.domain, &sk));
                }
                let sv = type_of(delta, gamma, v)?;
                if !subtype(&sv, &t.codomain) {
                    return Err(mismatch(v.span, "table entry does not match the codomain", &t.codomain, &sv));
                }
            }
            Ok(SecType::public(Type::fun(t.domain.clone(), t.codomain.clone())))
        }
    }
}

pub type SimpleEnv = BTreeMap<Name, Simple>;

fn simple_wf(tyvars: &BTreeSet<Name>, t: &Simple, span: Span) -> Result<(), TypeError> {
    if t.contains_top() {
        return Err(err(TypeErrorKind::IllFormed, span, format!("`Top` in safety position in `{t}`")));
    }
    match t.free_vars().into_iter().find(|v| !tyvars.contains(v)) {
        Some(v) => Err(err(TypeErrorKind::Unbound, span, format!("unbound type variable `{v}`"))),
        None => Ok(()),
    }
}

fn simple_mismatch(span: Span, message: &str, expected: impl ToString, found: &Simple) -> TypeError {
    mismatch(span, message, expected, found)
}

/// Standard typing of `e` with every declassification facet erased.
pub fn simple_type_of(tyvars: &BTreeSet<Name>, gamma: &SimpleEnv, e: &Term) -> Result<Simple, TypeError> {
    let span = e.span;
    let go = |g: &SimpleEnv, t: &Term| simple_type_of(tyvars, g, t);
    match &e.kind {
        TermKind::Var(x) => {
            gamma.get(x).cloned().ok_or_else(|| err(TypeErrorKind::Unbound, span, format!("unbound variable `{x}`")))
        }
        TermKind::Lit(l) => Ok(Simple::Prim(l.prim())),
        TermKind::Unit => Ok(Simple::Unit),
        TermKind::Lam(x, s, body) => {
            let dom = erase(s);
            simple_wf(tyvars, &dom, span)?;
            let mut g = gamma.clone();
            g.insert(x.clone(), dom.clone());
            let cod = go(&g, body)?;
            Ok(Simple::Fun(Box::new(dom), Box::new(cod)))
        }
        TermKind::App(f, a) => {
            let tf = go(gamma, f)?;
            let Simple::Fun(dom, cod) = tf else {
                return Err(TypeError {
                    kind: TypeErrorKind::NotAFunction,
                    span: f.span,
                    message: "applied term is not a function".into(),
                    expected: Some("a function type".into()),
                    found: Some(tf.to_string()),
                });
            };
            let ta = go(gamma, a)?;
            if ta != *dom {
                return Err(simple_mismatch(a.span, "argument type does not match the function's domain", &dom, &ta));
            }
            Ok(*cod)
        }
        TermKind::BinOp(op, a, b) => {
            let ta = go(gamma, a)?;
            let tb = go(gamma, b)?;
            let (operands, result) = binop_signature(*op);
            match operands {
                Some((pa, pb)) => {
                    if ta != Simple::Prim(pa) {
                        return Err(simple_mismatch(a.span, "bad left operand", pa, &ta));
                    }
                    if tb != Simple::Prim(pb) {
                        return Err(simple_mismatch(b.span, "bad right operand", pb, &tb));
                    }
                }
                None => {
                    if !matches!(ta, Simple::Prim(_)) || ta != tb {
                        return Err(simple_mismatch(b.span, "`==` compares primitives of one type", &ta, &tb));
                    }
                }
            }
            Ok(Simple::Prim(result))
        }
        TermKind::UnOp(op, a) => {
            let ta = go(gamma, a)?;
            let (arg, result) = unop_signature(*op);
            if ta != Simple::Prim(arg) {
                return Err(simple_mismatch(a.span, "bad operand", arg, &ta));
            }
            Ok(Simple::Prim(result))
        }
        TermKind::Pair(a, b) => Ok(Simple::Pair(Box::new(go(gamma, a)?), Box::new(go(gamma, b)?))),
        TermKind::Fst(a) | TermKind::Snd(a) => match go(gamma, a)? {
            Simple::Pair(l, r) => Ok(if matches!(e.kind, TermKind::Fst(_)) { *l } else { *r }),
            other => Err(simple_mismatch(a.span, "projection from a non-pair", "a pair type", &other)),
        },
        TermKind::Inl(a, s) | TermKind::Inr(a, s) => {
            let ts = erase(s);
            simple_wf(tyvars, &ts, span)?;
            let Simple::Sum(l, r) = &ts else {
                return Err(simple_mismatch(span, "injection annotation must be a sum type", "a sum type", &ts));
            };
            let want = if matches!(e.kind, TermKind::Inl(..)) { l } else { r };
            let ta = go(gamma, a)?;
            if ta != **want {
                return Err(simple_mismatch(a.span, "injected value does not match the sum component", want, &ta));
            }
            Ok(ts)
        }
        TermKind::Case { scrutinee, left_var, left, right_var, right } => {
            let ts = go(gamma, scrutinee)?;
            let Simple::Sum(l, r) = ts else {
                return Err(simple_mismatch(scrutinee.span, "case analysis of a non-sum", "a sum type", &ts));
            };
            let mut gl = gamma.clone();
            gl.insert(left_var.clone(), *l);
            let mut gr = gamma.clone();
            gr.insert(right_var.clone(), *r);
            let tl = go(&gl, left)?;
            let tr = go(&gr, right)?;
            if tl != tr {
                return Err(simple_mismatch(right.span, "case branches differ in type", &tl, &tr));
            }
            Ok(tl)
        }
        TermKind::Pack { witness, payload, annot } => {
            let w = erase_safety(witness);
            let a = erase_safety(annot);
            simple_wf(tyvars, &w, span)?;
            simple_wf(tyvars, &a, span)?;
            let Simple::Exists(x, body) = &a else {
                return Err(simple_mismatch(span, "package annotation must be existential", "an existential type", &a));
            };
            let want = body.subst(x, &w);
            let tp = go(gamma, payload)?;
            if tp != want {
                return Err(simple_mismatch(payload.span, "package payload does not match", &want, &tp));
            }
            Ok(a)
        }
        TermKind::Open { tyvar, var, package, body } => {
            let tp = go(gamma, package)?;
            let Simple::Exists(y, inner) = &tp else {
                return Err(TypeError {
                    kind: TypeErrorKind::NotAPackage,
                    span: package.span,
                    message: "opened term is not a package".into(),
                    expected: Some("an existential type".into()),
                    found: Some(tp.to_string()),
                });
            };
            if tyvars.contains(tyvar) {
                return Err(err(
                    TypeErrorKind::IllFormed,
                    span,
                    format!("type variable `{tyvar}` is already in scope"),
                ));
            }
            let mut tv = tyvars.clone();
            tv.insert(tyvar.clone());
            let mut g = gamma.clone();
            g.insert(var.clone(), inner.subst(y, &Simple::Var(tyvar.clone())));
            let tb = simple_type_of(&tv, &g, body)?;
            if tb.mentions(tyvar) {
                return Err(err(
                    TypeErrorKind::Escape,
                    body.span,
                    format!("type variable `{tyvar}` escapes its scope"),
                ));
            }
            Ok(tb)
        }
        TermKind::Table(t) => {
            let dom = erase(&t.domain);
            let cod = erase(&t.codomain);
            simple_wf(tyvars, &dom, span)?;
            simple_wf(tyvars, &cod, span)?;
            for (k, v) in &t.entries {
                let tk = go(gamma, k)?;
                if tk != dom {
                    return Err(simple_mismatch(k.span, "table key does not match the domain", &dom, &tk));
                }
                let tv = go(gamma, v)?;
                if tv != cod {
                    return Err(simple_mismatch(v.span, "table entry does not match the codomain", &cod, &tv));
                }
            }
            Ok(Simple::Fun(Box::new(dom), Box::new(cod)))
        }
    }
}

/// Erases a security type environment.
pub fn erase_env(gamma: &TypeEnv) -> SimpleEnv {
    gamma.iter().map(|(x, s)| (x.clone(), erase(s))).collect()
}
