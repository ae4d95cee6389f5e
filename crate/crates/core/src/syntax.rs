//! Abstract syntax for faceted security types and terms.
//!
//! A security type pairs a *safety* facet (what privileged code sees) with a
//! *declassification* facet (what the public observer may learn). Type
//! equality is structural and treats existential binders up to renaming.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type Name = String;

/// Primitive types. The set is closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Int,
    Bool,
    String,
}

impl Prim {
    pub const ALL: [Prim; 3] = [Prim::Int, Prim::Bool, Prim::String];

    pub fn name(self) -> &'static str {
        match self {
            Prim::Int => "Int",
            Prim::Bool => "Bool",
            Prim::String => "String",
        }
    }
}

impl fmt::Display for Prim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Safety types. Also used for declassification facets, where only
/// `Top`, a type variable, or a copy of the safety facet are legal.
#[derive(Clone, Debug)]
pub enum Type {
    Fun(Box<SecType>, Box<SecType>),
    Prim(Prim),
    Unit,
    Sum(Box<SecType>, Box<SecType>),
    Pair(Box<SecType>, Box<SecType>),
    Exists(Name, Box<Type>),
    Var(Name),
    Top,
}

/// A faceted type `T ! U`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecType {
    pub safety: Type,
    pub declass: Type,
}

impl SecType {
    pub fn new(safety: Type, declass: Type) -> Self {
        SecType { safety, declass }
    }

    /// `pub T`, i.e. `T ! T`.
    pub fn public(t: Type) -> Self {
        SecType { declass: t.clone(), safety: t }
    }

    /// `priv T`, i.e. `T ! Top`.
    pub fn private(t: Type) -> Self {
        SecType { safety: t, declass: Type::Top }
    }

    pub fn is_public(&self) -> bool {
        self.safety == self.declass
    }

    pub fn subst(&self, x: &str, r: &Type) -> SecType {
        let fv = r.free_vars();
        self.subst_with(x, r, &fv)
    }

    fn subst_with(&self, x: &str, r: &Type, fv: &BTreeSet<Name>) -> SecType {
        SecType { safety: self.safety.subst_with(x, r, fv), declass: self.declass.subst_with(x, r, fv) }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.safety.mentions(x) || self.declass.mentions(x)
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<Name>) {
        self.safety.collect_free(bound, out);
        self.declass.collect_free(bound, out);
    }

    fn alpha_eq_in<'a>(&'a self, other: &'a SecType, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        self.safety.alpha_eq_in(&other.safety, env) && self.declass.alpha_eq_in(&other.declass, env)
    }

    fn canon(&self, depth: usize, ren: &mut Vec<(Name, Name)>) -> SecType {
        SecType { safety: self.safety.canon(depth, ren), declass: self.declass.canon(depth, ren) }
    }
}

impl Type {
    pub fn int() -> Type {
        Type::Prim(Prim::Int)
    }

    pub fn bool() -> Type {
        Type::Prim(Prim::Bool)
    }

    pub fn string() -> Type {
        Type::Prim(Prim::String)
    }

    pub fn var(name: &str) -> Type {
        Type::Var(name.to_string())
    }

    pub fn fun(dom: SecType, cod: SecType) -> Type {
        Type::Fun(Box::new(dom), Box::new(cod))
    }

    pub fn pair(a: SecType, b: SecType) -> Type {
        Type::Pair(Box::new(a), Box::new(b))
    }

    pub fn sum(a: SecType, b: SecType) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, body: Type) -> Type {
        Type::Exists(x.to_string(), Box::new(body))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Type::Var(_))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Type::Var(y) => y == x,
            Type::Prim(_) | Type::Unit | Type::Top => false,
            Type::Fun(a, b) | Type::Sum(a, b) | Type::Pair(a, b) => a.mentions(x) || b.mentions(x),
            Type::Exists(y, body) => y != x && body.mentions(x),
        }
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<Name>) {
        match self {
            Type::Var(y) => {
                if !bound.contains(&y.as_str()) {
                    out.insert(y.clone());
                }
            }
            Type::Prim(_) | Type::Unit | Type::Top => {}
            Type::Fun(a, b) | Type::Sum(a, b) | Type::Pair(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Type::Exists(y, body) => {
                bound.push(y);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Capture-avoiding substitution of `r` for the free occurrences of `x`.
    pub fn subst(&self, x: &str, r: &Type) -> Type {
        let fv = r.free_vars();
        self.subst_with(x, r, &fv)
    }

    fn subst_with(&self, x: &str, r: &Type, fv: &BTreeSet<Name>) -> Type {
        match self {
            Type::Var(y) if y == x => r.clone(),
            Type::Var(_) | Type::Prim(_) | Type::Unit | Type::Top => self.clone(),
            Type::Fun(a, b) => Type::Fun(Box::new(a.subst_with(x, r, fv)), Box::new(b.subst_with(x, r, fv))),
            Type::Sum(a, b) => Type::Sum(Box::new(a.subst_with(x, r, fv)), Box::new(b.subst_with(x, r, fv))),
            Type::Pair(a, b) => Type::Pair(Box::new(a.subst_with(x, r, fv)), Box::new(b.subst_with(x, r, fv))),
            Type::Exists(y, body) => {
                if y == x || !body.mentions(x) {
                    self.clone()
                } else if fv.contains(y) {
                    let body_fv = body.free_vars();
                    let fresh = fresh_name(y, |n| n == x || fv.contains(n) || body_fv.contains(n));
                    let renamed = body.subst(y, &Type::Var(fresh.clone()));
                    Type::Exists(fresh, Box::new(renamed.subst_with(x, r, fv)))
                } else {
                    Type::Exists(y.clone(), Box::new(body.subst_with(x, r, fv)))
                }
            }
        }
    }

    pub(crate) fn alpha_eq_in<'a>(&'a self, other: &'a Type, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (self, other) {
            (Type::Var(a), Type::Var(b)) => {
                let ia = env.iter().rev().position(|(l, _)| *l == a);
                let ib = env.iter().rev().position(|(_, r)| *r == b);
                match (ia, ib) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => a == b,
                    _ => false,
                }
            }
            (Type::Prim(a), Type::Prim(b)) => a == b,
            (Type::Unit, Type::Unit) | (Type::Top, Type::Top) => true,
            (Type::Fun(a1, b1), Type::Fun(a2, b2))
            | (Type::Sum(a1, b1), Type::Sum(a2, b2))
            | (Type::Pair(a1, b1), Type::Pair(a2, b2)) => a1.alpha_eq_in(a2, env) && b1.alpha_eq_in(b2, env),
            (Type::Exists(x, t), Type::Exists(y, u)) => {
                env.push((x, y));
                let eq = t.alpha_eq_in(u, env);
                env.pop();
                eq
            }
            _ => false,
        }
    }

    /// Renames every binder to a depth-indexed name so that alpha-equivalent
    /// types become structurally identical.
    pub fn canonical(&self) -> Type {
        self.canon(0, &mut Vec::new())
    }

    fn canon(&self, depth: usize, ren: &mut Vec<(Name, Name)>) -> Type {
        match self {
            Type::Var(y) => match ren.iter().rev().find(|(from, _)| from == y) {
                Some((_, to)) => Type::Var(to.clone()),
                None => self.clone(),
            },
            Type::Prim(_) | Type::Unit | Type::Top => self.clone(),
            Type::Fun(a, b) => Type::Fun(Box::new(a.canon(depth, ren)), Box::new(b.canon(depth, ren))),
            Type::Sum(a, b) => Type::Sum(Box::new(a.canon(depth, ren)), Box::new(b.canon(depth, ren))),
            Type::Pair(a, b) => Type::Pair(Box::new(a.canon(depth, ren)), Box::new(b.canon(depth, ren))),
            Type::Exists(y, body) => {
                let to = format!("%{depth}");
                ren.push((y.clone(), to.clone()));
                let body = body.canon(depth + 1, ren);
                ren.pop();
                Type::Exists(to, Box::new(body))
            }
        }
    }

    /// A string that is equal for two types iff they are alpha-equivalent.
    pub fn key(&self) -> String {
        format!("{:?}", self.canonical())
    }
}

impl PartialEq for Type {
    fn eq(&self, other: &Type) -> bool {
        self.alpha_eq_in(other, &mut Vec::new())
    }
}

impl Eq for Type {}

impl Eq for SecType {}

impl SecType {
    pub fn key(&self) -> String {
        format!("{:?}", self.canon(0, &mut Vec::new()))
    }
}

/// Picks `base1`, `base2`, ... (after stripping trailing digits from `base`)
/// until `taken` rejects none.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { base } else { stem };
    (1..).map(|i| format!("{stem}{i}")).find(|n| !taken(n)).expect("unbounded name supply")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepTypeError {
    #[error("expected an existential type")]
    NotExistential,
    #[error("ambiguous representation for `{var}`: both `{first}` and `{second}` are declassified as `{var}`")]
    Ambiguous { var: Name, first: String, second: String },
}

/// The unique safety type paired with the existential's variable in
/// declassification position, or the variable itself when no concrete type
/// is paired with it.
pub fn rep_type(ety: &Type) -> Result<Type, RepTypeError> {
    let Type::Exists(x, body) = ety else {
        return Err(RepTypeError::NotExistential);
    };
    let mut found: Option<Type> = None;
    collect_reps_ty(body, x, &mut found)?;
    Ok(found.unwrap_or_else(|| Type::Var(x.clone())))
}

fn collect_reps_ty(t: &Type, x: &str, found: &mut Option<Type>) -> Result<(), RepTypeError> {
    match t {
        Type::Fun(a, b) | Type::Sum(a, b) | Type::Pair(a, b) => {
            collect_reps_sec(a, x, found)?;
            collect_reps_sec(b, x, found)
        }
        Type::Exists(y, body) if y != x => collect_reps_ty(body, x, found),
        _ => Ok(()),
    }
}

fn collect_reps_sec(s: &SecType, x: &str, found: &mut Option<Type>) -> Result<(), RepTypeError> {
    if matches!(&s.declass, Type::Var(u) if u == x) && !matches!(&s.safety, Type::Var(v) if v == x) {
        match found {
            None => *found = Some(s.safety.clone()),
            Some(prev) if *prev == s.safety => {}
            Some(prev) => {
                return Err(RepTypeError::Ambiguous {
                    var: x.to_string(),
                    first: crate::pretty::safety(prev),
                    second: crate::pretty::safety(&s.safety),
                })
            }
        }
    }
    collect_reps_ty(&s.safety, x, found)?;
    collect_reps_ty(&s.declass, x, found)
}

/// Type-variable environment: each abstract type maps to its representation
/// safety type (or to itself when unconstrained).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TyVarEnv {
    entries: Vec<(Name, Type)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type variable `{0}` is already bound")]
pub struct DuplicateBinding(pub Name);

impl TyVarEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: &str, t: Type) -> Result<(), DuplicateBinding> {
        if self.contains(x) {
            return Err(DuplicateBinding(x.to_string()));
        }
        self.entries.push((x.to_string(), t));
        Ok(())
    }

    /// Extends with a binding that may shadow an outer one.
    pub fn with(&self, x: &str, t: Type) -> TyVarEnv {
        let mut out = self.clone();
        out.entries.push((x.to_string(), t));
        out
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.entries.iter().rev().find(|(n, _)| n == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Type)> {
        self.entries.iter().map(|(n, t)| (n, t))
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(Name, Type)> for TyVarEnv {
    fn from_iter<I: IntoIterator<Item = (Name, Type)>>(iter: I) -> Self {
        TyVarEnv { entries: iter.into_iter().collect() }
    }
}

/// Variable-to-security-type environment. Later bindings shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TypeEnv {
    entries: Vec<(Name, SecType)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(&self, x: &str, s: SecType) -> TypeEnv {
        let mut out = self.clone();
        out.push(x, s);
        out
    }

    pub fn push(&mut self, x: &str, s: SecType) {
        self.entries.push((x.to_string(), s));
    }

    pub fn lookup(&self, x: &str) -> Option<&SecType> {
        self.entries.iter().rev().find(|(n, _)| n == x).map(|(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &SecType)> {
        self.entries.iter().map(|(n, s)| (n, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(Name, SecType)> for TypeEnv {
    fn from_iter<I: IntoIterator<Item = (Name, SecType)>>(iter: I) -> Self {
        TypeEnv { entries: iter.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WfError {
    #[error("unbound type variable `{0}`")]
    Unbound(Name),
    #[error("`Top` is not a valid safety type")]
    TopSafety,
    #[error("declassification facet `{declass}` does not match safety facet `{safety}`")]
    FacetMismatch { safety: String, declass: String },
    #[error("`{var}` stands for `{expected}`, so it cannot declassify `{found}`")]
    WrongRepresentation { var: Name, expected: String, found: String },
    #[error(transparent)]
    RepType(#[from] RepTypeError),
}

/// Facet-wise well-formedness of `s` under `delta`.
pub fn wf_security_type(delta: &TyVarEnv, s: &SecType) -> bool {
    check_wf(delta, s).is_ok()
}

/// Like [`wf_security_type`] but reports the first violation.
pub fn check_wf(delta: &TyVarEnv, s: &SecType) -> Result<(), WfError> {
    check_wf_safety(delta, &s.safety)?;
    match &s.declass {
        Type::Top => Ok(()),
        u if *u == s.safety => Ok(()),
        Type::Var(x) => match delta.lookup(x) {
            None => Err(WfError::Unbound(x.clone())),
            Some(rep) if *rep == s.safety => Ok(()),
            Some(rep) => Err(WfError::WrongRepresentation {
                var: x.clone(),
                expected: crate::pretty::safety(rep),
                found: crate::pretty::safety(&s.safety),
            }),
        },
        u => {
            Err(WfError::FacetMismatch { safety: crate::pretty::safety(&s.safety), declass: crate::pretty::safety(u) })
        }
    }
}

/// Well-formedness of a safety type: bound variables, no `Top`, nested
/// security types well-formed, existentials with a defined representation.
pub fn check_wf_safety(delta: &TyVarEnv, t: &Type) -> Result<(), WfError> {
    match t {
        Type::Prim(_) | Type::Unit => Ok(()),
        Type::Top => Err(WfError::TopSafety),
        Type::Var(x) => {
            if delta.contains(x) {
                Ok(())
            } else {
                Err(WfError::Unbound(x.clone()))
            }
        }
        Type::Fun(a, b) | Type::Sum(a, b) | Type::Pair(a, b) => {
            check_wf(delta, a)?;
            check_wf(delta, b)
        }
        Type::Exists(x, body) => {
            let rep = rep_type(t)?;
            check_wf_safety(&delta.with(x, rep), body)
        }
    }
}

/// Simple types: safety types with every declassification facet dropped.
#[derive(Clone, Debug)]
pub enum Simple {
    Fun(Box<Simple>, Box<Simple>),
    Prim(Prim),
    Unit,
    Sum(Box<Simple>, Box<Simple>),
    Pair(Box<Simple>, Box<Simple>),
    Exists(Name, Box<Simple>),
    Var(Name),
    /// Only produced by erasing an ill-formed type.
    Top,
}

impl Simple {
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<Name>) {
        match self {
            Simple::Var(y) => {
                if !bound.contains(&y.as_str()) {
                    out.insert(y.clone());
                }
            }
            Simple::Prim(_) | Simple::Unit | Simple::Top => {}
            Simple::Fun(a, b) | Simple::Sum(a, b) | Simple::Pair(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Simple::Exists(y, body) => {
                bound.push(y);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Simple::Var(y) => y == x,
            Simple::Prim(_) | Simple::Unit | Simple::Top => false,
            Simple::Fun(a, b) | Simple::Sum(a, b) | Simple::Pair(a, b) => a.mentions(x) || b.mentions(x),
            Simple::Exists(y, body) => y != x && body.mentions(x),
        }
    }

    pub fn subst(&self, x: &str, r: &Simple) -> Simple {
        match self {
            Simple::Var(y) if y == x => r.clone(),
            Simple::Var(_) | Simple::Prim(_) | Simple::Unit | Simple::Top => self.clone(),
            Simple::Fun(a, b) => Simple::Fun(Box::new(a.subst(x, r)), Box::new(b.subst(x, r))),
            Simple::Sum(a, b) => Simple::Sum(Box::new(a.subst(x, r)), Box::new(b.subst(x, r))),
            Simple::Pair(a, b) => Simple::Pair(Box::new(a.subst(x, r)), Box::new(b.subst(x, r))),
            Simple::Exists(y, body) => {
                if y == x || !body.mentions(x) {
                    return self.clone();
                }
                let fv = r.free_vars();
                if fv.contains(y) {
                    let body_fv = body.free_vars();
                    let fresh = fresh_name(y, |n| n == x || fv.contains(n) || body_fv.contains(n));
                    let renamed = body.subst(y, &Simple::Var(fresh.clone()));
                    Simple::Exists(fresh, Box::new(renamed.subst(x, r)))
                } else {
                    Simple::Exists(y.clone(), Box::new(body.subst(x, r)))
                }
            }
        }
    }

    fn alpha_eq_in<'a>(&'a self, other: &'a Simple, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (self, other) {
            (Simple::Var(a), Simple::Var(b)) => {
                let ia = env.iter().rev().position(|(l, _)| *l == a);
                let ib = env.iter().rev().position(|(_, r)| *r == b);
                match (ia, ib) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => a == b,
                    _ => false,
                }
            }
            (Simple::Prim(a), Simple::Prim(b)) => a == b,
            (Simple::Unit, Simple::Unit) | (Simple::Top, Simple::Top) => true,
            (Simple::Fun(a1, b1), Simple::Fun(a2, b2))
            | (Simple::Sum(a1, b1), Simple::Sum(a2, b2))
            | (Simple::Pair(a1, b1), Simple::Pair(a2, b2)) => a1.alpha_eq_in(a2, env) && b1.alpha_eq_in(b2, env),
            (Simple::Exists(x, t), Simple::Exists(y, u)) => {
                env.push((x, y));
                let eq = t.alpha_eq_in(u, env);
                env.pop();
                eq
            }
            _ => false,
        }
    }

    pub fn contains_top(&self) -> bool {
        match self {
            Simple::Top => true,
            Simple::Prim(_) | Simple::Unit | Simple::Var(_) => false,
            Simple::Fun(a, b) | Simple::Sum(a, b) | Simple::Pair(a, b) => a.contains_top() || b.contains_top(),
            Simple::Exists(_, body) => body.contains_top(),
        }
    }

    /// Rebuilds a security type with every facet public.
    pub fn to_public(&self) -> SecType {
        SecType::public(self.to_safety())
    }

    pub fn to_safety(&self) -> Type {
        match self {
            Simple::Fun(a, b) => Type::fun(a.to_public(), b.to_public()),
            Simple::Prim(p) => Type::Prim(*p),
            Simple::Unit => Type::Unit,
            Simple::Sum(a, b) => Type::sum(a.to_public(), b.to_public()),
            Simple::Pair(a, b) => Type::pair(a.to_public(), b.to_public()),
            Simple::Exists(x, body) => Type::Exists(x.clone(), Box::new(body.to_safety())),
            Simple::Var(x) => Type::Var(x.clone()),
            Simple::Top => Type::Top,
        }
    }
}

impl PartialEq for Simple {
    fn eq(&self, other: &Simple) -> bool {
        self.alpha_eq_in(other, &mut Vec::new())
    }
}

impl Eq for Simple {}

/// Drops declassification facets, keeping the safety facet at every level.
pub fn erase(s: &SecType) -> Simple {
    erase_safety(&s.safety)
}

pub fn erase_safety(t: &Type) -> Simple {
    match t {
        Type::Fun(a, b) => Simple::Fun(Box::new(erase(a)), Box::new(erase(b))),
        Type::Prim(p) => Simple::Prim(*p),
        Type::Unit => Simple::Unit,
        Type::Sum(a, b) => Simple::Sum(Box::new(erase(a)), Box::new(erase(b))),
        Type::Pair(a, b) => Simple::Pair(Box::new(erase(a)), Box::new(erase(b))),
        Type::Exists(x, body) => Simple::Exists(x.clone(), Box::new(erase_safety(body))),
        Type::Var(x) => Simple::Var(x.clone()),
        Type::Top => Simple::Top,
    }
}

/// Source position, 1-based. `0:0` marks synthesized nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Str(String),
}

impl Literal {
    pub fn prim(&self) -> Prim {
        match self {
            Literal::Int(_) => Prim::Int,
            Literal::Bool(_) => Prim::Bool,
            Literal::Str(_) => Prim::String,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Mod,
    Eq,
    Le,
    Concat,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Le => "<=",
            BinOp::Concat => "++",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Length,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Length => "length",
        }
    }
}

/// A finite function given by its graph. Never written in source programs;
/// the noninterference checker uses tables as function-typed inputs.
/// Applying a table outside its graph is stuck.
#[derive(Clone, Debug, PartialEq)]
pub struct FnTable {
    pub domain: SecType,
    pub codomain: SecType,
    pub entries: Vec<(Term, Term)>,
}

/// A term with its source position. Equality ignores positions.
#[derive(Clone, Debug)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermKind {
    Lam(Name, SecType, Box<Term>),
    App(Box<Term>, Box<Term>),
    Var(Name),
    Lit(Literal),
    BinOp(BinOp, Box<Term>, Box<Term>),
    UnOp(UnOp, Box<Term>),
    Unit,
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
    /// Injections carry the whole sum type.
    Inl(Box<Term>, SecType),
    Inr(Box<Term>, SecType),
    Case {
        scrutinee: Box<Term>,
        left_var: Name,
        left: Box<Term>,
        right_var: Name,
        right: Box<Term>,
    },
    Pack {
        witness: Type,
        payload: Box<Term>,
        /// Always an `Exists`.
        annot: Type,
    },
    Open {
        tyvar: Name,
        var: Name,
        package: Box<Term>,
        body: Box<Term>,
    },
    Table(FnTable),
}

impl From<TermKind> for Term {
    fn from(kind: TermKind) -> Term {
        Term { kind, span: Span::default() }
    }
}

impl Term {
    pub fn new(kind: TermKind, span: Span) -> Term {
        Term { kind, span }
    }

    pub fn lam(x: &str, s: SecType, body: Term) -> Term {
        TermKind::Lam(x.to_string(), s, Box::new(body)).into()
    }

    pub fn app(f: Term, a: Term) -> Term {
        TermKind::App(Box::new(f), Box::new(a)).into()
    }

    pub fn var(x: &str) -> Term {
        TermKind::Var(x.to_string()).into()
    }

    pub fn int(n: i64) -> Term {
        TermKind::Lit(Literal::Int(n)).into()
    }

    pub fn bool(b: bool) -> Term {
        TermKind::Lit(Literal::Bool(b)).into()
    }

    pub fn str(s: &str) -> Term {
        TermKind::Lit(Literal::Str(s.to_string())).into()
    }

    pub fn unit() -> Term {
        TermKind::Unit.into()
    }

    pub fn binop(op: BinOp, a: Term, b: Term) -> Term {
        TermKind::BinOp(op, Box::new(a), Box::new(b)).into()
    }

    pub fn unop(op: UnOp, a: Term) -> Term {
        TermKind::UnOp(op, Box::new(a)).into()
    }

    pub fn pair(a: Term, b: Term) -> Term {
        TermKind::Pair(Box::new(a), Box::new(b)).into()
    }

    pub fn fst(a: Term) -> Term {
        TermKind::Fst(Box::new(a)).into()
    }

    pub fn snd(a: Term) -> Term {
        TermKind::Snd(Box::new(a)).into()
    }

    pub fn inl(a: Term, s: SecType) -> Term {
        TermKind::Inl(Box::new(a), s).into()
    }

    pub fn inr(a: Term, s: SecType) -> Term {
        TermKind::Inr(Box::new(a), s).into()
    }

    pub fn case(scrutinee: Term, left_var: &str, left: Term, right_var: &str, right: Term) -> Term {
        TermKind::Case {
            scrutinee: Box::new(scrutinee),
            left_var: left_var.to_string(),
            left: Box::new(left),
            right_var: right_var.to_string(),
            right: Box::new(right),
        }
        .into()
    }

    pub fn pack(witness: Type, payload: Term, annot: Type) -> Term {
        TermKind::Pack { witness, payload: Box::new(payload), annot }.into()
    }

    pub fn open(tyvar: &str, var: &str, package: Term, body: Term) -> Term {
        TermKind::Open {
            tyvar: tyvar.to_string(),
            var: var.to_string(),
            package: Box::new(package),
            body: Box::new(body),
        }
        .into()
    }

    fn rebuild(&self, kind: TermKind) -> Term {
        Term { kind, span: self.span }
    }

    /// Matches the value grammar.
    pub fn is_value(&self) -> bool {
        match &self.kind {
            TermKind::Lam(..) | TermKind::Lit(_) | TermKind::Unit | TermKind::Table(_) => true,
            TermKind::Pair(a, b) => a.is_value() && b.is_value(),
            TermKind::Inl(a, _) | TermKind::Inr(a, _) => a.is_value(),
            TermKind::Pack { payload, .. } => payload.is_value(),
            _ => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<Name>) {
        match &self.kind {
            TermKind::Var(x) => {
                if !bound.contains(&x.as_str()) {
                    out.insert(x.clone());
                }
            }
            TermKind::Lam(x, _, body) => {
                bound.push(x);
                body.collect_free(bound, out);
                bound.pop();
            }
            TermKind::Lit(_) | TermKind::Unit => {}
            TermKind::Table(t) => {
                for (k, v) in &t.entries {
                    k.collect_free(bound, out);
                    v.collect_free(bound, out);
                }
            }
            TermKind::App(a, b) | TermKind::BinOp(_, a, b) | TermKind::Pair(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            TermKind::UnOp(_, a) | TermKind::Fst(a) | TermKind::Snd(a) | TermKind::Inl(a, _) | TermKind::Inr(a, _) => {
                a.collect_free(bound, out)
            }
            TermKind::Case { scrutinee, left_var, left, right_var, right } => {
                scrutinee.collect_free(bound, out);
                bound.push(left_var);
                left.collect_free(bound, out);
                bound.pop();
                bound.push(right_var);
                right.collect_free(bound, out);
                bound.pop();
            }
            TermKind::Pack { payload, .. } => payload.collect_free(bound, out),
            TermKind::Open { var, package, body, .. } => {
                package.collect_free(bound, out);
                bound.push(var);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Free type variables occurring in annotations.
    pub fn free_type_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free_types(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_types<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<Name>) {
        let mut add = |fv: BTreeSet<Name>, bound: &Vec<&str>| {
            for v in fv {
                if !bound.contains(&v.as_str()) {
                    out.insert(v);
                }
            }
        };
        match &self.kind {
            TermKind::Var(_) | TermKind::Lit(_) | TermKind::Unit => {}
            TermKind::Lam(_, s, body) => {
                add(s.free_vars(), bound);
                body.collect_free_types(bound, out);
            }
            TermKind::Table(t) => {
                add(t.domain.free_vars(), bound);
                add(t.codomain.free_vars(), bound);
                for (k, v) in &t.entries {
                    k.collect_free_types(bound, out);
                    v.collect_free_types(bound, out);
                }
            }
            TermKind::App(a, b) | TermKind::BinOp(_, a, b) | TermKind::Pair(a, b) => {
                a.collect_free_types(bound, out);
                b.collect_free_types(bound, out);
            }
            TermKind::UnOp(_, a) | TermKind::Fst(a) | TermKind::Snd(a) => a.collect_free_types(bound, out),
            TermKind::Inl(a, s) | TermKind::Inr(a, s) => {
                add(s.free_vars(), bound);
                a.collect_free_types(bound, out);
            }
            TermKind::Case { scrutinee, left, right, .. } => {
                scrutinee.collect_free_types(bound, out);
                left.collect_free_types(bound, out);
                right.collect_free_types(bound, out);
            }
            TermKind::Pack { witness, payload, annot } => {
                add(witness.free_vars(), bound);
                add(annot.free_vars(), bound);
                payload.collect_free_types(bound, out);
            }
            TermKind::Open { tyvar, package, body, .. } => {
                package.collect_free_types(bound, out);
                bound.push(tyvar);
                body.collect_free_types(bound, out);
                bound.pop();
            }
        }
    }

    /// Capture-avoiding substitution of `r` for the free occurrences of `x`.
    pub fn subst(&self, x: &str, r: &Term) -> Term {
        let fv = r.free_vars();
        let ftv = r.free_type_vars();
        self.subst_with(x, r, &fv, &ftv)
    }

    fn subst_with(&self, x: &str, r: &Term, fv: &BTreeSet<Name>, ftv: &BTreeSet<Name>) -> Term {
        let go = |t: &Term| Box::new(t.subst_with(x, r, fv, ftv));
        match &self.kind {
            TermKind::Var(y) if y == x => r.clone(),
            TermKind::Var(_) | TermKind::Lit(_) | TermKind::Unit | TermKind::Table(_) => self.clone(),
            TermKind::Lam(y, s, body) => {
                let (y, body) = self.bind_term(y, body, x, r, fv, ftv);
                self.rebuild(TermKind::Lam(y, s.clone(), Box::new(body)))
            }
            TermKind::App(a, b) => self.rebuild(TermKind::App(go(a), go(b))),
            TermKind::BinOp(op, a, b) => self.rebuild(TermKind::BinOp(*op, go(a), go(b))),
            TermKind::Pair(a, b) => self.rebuild(TermKind::Pair(go(a), go(b))),
            TermKind::UnOp(op, a) => self.rebuild(TermKind::UnOp(*op, go(a))),
            TermKind::Fst(a) => self.rebuild(TermKind::Fst(go(a))),
            TermKind::Snd(a) => self.rebuild(TermKind::Snd(go(a))),
            TermKind::Inl(a, s) => self.rebuild(TermKind::Inl(go(a), s.clone())),
            TermKind::Inr(a, s) => self.rebuild(TermKind::Inr(go(a), s.clone())),
            TermKind::Case { scrutinee, left_var, left, right_var, right } => {
                let (left_var, left) = self.bind_term(left_var, left, x, r, fv, ftv);
                let (right_var, right) = self.bind_term(right_var, right, x, r, fv, ftv);
                self.rebuild(TermKind::Case {
                    scrutinee: go(scrutinee),
                    left_var,
                    left: Box::new(left),
                    right_var,
                    right: Box::new(right),
                })
            }
            TermKind::Pack { witness, payload, annot } => {
                self.rebuild(TermKind::Pack { witness: witness.clone(), payload: go(payload), annot: annot.clone() })
            }
            TermKind::Open { tyvar, var, package, body } => {
                let package = go(package);
                if var == x || !body.free_vars().contains(x) {
                    return self.rebuild(TermKind::Open {
                        tyvar: tyvar.clone(),
                        var: var.clone(),
                        package,
                        body: body.clone(),
                    });
                }
                // Rename the type binder if the replacement mentions it.
                let (tyvar, body) = if ftv.contains(tyvar) {
                    let body_ftv = body.free_type_vars();
                    let fresh = fresh_name(tyvar, |n| ftv.contains(n) || body_ftv.contains(n));
                    let body = body.subst_type(tyvar, &Type::Var(fresh.clone()));
                    (fresh, body)
                } else {
                    (tyvar.clone(), (**body).clone())
                };
                let (var, body) = self.bind_term(var, &body, x, r, fv, ftv);
                self.rebuild(TermKind::Open { tyvar, var, package, body: Box::new(body) })
            }
        }
    }

    /// Substitutes under a term binder `y`, renaming it when it would capture.
    fn bind_term(
        &self,
        y: &str,
        body: &Term,
        x: &str,
        r: &Term,
        fv: &BTreeSet<Name>,
        ftv: &BTreeSet<Name>,
    ) -> (Name, Term) {
        if y == x {
            return (y.to_string(), body.clone());
        }
        if fv.contains(y) && body.free_vars().contains(x) {
            let body_fv = body.free_vars();
            let fresh = fresh_name(y, |n| n == x || fv.contains(n) || body_fv.contains(n));
            let renamed = body.subst(y, &Term::var(&fresh));
            (fresh, renamed.subst_with(x, r, fv, ftv))
        } else {
            (y.to_string(), body.subst_with(x, r, fv, ftv))
        }
    }

    /// Capture-avoiding substitution of type `r` for type variable `x` in
    /// every annotation.
    pub fn subst_type(&self, x: &str, r: &Type) -> Term {
        let fv = r.free_vars();
        self.subst_type_with(x, r, &fv)
    }

    fn subst_type_with(&self, x: &str, r: &Type, fv: &BTreeSet<Name>) -> Term {
        let go = |t: &Term| Box::new(t.subst_type_with(x, r, fv));
        let st = |s: &SecType| s.subst_with(x, r, fv);
        match &self.kind {
            TermKind::Var(_) | TermKind::Lit(_) | TermKind::Unit => self.clone(),
            TermKind::Table(t) => self.rebuild(TermKind::Table(FnTable {
                domain: st(&t.domain),
                codomain: st(&t.codomain),
                entries: t
                    .entries
                    .iter()
                    .map(|(k, v)| (k.subst_type_with(x, r, fv), v.subst_type_with(x, r, fv)))
                    .collect(),
            })),
            TermKind::Lam(y, s, body) => self.rebuild(TermKind::Lam(y.clone(), st(s), go(body))),
            TermKind::App(a, b) => self.rebuild(TermKind::App(go(a), go(b))),
            TermKind::BinOp(op, a, b) => self.rebuild(TermKind::BinOp(*op, go(a), go(b))),
            TermKind::Pair(a, b) => self.rebuild(TermKind::Pair(go(a), go(b))),
            TermKind::UnOp(op, a) => self.rebuild(TermKind::UnOp(*op, go(a))),
            TermKind::Fst(a) => self.rebuild(TermKind::Fst(go(a))),
            TermKind::Snd(a) => self.rebuild(TermKind::Snd(go(a))),
            TermKind::Inl(a, s) => self.rebuild(TermKind::Inl(go(a), st(s))),
            TermKind::Inr(a, s) => self.rebuild(TermKind::Inr(go(a), st(s))),
            TermKind::Case { scrutinee, left_var, left, right_var, right } => self.rebuild(TermKind::Case {
                scrutinee: go(scrutinee),
                left_var: left_var.clone(),
                left: go(left),
                right_var: right_var.clone(),
                right: go(right),
            }),
            TermKind::Pack { witness, payload, annot } => self.rebuild(TermKind::Pack {
                witness: witness.subst_with(x, r, fv),
                payload: go(payload),
                annot: annot.subst_with(x, r, fv),
            }),
            TermKind::Open { tyvar, var, package, body } => {
                let package = go(package);
                if tyvar == x {
                    return self.rebuild(TermKind::Open {
                        tyvar: tyvar.clone(),
                        var: var.clone(),
                        package,
                        body: body.clone(),
                    });
                }
                let (tyvar, body) = if fv.contains(tyvar) {
                    let body_ftv = body.free_type_vars();
                    let fresh = fresh_name(tyvar, |n| n == x || fv.contains(n) || body_ftv.contains(n));
                    (fresh.clone(), body.subst_type(tyvar, &Type::Var(fresh)))
                } else {
                    (tyvar.clone(), (**body).clone())
                };
                self.rebuild(TermKind::Open {
                    tyvar,
                    var: var.clone(),
                    package,
                    body: Box::new(body.subst_type_with(x, r, fv)),
                })
            }
        }
    }

    /// Equality up to renaming of term and type binders.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha_term(self, other, &mut Vec::new(), &mut Vec::new())
    }

    /// Number of nodes; used to bound generated terms.
    pub fn size(&self) -> usize {
        match &self.kind {
            TermKind::Var(_) | TermKind::Lit(_) | TermKind::Unit | TermKind::Table(_) => 1,
            TermKind::Lam(_, _, a)
            | TermKind::UnOp(_, a)
            | TermKind::Fst(a)
            | TermKind::Snd(a)
            | TermKind::Inl(a, _)
            | TermKind::Inr(a, _)
            | TermKind::Pack { payload: a, .. } => 1 + a.size(),
            TermKind::App(a, b)
            | TermKind::BinOp(_, a, b)
            | TermKind::Pair(a, b)
            | TermKind::Open { package: a, body: b, .. } => 1 + a.size() + b.size(),
            TermKind::Case { scrutinee, left, right, .. } => 1 + scrutinee.size() + left.size() + right.size(),
        }
    }

    /// Every literal occurring in the term.
    pub fn literals(&self) -> Vec<Literal> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let TermKind::Lit(l) = &t.kind {
                out.push(l.clone());
            }
        });
        out
    }

    /// Pre-order traversal over every subterm.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Immediate subterms, left to right.
    pub fn children(&self) -> Vec<&Term> {
        match &self.kind {
            TermKind::Var(_) | TermKind::Lit(_) | TermKind::Unit => vec![],
            TermKind::Table(t) => t.entries.iter().flat_map(|(k, v)| [k, v]).collect(),
            TermKind::Lam(_, _, a)
            | TermKind::UnOp(_, a)
            | TermKind::Fst(a)
            | TermKind::Snd(a)
            | TermKind::Inl(a, _)
            | TermKind::Inr(a, _)
            | TermKind::Pack { payload: a, .. } => vec![a],
            TermKind::App(a, b)
            | TermKind::BinOp(_, a, b)
            | TermKind::Pair(a, b)
            | TermKind::Open { package: a, body: b, .. } => {
                vec![a, b]
            }
            TermKind::Case { scrutinee, left, right, .. } => vec![scrutinee, left, right],
        }
    }

    /// Height of the syntax tree; leaves have depth 0.
    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }
}

fn alpha_sec<'a>(a: &'a SecType, b: &'a SecType, tys: &mut Vec<(&'a str, &'a str)>) -> bool {
    a.alpha_eq_in(b, tys)
}

fn alpha_term<'a>(
    a: &'a Term,
    b: &'a Term,
    vars: &mut Vec<(&'a str, &'a str)>,
    tys: &mut Vec<(&'a str, &'a str)>,
) -> bool {
    use TermKind as K;
    match (&a.kind, &b.kind) {
        (K::Var(x), K::Var(y)) => {
            let ix = vars.iter().rev().position(|(l, _)| *l == x);
            let iy = vars.iter().rev().position(|(_, r)| *r == y);
            match (ix, iy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (K::Lam(x, s1, b1), K::Lam(y, s2, b2)) => {
            if !alpha_sec(s1, s2, tys) {
                return false;
            }
            vars.push((x, y));
            let eq = alpha_term(b1, b2, vars, tys);
            vars.pop();
            eq
        }
        (K::Lit(l1), K::Lit(l2)) => l1 == l2,
        (K::Unit, K::Unit) => true,
        (K::Table(t1), K::Table(t2)) => t1 == t2,
        (K::App(a1, b1), K::App(a2, b2)) | (K::Pair(a1, b1), K::Pair(a2, b2)) => {
            alpha_term(a1, a2, vars, tys) && alpha_term(b1, b2, vars, tys)
        }
        (K::BinOp(o1, a1, b1), K::BinOp(o2, a2, b2)) => {
            o1 == o2 && alpha_term(a1, a2, vars, tys) && alpha_term(b1, b2, vars, tys)
        }
        (K::UnOp(o1, a1), K::UnOp(o2, a2)) => o1 == o2 && alpha_term(a1, a2, vars, tys),
        (K::Fst(a1), K::Fst(a2)) | (K::Snd(a1), K::Snd(a2)) => alpha_term(a1, a2, vars, tys),
        (K::Inl(a1, s1), K::Inl(a2, s2)) | (K::Inr(a1, s1), K::Inr(a2, s2)) => {
            alpha_sec(s1, s2, tys) && alpha_term(a1, a2, vars, tys)
        }
        (
            K::Case { scrutinee: s1, left_var: lx, left: l1, right_var: rx, right: r1 },
            K::Case { scrutinee: s2, left_var: ly, left: l2, right_var: ry, right: r2 },
        ) => {
            if !alpha_term(s1, s2, vars, tys) {
                return false;
            }
            vars.push((lx, ly));
            let left = alpha_term(l1, l2, vars, tys);
            vars.pop();
            vars.push((rx, ry));
            let right = alpha_term(r1, r2, vars, tys);
            vars.pop();
            left && right
        }
        (K::Pack { witness: w1, payload: p1, annot: t1 }, K::Pack { witness: w2, payload: p2, annot: t2 }) => {
            w1.alpha_eq_in(w2, tys) && t1.alpha_eq_in(t2, tys) && alpha_term(p1, p2, vars, tys)
        }
        (
            K::Open { tyvar: x1, var: v1, package: p1, body: b1 },
            K::Open { tyvar: x2, var: v2, package: p2, body: b2 },
        ) => {
            if !alpha_term(p1, p2, vars, tys) {
                return false;
            }
            tys.push((x1, x2));
            vars.push((v1, v2));
            let eq = alpha_term(b1, b2, vars, tys);
            vars.pop();
            tys.pop();
            eq
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fac(t: Type, u: Type) -> SecType {
        SecType::new(t, u)
    }

    #[test]
    fn rep_type_finds_unique_representation() {
        // exists X. (X!X -> Int!X)
        let ety = Type::exists("X", Type::fun(SecType::public(Type::var("X")), fac(Type::int(), Type::var("X"))));
        assert_eq!(rep_type(&ety).unwrap(), Type::int());
    }

    #[test]
    fn rep_type_rejects_two_representations() {
        let ety = Type::exists("X", Type::fun(fac(Type::string(), Type::var("X")), fac(Type::int(), Type::var("X"))));
        assert!(matches!(rep_type(&ety), Err(RepTypeError::Ambiguous { .. })));
    }

    #[test]
    fn rep_type_unconstrained_is_the_variable() {
        let ety = Type::exists(
            "X",
            Type::Pair(Box::new(SecType::public(Type::int())), Box::new(SecType::public(Type::int()))),
        );
        assert_eq!(rep_type(&ety).unwrap(), Type::var("X"));
        let ety = Type::exists("X", Type::fun(SecType::public(Type::int()), SecType::public(Type::int())));
        assert_eq!(rep_type(&ety).unwrap(), Type::var("X"));
    }

    #[test]
    fn rep_type_ignores_shadowed_variable() {
        // exists X. (exists X. Int!X) * String!X
        let inner = Type::exists("X", Type::pair(fac(Type::int(), Type::var("X")), SecType::public(Type::Unit)));
        let ety = Type::exists("X", Type::pair(SecType::public(inner), fac(Type::string(), Type::var("X"))));
        assert_eq!(rep_type(&ety).unwrap(), Type::string());
    }

    #[test]
    fn rep_type_requires_existential() {
        assert_eq!(rep_type(&Type::int()), Err(RepTypeError::NotExistential));
    }

    #[test]
    fn wf_examples() {
        let delta: TyVarEnv = [("X".to_string(), Type::int())].into_iter().collect();
        assert!(wf_security_type(&delta, &fac(Type::int(), Type::var("X"))));
        assert!(!wf_security_type(&delta, &fac(Type::string(), Type::var("X"))));
        assert!(wf_security_type(&TyVarEnv::new(), &SecType::public(Type::int())));
        assert!(wf_security_type(&delta, &fac(Type::var("X"), Type::Top)));
    }

    #[test]
    fn wf_rejects_unbound_top_and_mismatch() {
        let empty = TyVarEnv::new();
        assert_eq!(check_wf(&empty, &SecType::public(Type::var("Y"))), Err(WfError::Unbound("Y".into())));
        assert_eq!(check_wf(&empty, &SecType::private(Type::Top)), Err(WfError::TopSafety));
        assert!(matches!(check_wf(&empty, &fac(Type::int(), Type::bool())), Err(WfError::FacetMismatch { .. })));
    }

    #[test]
    fn wf_checks_nested_and_existential_bodies() {
        let empty = TyVarEnv::new();
        // exists Z. Int!Z * (Int!Z -> pub Bool)
        let policy = Type::exists(
            "Z",
            Type::pair(
                fac(Type::int(), Type::var("Z")),
                SecType::public(Type::fun(fac(Type::int(), Type::var("Z")), SecType::public(Type::bool()))),
            ),
        );
        assert!(wf_security_type(&empty, &SecType::public(policy)));
        let bad = Type::fun(fac(Type::int(), Type::var("Z")), SecType::public(Type::bool()));
        assert!(!wf_security_type(&empty, &SecType::public(bad)));
        // An unconstrained variable can only be declassified as itself.
        let only_x = Type::exists("X", Type::pair(SecType::public(Type::var("X")), fac(Type::var("X"), Type::Top)));
        assert!(wf_security_type(&empty, &SecType::public(only_x)));
    }

    #[test]
    fn erase_examples() {
        assert_eq!(erase(&SecType::private(Type::int())), Simple::Prim(Prim::Int));
        let f = Type::fun(fac(Type::int(), Type::var("X")), SecType::public(Type::bool()));
        assert_eq!(
            erase(&SecType::private(f.clone())),
            Simple::Fun(Box::new(Simple::Prim(Prim::Int)), Box::new(Simple::Prim(Prim::Bool)))
        );
        let ex = erase(&SecType::public(Type::exists("X", f)));
        assert_eq!(
            ex,
            Simple::Exists(
                "X".into(),
                Box::new(Simple::Fun(Box::new(Simple::Prim(Prim::Int)), Box::new(Simple::Prim(Prim::Bool))))
            )
        );
    }

    #[test]
    fn subst_examples() {
        let s = fac(Type::int(), Type::var("X"));
        assert_eq!(s.subst("X", &Type::int()), SecType::public(Type::int()));
        let shadow = Type::exists("X", Type::pair(SecType::public(Type::var("X")), SecType::public(Type::Unit)));
        assert_eq!(shadow.subst("X", &Type::int()), shadow);
        let xx = SecType::public(Type::var("X"));
        assert_eq!(xx.subst("X", &Type::string()), SecType::public(Type::string()));
    }

    #[test]
    fn subst_avoids_capture() {
        // (exists Y. X!X * Y!Y)[Y/X] must not capture.
        let t = Type::exists("Y", Type::pair(SecType::public(Type::var("X")), SecType::public(Type::var("Y"))));
        let out = t.subst("X", &Type::var("Y"));
        let Type::Exists(b, body) = &out else { panic!() };
        assert_ne!(b, "Y");
        assert_eq!(**body, Type::pair(SecType::public(Type::var("Y")), SecType::public(Type::var(b))));
    }

    #[test]
    fn alpha_equivalence_of_existentials() {
        let a = Type::exists("X", Type::pair(SecType::public(Type::var("X")), SecType::public(Type::int())));
        let b = Type::exists("Y", Type::pair(SecType::public(Type::var("Y")), SecType::public(Type::int())));
        assert_eq!(a, b);
        assert_eq!(a.key(), b.key());
        let c = Type::exists("Y", Type::pair(SecType::public(Type::var("X")), SecType::public(Type::int())));
        assert_ne!(a, c);
    }

    #[test]
    fn term_subst_renames_binder() {
        // (fun (y: pub Int) => x)[y/x] = fun (y1: pub Int) => y
        let t = Term::lam("y", SecType::public(Type::int()), Term::var("x"));
        let out = t.subst("x", &Term::var("y"));
        let TermKind::Lam(b, _, body) = &out.kind else { panic!() };
        assert_ne!(b, "y");
        assert_eq!(**body, Term::var("y"));
        assert!(out.alpha_eq(&Term::lam("z", SecType::public(Type::int()), Term::var("y"))));
    }

    #[test]
    fn term_type_subst_respects_open_binder() {
        let body = Term::lam("y", SecType::new(Type::int(), Type::var("X")), Term::var("y"));
        let t = Term::open("X", "x", Term::var("p"), body.clone());
        assert_eq!(t.subst_type("X", &Type::int()), t);
        let lam = body.subst_type("X", &Type::int());
        let TermKind::Lam(_, s, _) = &lam.kind else { panic!() };
        assert!(s.is_public());
    }
}
