use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use super::{DomainSpec, RelEntry, RelEnv, Side, Truth};
use crate::eval::{eval, EvalError, Value};
use crate::syntax::{erase_safety, rep_type, SecType, Simple, Term, Type};
use crate::typecheck::{precise, simple_type_of, SimpleEnv};

/// Values of one closed type. `origin[i]` names the program closure that
/// `values[i]` came from, if any.
pub(crate) struct Enumerated {
    pub values: Vec<Value>,
    pub origin: Vec<Option<usize>>,
    pub complete: bool,
}

pub(crate) struct Pairs {
    pub pairs: Vec<(Value, Value)>,
    pub complete: bool,
}

/// Evaluation context for one relational interpretation `ρ`, with caches
/// keyed by canonical type keys.
pub(crate) struct Ctx<'d> {
    pub dom: &'d DomainSpec,
    pub rho: RelEnv,
    values: RefCell<HashMap<(Side, String), Rc<Enumerated>>>,
    pairs: RefCell<HashMap<String, Rc<Pairs>>>,
}

fn first_order(t: &Type) -> bool {
    match t {
        Type::Prim(_) | Type::Unit => true,
        Type::Pair(a, b) | Type::Sum(a, b) => first_order(&a.safety) && first_order(&b.safety),
        Type::Fun(..) | Type::Exists(..) | Type::Var(_) | Type::Top => false,
    }
}

pub(crate) fn value_simple_type(v: &Value) -> Option<Simple> {
    simple_type_of(&BTreeSet::new(), &SimpleEnv::new(), &v.to_term()).ok()
}

/// Index sets of `0..n` ordered by size, then lexicographically.
pub(crate) fn subsets_by_size(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=n).flat_map(move |k| Combinations::new(n, k))
}

struct Combinations {
    n: usize,
    idx: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: if k <= n { Some((0..k).collect()) } else { None } }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.idx.clone()?;
        let k = cur.len();
        let mut next = cur.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.idx = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.idx = Some(next);
                break;
            }
        }
        Some(cur)
    }
}

impl<'d> Ctx<'d> {
    pub fn new(dom: &'d DomainSpec, rho: RelEnv) -> Self {
        Ctx { dom, rho, values: RefCell::default(), pairs: RefCell::default() }
    }

    /// Values of `ρ_side(t)`.
    pub fn values(&self, side: Side, t: &Type) -> Rc<Enumerated> {
        let closed = self.rho.apply(side, t);
        self.values_closed(side, &closed)
    }

    fn values_closed(&self, side: Side, t: &Type) -> Rc<Enumerated> {
        let key = (side, t.key());
        if let Some(hit) = self.values.borrow().get(&key) {
            return hit.clone();
        }
        let computed = Rc::new(self.compute_values(side, t));
        self.values.borrow_mut().insert(key, computed.clone());
        computed
    }

    fn compute_values(&self, side: Side, t: &Type) -> Enumerated {
        let cap = self.dom.max_values;
        let plain =
            |values: Vec<Value>, complete: bool| Enumerated { origin: vec![None; values.len()], values, complete };
        match t {
            Type::Prim(p) => plain(self.dom.carrier(*p), true),
            Type::Unit => plain(vec![Value::Unit], true),
            Type::Top => plain(Vec::new(), true),
            Type::Var(_) => plain(Vec::new(), false),
            Type::Pair(a, b) => {
                let va = self.values_closed(side, &a.safety);
                let vb = self.values_closed(side, &b.safety);
                let mut complete = va.complete && vb.complete;
                let mut out = Vec::new();
                'outer: for x in &va.values {
                    for y in &vb.values {
                        if out.len() == cap {
                            complete = false;
                            break 'outer;
                        }
                        out.push(Value::pair(x.clone(), y.clone()));
                    }
                }
                plain(out, complete)
            }
            Type::Sum(a, b) => {
                let annot = SecType::public(t.clone());
                let va = self.values_closed(side, &a.safety);
                let vb = self.values_closed(side, &b.safety);
                let out = va
                    .values
                    .iter()
                    .map(|v| Value::Inl(Box::new(v.clone()), annot.clone()))
                    .chain(vb.values.iter().map(|v| Value::Inr(Box::new(v.clone()), annot.clone())))
                    .collect();
                plain(out, va.complete && vb.complete)
            }
            Type::Fun(a, b) => {
                let mut values = Vec::new();
                let mut origin = Vec::new();
                let mut complete = first_order(&a.safety);
                if complete {
                    let dv = self.values_closed(side, &a.safety);
                    let cv = self.values_closed(side, &b.safety);
                    complete = dv.complete && cv.complete;
                    let n = dv.values.len();
                    let m = cv.values.len();
                    let count = u32::try_from(n).ok().and_then(|n| m.checked_pow(n));
                    match count {
                        Some(count) if n <= self.dom.max_table_domain && count <= self.dom.max_tables => {
                            for mut code in 0..count {
                                let mut entries = Vec::with_capacity(n);
                                for k in &dv.values {
                                    entries.push((k.to_term(), cv.values[code % m].to_term()));
                                    code /= m;
                                }
                                values.push(Value::Table(crate::syntax::FnTable {
                                    domain: (**a).clone(),
                                    codomain: (**b).clone(),
                                    entries,
                                }));
                                origin.push(None);
                            }
                        }
                        _ => complete = false,
                    }
                }
                let want = erase_safety(t);
                for (i, c) in self.dom.closures.iter().enumerate() {
                    let c = self.rho.apply_term(side, c);
                    if value_simple_type_term(&c).as_ref() == Some(&want) {
                        if let Some(v) = Value::from_term(&c) {
                            values.push(v);
                            origin.push(Some(i));
                        }
                    }
                }
                Enumerated { values, origin, complete }
            }
            Type::Exists(x, body) => {
                let witnesses = match rep_type(t) {
                    Ok(Type::Var(v)) if v == *x => crate::syntax::Prim::ALL.iter().map(|p| Type::Prim(*p)).collect(),
                    Ok(rep) => vec![rep],
                    Err(_) => Vec::new(),
                };
                let mut out = Vec::new();
                let mut complete = true;
                for w in witnesses {
                    let payloads = self.values_closed(side, &body.subst(x, &w));
                    complete &= payloads.complete;
                    for p in &payloads.values {
                        out.push(Value::Pack { witness: w.clone(), payload: Box::new(p.clone()), annot: t.clone() });
                    }
                }
                plain(out, complete)
            }
        }
    }

    /// All pairs in `V⟦s⟧ρ` drawn from the finite model.
    pub fn related_pairs(&self, s: &SecType) -> Rc<Pairs> {
        let key = s.key();
        if let Some(hit) = self.pairs.borrow().get(&key) {
            return hit.clone();
        }
        let computed = Rc::new(self.compute_related(s));
        self.pairs.borrow_mut().insert(key, computed.clone());
        computed
    }

    fn compute_related(&self, s: &SecType) -> Pairs {
        match &s.declass {
            Type::Top => {
                let v1 = self.values(Side::Left, &s.safety);
                let v2 = self.values(Side::Right, &s.safety);
                let mut complete = v1.complete && v2.complete;
                let mut pairs = Vec::new();
                'outer: for a in &v1.values {
                    for b in &v2.values {
                        if pairs.len() == self.dom.max_values {
                            complete = false;
                            break 'outer;
                        }
                        pairs.push((a.clone(), b.clone()));
                    }
                }
                Pairs { pairs, complete }
            }
            Type::Var(x) if !matches!(&s.safety, Type::Var(y) if y == x) => {
                let mut base = self.related_safety(&s.safety);
                if let Some(entry) = self.rho.get(x) {
                    for (a, b) in &entry.rel {
                        if !base.pairs.iter().any(|(c, d)| c.matches(a) && d.matches(b)) {
                            base.pairs.push((a.clone(), b.clone()));
                        }
                    }
                }
                base
            }
            _ => self.related_safety(&s.safety),
        }
    }

    fn related_safety(&self, t: &Type) -> Pairs {
        match t {
            Type::Prim(p) => {
                Pairs { pairs: self.dom.carrier(*p).into_iter().map(|v| (v.clone(), v)).collect(), complete: true }
            }
            Type::Unit => Pairs { pairs: vec![(Value::Unit, Value::Unit)], complete: true },
            Type::Top => Pairs { pairs: Vec::new(), complete: true },
            Type::Var(x) => match self.rho.get(x) {
                Some(entry) => Pairs { pairs: entry.rel.clone(), complete: true },
                None => Pairs { pairs: Vec::new(), complete: false },
            },
            Type::Pair(a, b) => {
                let pa = self.related_pairs(a);
                let pb = self.related_pairs(b);
                let mut complete = pa.complete && pb.complete;
                let mut pairs = Vec::new();
                'outer: for (a1, a2) in &pa.pairs {
                    for (b1, b2) in &pb.pairs {
                        if pairs.len() == self.dom.max_values {
                            complete = false;
                            break 'outer;
                        }
                        pairs.push((Value::pair(a1.clone(), b1.clone()), Value::pair(a2.clone(), b2.clone())));
                    }
                }
                Pairs { pairs, complete }
            }
            Type::Sum(a, b) => {
                let s1 = SecType::public(self.rho.apply(Side::Left, t));
                let s2 = SecType::public(self.rho.apply(Side::Right, t));
                let pa = self.related_pairs(a);
                let pb = self.related_pairs(b);
                let inl = pa.pairs.iter().map(|(x, y)| {
                    (Value::Inl(Box::new(x.clone()), s1.clone()), Value::Inl(Box::new(y.clone()), s2.clone()))
                });
                let inr = pb.pairs.iter().map(|(x, y)| {
                    (Value::Inr(Box::new(x.clone()), s1.clone()), Value::Inr(Box::new(y.clone()), s2.clone()))
                });
                Pairs { pairs: inl.chain(inr).collect(), complete: pa.complete && pb.complete }
            }
            Type::Fun(..) | Type::Exists(..) => {
                let v1 = self.values(Side::Left, t);
                let v2 = self.values(Side::Right, t);
                let mut complete = v1.complete && v2.complete;
                let mut pairs = Vec::new();
                for (a, oa) in v1.values.iter().zip(&v1.origin) {
                    for (b, ob) in v2.values.iter().zip(&v2.origin) {
                        // Program closures are only paired with themselves.
                        if (oa.is_some() || ob.is_some()) && oa != ob {
                            continue;
                        }
                        match self.in_safety(t, a, b) {
                            Truth::Yes => pairs.push((a.clone(), b.clone())),
                            Truth::Unknown => complete = false,
                            Truth::No => {}
                        }
                    }
                }
                Pairs { pairs, complete }
            }
        }
    }

    /// `(v1, v2) ∈ V⟦s⟧ρ`.
    pub fn in_value(&self, s: &SecType, v1: &Value, v2: &Value) -> Truth {
        match &s.declass {
            Type::Top => self.atom(&s.safety, v1, v2),
            Type::Var(x) if !matches!(&s.safety, Type::Var(y) if y == x) => {
                if self.rho.get(x).is_some_and(|e| e.contains(v1, v2)) {
                    Truth::Yes
                } else {
                    self.in_safety(&s.safety, v1, v2)
                }
            }
            _ => self.in_safety(&s.safety, v1, v2),
        }
    }

    fn atom(&self, t: &Type, v1: &Value, v2: &Value) -> Truth {
        let want1 = erase_safety(&self.rho.apply(Side::Left, t));
        let want2 = erase_safety(&self.rho.apply(Side::Right, t));
        Truth::from_bool(
            value_simple_type(v1).as_ref() == Some(&want1) && value_simple_type(v2).as_ref() == Some(&want2),
        )
    }

    fn in_safety(&self, t: &Type, v1: &Value, v2: &Value) -> Truth {
        match (t, v1, v2) {
            (Type::Prim(_), Value::Prim(a), Value::Prim(b)) => Truth::from_bool(a == b),
            (Type::Unit, Value::Unit, Value::Unit) => Truth::Yes,
            (Type::Pair(a, b), Value::Pair(a1, b1), Value::Pair(a2, b2)) => match self.in_value(a, a1, a2) {
                Truth::No => Truth::No,
                first => first.and(self.in_value(b, b1, b2)),
            },
            (Type::Sum(a, _), Value::Inl(x1, _), Value::Inl(x2, _)) => self.in_value(a, x1, x2),
            (Type::Sum(_, b), Value::Inr(x1, _), Value::Inr(x2, _)) => self.in_value(b, x1, x2),
            (Type::Var(x), _, _) => Truth::from_bool(self.rho.get(x).is_some_and(|e| e.contains(v1, v2))),
            (Type::Fun(a, b), _, _) => {
                let args = self.related_pairs(a);
                let mut result = Truth::Yes;
                for (x1, x2) in &args.pairs {
                    let e1 = Term::app(v1.to_term(), x1.to_term());
                    let e2 = Term::app(v2.to_term(), x2.to_term());
                    result = result.and(self.in_expr(b, &e1, &e2).0);
                    if result == Truth::No {
                        return Truth::No;
                    }
                }
                if result == Truth::Yes && !args.complete {
                    Truth::Unknown
                } else {
                    result
                }
            }
            (Type::Exists(..), Value::Pack { .. }, Value::Pack { .. }) => self.in_exists(t, v1, v2),
            _ => Truth::No,
        }
    }

    fn in_exists(&self, t: &Type, v1: &Value, v2: &Value) -> Truth {
        let (
            Type::Exists(x, body),
            Value::Pack { witness: w1, payload: p1, .. },
            Value::Pack { witness: w2, payload: p2, .. },
        ) = (t, v1, v2)
        else {
            return Truth::No;
        };
        let Ok(rep) = rep_type(t) else {
            return Truth::No;
        };
        let rep_is_bound = matches!(&rep, Type::Var(v) if v == x);
        let ok = rep_is_bound
            || (precise(w1, &self.rho.apply(Side::Left, &rep)) && precise(w2, &self.rho.apply(Side::Right, &rep)));
        if !ok {
            return Truth::No;
        }
        let c1 = self.carrier_with_literals(w1, p1);
        let c2 = self.carrier_with_literals(w2, p2);
        let candidates: Vec<(Value, Value)> =
            c1.iter().flat_map(|a| c2.iter().map(move |b| (a.clone(), b.clone()))).collect();
        if candidates.len() > self.dom.max_relation_pairs {
            return Truth::Unknown;
        }
        let mut saw_unknown = false;
        for subset in subsets_by_size(candidates.len()) {
            let rel = subset.iter().map(|&i| candidates[i].clone()).collect();
            let entry = RelEntry { t1: w1.clone(), t2: w2.clone(), rel };
            let child = Ctx::new(self.dom, self.rho.with(x, entry));
            match child.in_safety(body, p1, p2) {
                Truth::Yes => return Truth::Yes,
                Truth::Unknown => saw_unknown = true,
                Truth::No => {}
            }
        }
        if saw_unknown {
            Truth::Unknown
        } else {
            Truth::No
        }
    }

    fn carrier_with_literals(&self, w: &Type, payload: &Value) -> Vec<Value> {
        let mut out = self.values_closed(Side::Left, w).values.clone();
        if let Type::Prim(p) = w {
            for l in payload.to_term().literals() {
                let v = Value::Prim(l.clone());
                if l.prim() == *p && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// `(e1, e2) ∈ E⟦s⟧ρ`, with the values both sides reduced to.
    pub fn in_expr(&self, s: &SecType, e1: &Term, e2: &Term) -> (Truth, Option<(Value, Value)>) {
        let fuel = self.dom.fuel;
        match (eval(e1, fuel), eval(e2, fuel)) {
            (Ok(v1), Ok(v2)) => (self.in_value(s, &v1, &v2), Some((v1, v2))),
            (r1, r2) => {
                let hard = |r: &Result<Value, EvalError>| matches!(r, Err(EvalError::Stuck { reason, .. }) if !reason.is_partiality());
                if hard(&r1) || hard(&r2) {
                    (Truth::No, None)
                } else {
                    (Truth::Unknown, None)
                }
            }
        }
    }
}

fn value_simple_type_term(t: &Term) -> Option<Simple> {
    simple_type_of(&BTreeSet::new(), &SimpleEnv::new(), t).ok()
}

/// `(v1, v2) ∈ V⟦s⟧ρ` over the finite model of `dom`.
pub fn in_value_rel(s: &SecType, rho: &RelEnv, v1: &Value, v2: &Value, dom: &DomainSpec) -> Truth {
    Ctx::new(dom, rho.clone()).in_value(s, v1, v2)
}

/// `(e1, e2) ∈ E⟦s⟧ρ` over the finite model of `dom`.
pub fn in_expr_rel(s: &SecType, rho: &RelEnv, e1: &Term, e2: &Term, dom: &DomainSpec) -> Truth {
    Ctx::new(dom, rho.clone()).in_expr(s, e1, e2).0
}

/// The values of a closed safety type in the finite model, and whether the
/// enumeration is exhaustive.
pub fn values_of(t: &Type, dom: &DomainSpec) -> (Vec<Value>, bool) {
    let ctx = Ctx::new(dom, RelEnv::new());
    let e = ctx.values(Side::Left, t);
    (e.values.clone(), e.complete)
}
