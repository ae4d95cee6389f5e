//! Seeded, type-directed generation of well-typed programs.
//!
//! Terms are built toward a target security type and kept only if the
//! typechecker accepts them. The divisor of `%` is always a nonzero literal.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{BinOp, Name, Prim, SecType, Term, TyVarEnv, Type, TypeEnv, UnOp};
use crate::typecheck::type_of;

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Maximum nesting depth of generated terms.
    pub depth: u32,
    /// Smaller terms are discarded.
    pub min_size: usize,
    /// Literal pools.
    pub ints: Vec<i64>,
    pub bools: Vec<bool>,
    pub strings: Vec<String>,
}

impl GenConfig {
    /// Closed programs, depth at most 6, four literals per primitive.
    pub fn closed() -> Self {
        GenConfig {
            depth: 6,
            min_size: 3,
            ints: vec![0, 1, 2, 3],
            bools: vec![true, false],
            strings: vec!["a".into(), "aa".into(), "b".into(), String::new()],
        }
    }

    /// Open programs over one abstract type, two literals per primitive.
    pub fn open() -> Self {
        GenConfig {
            depth: 4,
            min_size: 4,
            ints: vec![0, 1],
            bools: vec![true, false],
            strings: vec!["a".into(), String::new()],
        }
    }
}

/// A generated program with its typing context and its security type.
#[derive(Clone, Debug)]
pub struct Generated {
    pub delta: TyVarEnv,
    pub gamma: TypeEnv,
    pub term: Term,
    pub ty: SecType,
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    cfg: &'a GenConfig,
    fresh: usize,
}

type Env = Vec<(Name, SecType)>;

impl<'a> Gen<'a> {
    fn name(&mut self, prefix: &str) -> Name {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs[self.rng.random_range(0..xs.len())].clone()
    }

    fn prim(&mut self) -> Prim {
        self.pick(&Prim::ALL)
    }

    fn literal(&mut self, p: Prim) -> Term {
        match p {
            Prim::Int => Term::int(self.pick(&self.cfg.ints)),
            Prim::Bool => Term::bool(self.pick(&self.cfg.bools)),
            Prim::String => Term::str(&self.pick(&self.cfg.strings)),
        }
    }

    /// A security type whose safety facet is `t`, with a random label that
    /// is legal under `delta`.
    fn label(&mut self, delta: &TyVarEnv, t: Type) -> SecType {
        let abstract_: Vec<Name> = delta.iter().filter(|(_, rep)| **rep == t).map(|(x, _)| x.clone()).collect();
        match self.rng.random_range(0..10) {
            0..=5 => SecType::public(t),
            6 | 7 if !abstract_.is_empty() => {
                let x = self.pick(&abstract_);
                SecType::new(t, Type::var(&x))
            }
            _ => SecType::private(t),
        }
    }

    fn safety_type(&mut self, delta: &TyVarEnv, depth: u32) -> Type {
        let opaque: Vec<Name> =
            delta.iter().filter(|(x, rep)| rep.is_var() && **rep == Type::var(x)).map(|(x, _)| x.clone()).collect();
        let choice = if depth == 0 { self.rng.random_range(0..5) } else { self.rng.random_range(0..9) };
        match choice {
            0..=2 => Type::Prim(self.prim()),
            3 => Type::Unit,
            4 if !opaque.is_empty() => Type::var(&self.pick(&opaque)),
            4 => Type::Prim(self.prim()),
            5 => Type::pair(self.sec_type(delta, depth - 1), self.sec_type(delta, depth - 1)),
            6 => Type::sum(self.sec_type(delta, depth - 1), self.sec_type(delta, depth - 1)),
            7 => Type::fun(self.sec_type(delta, depth - 1), self.sec_type(delta, depth - 1)),
            _ => self.exists_type(),
        }
    }

    fn sec_type(&mut self, delta: &TyVarEnv, depth: u32) -> SecType {
        let t = self.safety_type(delta, depth);
        self.label(delta, t)
    }

    fn exists_type(&mut self) -> Type {
        let y = self.name("Y");
        let p = Type::Prim(self.prim());
        let abs = SecType::new(p.clone(), Type::var(&y));
        let body = match self.rng.random_range(0..4) {
            0 => Type::pair(abs.clone(), SecType::public(Type::fun(abs, SecType::public(Type::bool())))),
            1 => Type::pair(abs, SecType::public(Type::int())),
            2 => Type::fun(abs, SecType::public(p)),
            _ => {
                let v = SecType::public(Type::var(&y));
                Type::pair(v.clone(), SecType::public(Type::fun(v, SecType::public(Type::int()))))
            }
        };
        Type::exists(&y, body)
    }

    /// Operand label for an operator whose result must fit `target`.
    fn operand_label(&mut self, delta: &TyVarEnv, target: &SecType, t: Type) -> SecType {
        if target.declass == Type::Top && !target.is_public() {
            self.label(delta, t)
        } else {
            SecType::public(t)
        }
    }

    fn term(&mut self, delta: &TyVarEnv, env: &Env, target: &SecType, depth: u32) -> Option<Term> {
        for _ in 0..4 {
            let vars: Vec<&Name> =
                env.iter().filter(|(_, s)| crate::typecheck::subtype(s, target)).map(|(x, _)| x).collect();
            let roll = self.rng.random_range(0..10);
            if !vars.is_empty() && (roll < 3 || depth == 0) {
                let x = vars[self.rng.random_range(0..vars.len())].clone();
                return Some(Term::var(&x));
            }
            let t = if depth > 0 && roll >= 6 {
                self.elim(delta, env, target, depth)
            } else {
                self.intro(delta, env, target, depth)
            };
            if t.is_some() {
                return t;
            }
        }
        None
    }

    fn intro(&mut self, delta: &TyVarEnv, env: &Env, target: &SecType, depth: u32) -> Option<Term> {
        match &target.safety {
            Type::Prim(p) => Some(self.literal(*p)),
            Type::Unit => Some(Term::unit()),
            _ if depth == 0 => None,
            Type::Fun(a, b) => {
                let x = self.name("x");
                let mut env2 = env.clone();
                env2.push((x.clone(), (**a).clone()));
                let body = self.term(delta, &env2, b, depth - 1)?;
                Some(Term::lam(&x, (**a).clone(), body))
            }
            Type::Pair(a, b) => {
                Some(Term::pair(self.term(delta, env, a, depth - 1)?, self.term(delta, env, b, depth - 1)?))
            }
            Type::Sum(a, b) => {
                let annot = SecType::public(target.safety.clone());
                if self.chance(0.5) {
                    Some(Term::inl(self.term(delta, env, a, depth - 1)?, annot))
                } else {
                    Some(Term::inr(self.term(delta, env, b, depth - 1)?, annot))
                }
            }
            Type::Exists(y, body) => {
                let rep = crate::syntax::rep_type(&target.safety).ok()?;
                let witness = if rep.is_var() { Type::Prim(self.prim()) } else { rep };
                let payload = self.term(delta, env, &SecType::public(body.subst(y, &witness)), depth - 1)?;
                Some(Term::pack(witness, payload, target.safety.clone()))
            }
            Type::Var(_) | Type::Top => None,
        }
    }

    fn elim(&mut self, delta: &TyVarEnv, env: &Env, target: &SecType, depth: u32) -> Option<Term> {
        let d = depth - 1;
        let prim_target = match &target.safety {
            Type::Prim(p) => Some(*p),
            _ => None,
        };
        let forms = if prim_target.is_some() { 6 } else { 4 };
        match (self.rng.random_range(0..forms), prim_target) {
            (0, _) => {
                let a = self.sec_type(delta, 1);
                let f = self.term(delta, env, &SecType::public(Type::fun(a.clone(), target.clone())), d)?;
                let arg = self.term(delta, env, &a, d)?;
                Some(Term::app(f, arg))
            }
            (1, _) => {
                let other = self.sec_type(delta, 1);
                if self.chance(0.5) {
                    let p = self.term(delta, env, &SecType::public(Type::pair(target.clone(), other)), d)?;
                    Some(Term::fst(p))
                } else {
                    let p = self.term(delta, env, &SecType::public(Type::pair(other, target.clone())), d)?;
                    Some(Term::snd(p))
                }
            }
            (2, _) => {
                let (a, b) = (self.sec_type(delta, 1), self.sec_type(delta, 1));
                let s = self.term(delta, env, &SecType::public(Type::sum(a.clone(), b.clone())), d)?;
                let (x, y) = (self.name("l"), self.name("r"));
                let mut envl = env.clone();
                envl.push((x.clone(), a));
                let mut envr = env.clone();
                envr.push((y.clone(), b));
                let left = self.term(delta, &envl, target, d)?;
                let right = self.term(delta, &envr, target, d)?;
                Some(Term::case(s, &x, left, &y, right))
            }
            (3, _) => {
                let ety = self.exists_type();
                let Type::Exists(y, body) = &ety else { unreachable!() };
                let pkg = self.term(delta, env, &SecType::public(ety.clone()), d)?;
                let tv = self.name("Z");
                let rep = crate::syntax::rep_type(&ety).ok()?.subst(y, &Type::var(&tv));
                let delta2 = delta.with(&tv, rep);
                let x = self.name("p");
                let mut env2 = env.clone();
                env2.push((x.clone(), SecType::public(body.subst(y, &Type::var(&tv)))));
                let b = self.term(&delta2, &env2, target, d)?;
                Some(Term::open(&tv, &x, pkg, b))
            }
            (_, Some(p)) => self.operator(delta, env, target, p, d),
            _ => None,
        }
    }

    fn operator(&mut self, delta: &TyVarEnv, env: &Env, target: &SecType, p: Prim, d: u32) -> Option<Term> {
        match p {
            Prim::Int => match self.rng.random_range(0..5) {
                0 => {
                    let s = self.operand_label(delta, target, Type::string());
                    Some(Term::unop(UnOp::Length, self.term(delta, env, &s, d)?))
                }
                1 => {
                    let s = self.operand_label(delta, target, Type::int());
                    let nonzero: Vec<i64> = self.cfg.ints.iter().copied().filter(|n| *n != 0).collect();
                    let lhs = self.term(delta, env, &s, d)?;
                    Some(Term::binop(BinOp::Mod, lhs, Term::int(self.pick(&nonzero))))
                }
                k => {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul][k as usize - 2];
                    let (s1, s2) = (
                        self.operand_label(delta, target, Type::int()),
                        self.operand_label(delta, target, Type::int()),
                    );
                    Some(Term::binop(op, self.term(delta, env, &s1, d)?, self.term(delta, env, &s2, d)?))
                }
            },
            Prim::Bool => {
                let (op, q) = if self.chance(0.5) { (BinOp::Le, Prim::Int) } else { (BinOp::Eq, self.prim()) };
                let (s1, s2) = (
                    self.operand_label(delta, target, Type::Prim(q)),
                    self.operand_label(delta, target, Type::Prim(q)),
                );
                Some(Term::binop(op, self.term(delta, env, &s1, d)?, self.term(delta, env, &s2, d)?))
            }
            Prim::String => {
                let (s1, s2) = (
                    self.operand_label(delta, target, Type::string()),
                    self.operand_label(delta, target, Type::string()),
                );
                Some(Term::binop(BinOp::Concat, self.term(delta, env, &s1, d)?, self.term(delta, env, &s2, d)?))
            }
        }
    }
}

/// `n` closed security-well-typed programs, deterministic in `seed`.
pub fn closed_terms(seed: u64, n: usize, cfg: &GenConfig) -> Vec<Generated> {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), cfg, fresh: 0 };
    let delta = TyVarEnv::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let target = g.sec_type(&delta, 2);
        let Some(term) = g.term(&delta, &Vec::new(), &target, cfg.depth) else {
            continue;
        };
        if term.depth() > cfg.depth as usize || term.size() < cfg.min_size {
            continue;
        }
        if let Ok(ty) = type_of(&delta, &TypeEnv::new(), &term) {
            out.push(Generated { delta: delta.clone(), gamma: TypeEnv::new(), term, ty });
        }
    }
    out
}

/// `n` well-typed programs over `X : Int` with first-order inputs,
/// deterministic in `seed`.
pub fn open_terms(seed: u64, n: usize, cfg: &GenConfig) -> Vec<Generated> {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), cfg, fresh: 0 };
    let delta: TyVarEnv = [("X".to_string(), Type::int())].into_iter().collect();
    let abs = SecType::new(Type::int(), Type::var("X"));
    let input_types = [
        abs.clone(),
        SecType::public(Type::int()),
        SecType::private(Type::int()),
        SecType::public(Type::fun(abs.clone(), SecType::public(Type::bool()))),
        SecType::public(Type::pair(abs.clone(), SecType::public(Type::int()))),
        SecType::public(Type::pair(
            abs.clone(),
            SecType::public(Type::fun(abs.clone(), SecType::public(Type::bool()))),
        )),
    ];
    let targets = [
        SecType::public(Type::int()),
        SecType::public(Type::bool()),
        SecType::private(Type::int()),
        abs.clone(),
        SecType::public(Type::pair(abs, SecType::public(Type::bool()))),
    ];
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let count = g.rng.random_range(1..=2);
        let env: Env = (0..count).map(|i| (format!("in{i}"), g.pick(&input_types))).collect();
        let target = g.pick(&targets);
        let Some(term) = g.term(&delta, &env, &target, cfg.depth) else {
            continue;
        };
        if term.free_vars().is_empty() || term.size() < cfg.min_size {
            continue;
        }
        let gamma: TypeEnv = env.into_iter().collect();
        if let Ok(ty) = type_of(&delta, &gamma, &term) {
            out.push(Generated { delta: delta.clone(), gamma, term, ty });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let cfg = GenConfig::closed();
        let a: Vec<Term> = closed_terms(7, 20, &cfg).into_iter().map(|g| g.term).collect();
        let b: Vec<Term> = closed_terms(7, 20, &cfg).into_iter().map(|g| g.term).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn closed_terms_are_closed_and_shallow() {
        let cfg = GenConfig::closed();
        for g in closed_terms(3, 200, &cfg) {
            assert!(g.term.is_closed(), "{}", g.term);
            assert!(g.term.depth() <= cfg.depth as usize);
        }
    }

    #[test]
    fn open_terms_use_their_inputs() {
        let gs = open_terms(11, 30, &GenConfig::open());
        assert!(gs.iter().all(|g| !g.term.free_vars().is_empty() && !g.gamma.is_empty()));
        assert!(gs.iter().any(|g| g.term.size() > 3));
    }
}
