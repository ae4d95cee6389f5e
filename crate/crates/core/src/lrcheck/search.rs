use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::relation::{subsets_by_size, value_simple_type, Ctx};
use super::{witness, DomainSpec, RelEntry, RelEnv, Side, SubstPair, Truth};
use crate::eval::Value;
use crate::syntax::{
    check_wf, check_wf_safety, erase, erase_safety, Name, Prim, SecType, Term, TyVarEnv, Type, TypeEnv,
};
use crate::typecheck::{erase_env, precise, simple_type_of, subtype, type_of, TypeError, TypeErrorKind};

/// How relational interpretations of the abstract types are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    /// Every relation over the carriers, smallest first.
    Exhaustive,
    /// `samples` relations drawn by independent coin flips per pair.
    Sampled { samples: usize, seed: u64 },
    /// One user-supplied interpretation and input pair.
    Witness { rho: RelEnv, gamma: SubstPair },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Sampled { .. } => "sampled",
            Mode::Witness { .. } => "witness",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Verdict {
    /// Every checked candidate passed and the search covered the finite model.
    Holds {
        mode: &'static str,
        rel_envs: usize,
        substitutions: usize,
    },
    /// A related input pair whose outputs are not related.
    Violated {
        rho: RelEnv,
        gamma: SubstPair,
        outputs: Option<(Value, Value)>,
    },
    Inconclusive {
        reason: String,
    },
}

impl Verdict {
    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { mode, rel_envs, substitutions } => {
                write!(f, "holds ({mode}: {rel_envs} relation environment(s), {substitutions} input pair(s))")
            }
            Verdict::Violated { rho, gamma, outputs } => {
                writeln!(f, "violated")?;
                f.write_str(&witness::render_witness(rho, gamma, outputs.as_ref()))
            }
            Verdict::Inconclusive { reason } => write!(f, "inconclusive: {reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ErniError {
    #[error("ill-formed type: {0}")]
    IllFormed(String),
    #[error("program does not have the observation type: {0}")]
    NotSimplyTyped(TypeError),
    #[error("program is not security-typed at the observation type: {0}")]
    NotSecurityTyped(TypeError),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
}

struct Choice {
    t1: Type,
    t2: Type,
    pairs: Vec<(Value, Value)>,
    masks: Vec<u32>,
}

struct VarSpace {
    name: Name,
    choices: Vec<Choice>,
    size: usize,
}

enum Source {
    Space(Vec<VarSpace>),
    Listed(Vec<RelEnv>),
}

/// Relation environments in a fixed, replayable order.
pub struct RelEnvStream {
    source: Source,
    len: usize,
    next: usize,
}

impl RelEnvStream {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `i`-th environment. The last type variable varies fastest.
    pub fn get(&self, i: usize) -> RelEnv {
        match &self.source {
            Source::Listed(list) => list[i].clone(),
            Source::Space(vars) => {
                let mut digits = vec![0; vars.len()];
                let mut rest = i;
                for (d, v) in digits.iter_mut().zip(vars).rev() {
                    *d = rest % v.size;
                    rest /= v.size;
                }
                let mut rho = RelEnv::new();
                for (mut d, v) in digits.into_iter().zip(vars) {
                    for c in &v.choices {
                        if d < c.masks.len() {
                            let mask = c.masks[d];
                            let rel =
                                (0..c.pairs.len()).filter(|k| mask >> k & 1 == 1).map(|k| c.pairs[k].clone()).collect();
                            rho.insert(&v.name, RelEntry { t1: c.t1.clone(), t2: c.t2.clone(), rel });
                            break;
                        }
                        d -= c.masks.len();
                    }
                }
                rho
            }
        }
    }
}

impl Iterator for RelEnvStream {
    type Item = RelEnv;

    fn next(&mut self) -> Option<RelEnv> {
        if self.next == self.len {
            return None;
        }
        self.next += 1;
        Some(self.get(self.next - 1))
    }
}

fn representation_choices(x: &str, bound: &Type, dom: &DomainSpec) -> Result<Vec<(Type, Type)>, String> {
    if matches!(bound, Type::Var(y) if y == x) {
        let prims = Prim::ALL.iter().map(|p| Type::Prim(*p));
        return Ok(if dom.hetero {
            prims.clone().flat_map(|a| prims.clone().map(move |b| (a.clone(), b))).collect()
        } else {
            prims.map(|p| (p.clone(), p)).collect()
        });
    }
    if !bound.free_vars().is_empty() {
        return Err(format!("type variable `{x}` stands for `{bound}`, which is not closed"));
    }
    Ok(vec![(bound.clone(), bound.clone())])
}

/// `D⟦Δ⟧` restricted to the finite model. An error string means the
/// requested search does not fit the budget.
pub fn enum_rel_envs(delta: &TyVarEnv, dom: &DomainSpec, mode: &Mode) -> Result<RelEnvStream, String> {
    if let Mode::Witness { rho, .. } = mode {
        return Ok(RelEnvStream { source: Source::Listed(vec![rho.clone()]), len: 1, next: 0 });
    }
    let ctx = Ctx::new(dom, RelEnv::new());
    let mut vars = Vec::new();
    for (x, bound) in delta.iter() {
        let mut choices = Vec::new();
        for (t1, t2) in representation_choices(x, bound, dom)? {
            let c1 = ctx.values(Side::Left, &t1);
            let c2 = ctx.values(Side::Right, &t2);
            if !(c1.complete && c2.complete) && *mode == Mode::Exhaustive {
                return Err(format!("the values of `{t1}` cannot be enumerated exhaustively"));
            }
            let pairs: Vec<(Value, Value)> =
                c1.values.iter().flat_map(|a| c2.values.iter().map(move |b| (a.clone(), b.clone()))).collect();
            let masks = if *mode == Mode::Exhaustive {
                if pairs.len() > dom.max_relation_pairs {
                    return Err(format!(
                        "relations over `{t1}` x `{t2}` have {} candidate pairs; exhaustive search allows {}",
                        pairs.len(),
                        dom.max_relation_pairs
                    ));
                }
                subsets_by_size(pairs.len()).map(|s| s.iter().fold(0u32, |m, &i| m | 1 << i)).collect()
            } else {
                Vec::new()
            };
            choices.push(Choice { t1, t2, pairs, masks });
        }
        let size = choices.iter().map(|c| c.masks.len()).sum();
        vars.push(VarSpace { name: x.clone(), choices, size });
    }
    match mode {
        Mode::Exhaustive => {
            let len = vars.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.size)).filter(|n| *n <= dom.max_rel_envs);
            match len {
                Some(len) => Ok(RelEnvStream { source: Source::Space(vars), len, next: 0 }),
                None => Err(format!("more than {} relation environments", dom.max_rel_envs)),
            }
        }
        Mode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut list = Vec::with_capacity(*samples);
            for _ in 0..*samples {
                let mut rho = RelEnv::new();
                for v in &vars {
                    let c = &v.choices[rng.random_range(0..v.choices.len())];
                    let rel = c.pairs.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
                    rho.insert(&v.name, RelEntry { t1: c.t1.clone(), t2: c.t2.clone(), rel });
                }
                list.push(rho);
            }
            Ok(RelEnvStream { source: Source::Listed(list), len: *samples, next: 0 })
        }
        Mode::Witness { .. } => unreachable!("handled above"),
    }
}

/// Input pairs related at every binding of `Γ`, in a fixed order.
pub struct SubstPairs {
    names: Vec<Name>,
    choices: Vec<Vec<(Value, Value)>>,
    len: usize,
    /// False when some binding's related pairs could not be enumerated in
    /// full, or the product was truncated.
    pub complete: bool,
}

impl SubstPairs {
    fn build(ctx: &Ctx, gamma: &TypeEnv) -> SubstPairs {
        let mut names = Vec::new();
        let mut choices = Vec::new();
        let mut complete = true;
        for (x, s) in gamma.iter() {
            let pairs = ctx.related_pairs(s);
            complete &= pairs.complete;
            names.push(x.clone());
            choices.push(pairs.pairs.clone());
        }
        let full = choices.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
        let len = match full {
            Some(n) if n <= ctx.dom.max_subst_pairs => n,
            _ => {
                complete = false;
                ctx.dom.max_subst_pairs
            }
        };
        SubstPairs { names, choices, len, complete }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> SubstPair {
        let mut rest = i;
        let mut bindings = Vec::with_capacity(self.names.len());
        for (name, c) in self.names.iter().zip(&self.choices).rev() {
            let (a, b) = &c[rest % c.len()];
            rest /= c.len();
            bindings.push((name.clone(), a.clone(), b.clone()));
        }
        bindings.reverse();
        SubstPair { bindings }
    }

    pub fn iter(&self) -> impl Iterator<Item = SubstPair> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// `G⟦Γ⟧ρ` restricted to the finite model.
pub fn enum_subst_pairs(gamma: &TypeEnv, rho: &RelEnv, dom: &DomainSpec) -> SubstPairs {
    SubstPairs::build(&Ctx::new(dom, rho.clone()), gamma)
}

#[allow(clippy::large_enum_variant)]
enum EnvOutcome {
    Holds(usize),
    Violated(SubstPair, Option<(Value, Value)>),
    Unknown(String, usize),
}

fn check_env(gamma: &TypeEnv, e: &Term, s: &SecType, dom: &DomainSpec, rho: &RelEnv) -> EnvOutcome {
    let ctx = Ctx::new(dom, rho.clone());
    let e1 = rho.apply_term(Side::Left, e);
    let e2 = rho.apply_term(Side::Right, e);
    let inputs = SubstPairs::build(&ctx, gamma);
    let mut unknown = (!inputs.complete).then(|| "input pairs could not be enumerated within the budget".to_string());
    for sp in inputs.iter() {
        let (truth, outputs) = ctx.in_expr(s, &sp.apply(Side::Left, &e1), &sp.apply(Side::Right, &e2));
        match truth {
            Truth::Yes => {}
            Truth::No => return EnvOutcome::Violated(sp, outputs),
            Truth::Unknown => {
                unknown.get_or_insert_with(|| {
                    let mut msg = String::from("could not decide the outputs for inputs ");
                    msg.push_str(&witness::render_subst(&sp).replace('\n', "; "));
                    msg
                });
            }
        }
    }
    match unknown {
        Some(reason) => EnvOutcome::Unknown(reason, inputs.len()),
        None => EnvOutcome::Holds(inputs.len()),
    }
}

fn preconditions(delta: &TyVarEnv, gamma: &TypeEnv, e: &Term, s: &SecType) -> Result<(), ErniError> {
    for (x, sx) in gamma.iter() {
        check_wf(delta, sx).map_err(|err| ErniError::IllFormed(format!("input `{x}`: {err}")))?;
    }
    check_wf(delta, s).map_err(|err| ErniError::IllFormed(format!("observation type: {err}")))?;
    let found = simple_type_of(&delta.names(), &erase_env(gamma), e).map_err(ErniError::NotSimplyTyped)?;
    let want = erase(s);
    if found != want {
        return Err(ErniError::NotSimplyTyped(TypeError {
            kind: TypeErrorKind::Mismatch,
            span: e.span,
            message: "erased program type differs from the erased observation type".into(),
            expected: Some(want.to_string()),
            found: Some(found.to_string()),
        }));
    }
    Ok(())
}

fn validate_witness(
    delta: &TyVarEnv,
    gamma: &TypeEnv,
    dom: &DomainSpec,
    rho: &RelEnv,
    sp: &SubstPair,
) -> Result<(), ErniError> {
    let bad = |m: String| Err(ErniError::InvalidWitness(m));
    for (x, _) in rho.iter() {
        if !delta.contains(x) {
            return bad(format!("`{x}` is not a declared type variable"));
        }
    }
    for (x, bound) in delta.iter() {
        let Some(entry) = rho.get(x) else {
            return bad(format!("no relation given for `{x}`"));
        };
        for t in [&entry.t1, &entry.t2] {
            if let Err(e) = check_wf_safety(&TyVarEnv::new(), t) {
                return bad(format!("representation `{t}` of `{x}`: {e}"));
            }
            if !(precise(t, bound) || matches!(bound, Type::Var(y) if y == x)) {
                return bad(format!("`{t}` cannot represent `{x}`, which stands for `{bound}`"));
            }
        }
        let (s1, s2) = (erase_safety(&entry.t1), erase_safety(&entry.t2));
        for (a, b) in &entry.rel {
            if value_simple_type(a).as_ref() != Some(&s1) || value_simple_type(b).as_ref() != Some(&s2) {
                return bad(format!("pair ({a}, {b}) of `{x}` does not have types ({}, {})", entry.t1, entry.t2));
            }
        }
    }
    for (x, _, _) in &sp.bindings {
        if gamma.lookup(x).is_none() {
            return bad(format!("`{x}` is not a declared input"));
        }
    }
    let ctx = Ctx::new(dom, rho.clone());
    for (x, s) in gamma.iter() {
        let Some((v1, v2)) = sp.get(x) else {
            return bad(format!("no values given for input `{x}`"));
        };
        match ctx.in_value(s, v1, v2) {
            Truth::Yes => {}
            Truth::No => return bad(format!("inputs for `{x}` are not related at `{s}`")),
            Truth::Unknown => return bad(format!("could not confirm that the inputs for `{x}` are related at `{s}`")),
        }
    }
    Ok(())
}

/// Searches for a counterexample to existential relaxed noninterference of
/// `e` at observation type `s`.
pub fn check_erni(
    delta: &TyVarEnv,
    gamma: &TypeEnv,
    e: &Term,
    s: &SecType,
    dom: &DomainSpec,
    mode: &Mode,
) -> Result<Verdict, ErniError> {
    preconditions(delta, gamma, e, s)?;
    if let Mode::Witness { rho, gamma: sp } = mode {
        validate_witness(delta, gamma, dom, rho, sp)?;
        let ctx = Ctx::new(dom, rho.clone());
        let e1 = sp.apply(Side::Left, &rho.apply_term(Side::Left, e));
        let e2 = sp.apply(Side::Right, &rho.apply_term(Side::Right, e));
        let (truth, outputs) = ctx.in_expr(s, &e1, &e2);
        return Ok(match truth {
            Truth::Yes => Verdict::Holds { mode: "witness", rel_envs: 1, substitutions: 1 },
            Truth::No => Verdict::Violated { rho: rho.clone(), gamma: sp.clone(), outputs },
            Truth::Unknown => Verdict::Inconclusive { reason: "could not decide the outputs of the witness".into() },
        });
    }
    let stream = match enum_rel_envs(delta, dom, mode) {
        Ok(stream) => stream,
        Err(reason) => return Ok(Verdict::Inconclusive { reason }),
    };
    let chunk = (rayon::current_num_threads() * 4).max(16);
    let mut substitutions = 0;
    let mut unknown: Option<String> = None;
    let mut start = 0;
    while start < stream.len() {
        let end = (start + chunk).min(stream.len());
        let outcomes: Vec<(RelEnv, EnvOutcome)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let rho = stream.get(i);
                let outcome = check_env(gamma, e, s, dom, &rho);
                (rho, outcome)
            })
            .collect();
        for (rho, outcome) in outcomes {
            match outcome {
                EnvOutcome::Holds(n) => substitutions += n,
                EnvOutcome::Unknown(reason, n) => {
                    substitutions += n;
                    unknown.get_or_insert(reason);
                }
                EnvOutcome::Violated(gamma, outputs) => return Ok(Verdict::Violated { rho, gamma, outputs }),
            }
        }
        start = end;
    }
    Ok(match (unknown, mode) {
        (Some(reason), _) => Verdict::Inconclusive { reason },
        (None, Mode::Sampled { samples, seed }) => {
            Verdict::Inconclusive { reason: format!("no violation found ({samples} samples, seed {seed})") }
        }
        (None, _) => Verdict::Holds { mode: mode.name(), rel_envs: stream.len(), substitutions },
    })
}

/// Like [`check_erni`], but first requires `e` to be security-typed at a
/// subtype of `s`. A `Violated` verdict here contradicts soundness.
pub fn check_self_related(
    delta: &TyVarEnv,
    gamma: &TypeEnv,
    e: &Term,
    s: &SecType,
    dom: &DomainSpec,
    mode: &Mode,
) -> Result<Verdict, ErniError> {
    let found = type_of(delta, gamma, e).map_err(ErniError::NotSecurityTyped)?;
    if !subtype(&found, s) {
        return Err(ErniError::NotSecurityTyped(TypeError {
            kind: TypeErrorKind::Mismatch,
            span: e.span,
            message: "program type is not a subtype of the observation type".into(),
            expected: Some(s.to_string()),
            found: Some(found.to_string()),
        }));
    }
    check_erni(delta, gamma, e, s, dom, mode)
}
