//! Executable logical relation and the noninterference checker.
//!
//! Every quantifier of the relation ranges over a finite model described by
//! a [`DomainSpec`]: primitive carriers, function tables over first-order
//! domains, and the closed closures of the program under test. Answers are
//! three-valued; `Unknown` means the finite model was too small or a budget
//! ran out.

mod domain;
mod relation;
mod search;
pub mod witness;

use std::fmt;

use crate::eval::Value;
use crate::syntax::{Name, Term, Type};

pub use domain::DomainSpec;
pub use relation::{in_expr_rel, in_value_rel, values_of};
pub use search::{
    check_erni, check_self_related, enum_rel_envs, enum_subst_pairs, ErniError, Mode, RelEnvStream, SubstPairs, Verdict,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Truth {
    Yes,
    No,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::Yes
        } else {
            Truth::No
        }
    }

    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::No, _) | (_, Truth::No) => Truth::No,
            (Truth::Yes, Truth::Yes) => Truth::Yes,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::Yes, _) | (_, Truth::Yes) => Truth::Yes,
            (Truth::No, Truth::No) => Truth::No,
            _ => Truth::Unknown,
        }
    }

    pub fn is_yes(self) -> bool {
        self == Truth::Yes
    }
}

/// Which run of a relational comparison a value or type belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Interpretation of one abstract type: two representation types and a
/// relation between their values.
#[derive(Clone, Debug, PartialEq)]
pub struct RelEntry {
    pub t1: Type,
    pub t2: Type,
    pub rel: Vec<(Value, Value)>,
}

impl RelEntry {
    pub fn contains(&self, v1: &Value, v2: &Value) -> bool {
        self.rel.iter().any(|(a, b)| a.matches(v1) && b.matches(v2))
    }

    pub fn side(&self, side: Side) -> &Type {
        match side {
            Side::Left => &self.t1,
            Side::Right => &self.t2,
        }
    }
}

/// `ρ`: an interpretation for each type variable in scope.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelEnv {
    entries: Vec<(Name, RelEntry)>,
}

impl RelEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &str) -> Option<&RelEntry> {
        self.entries.iter().rev().find(|(n, _)| n == x).map(|(_, e)| e)
    }

    /// Adds or replaces the interpretation of `x`.
    pub fn insert(&mut self, x: &str, entry: RelEntry) {
        self.entries.retain(|(n, _)| n != x);
        self.entries.push((x.to_string(), entry));
    }

    pub fn with(&self, x: &str, entry: RelEntry) -> RelEnv {
        let mut out = self.clone();
        out.insert(x, entry);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &RelEntry)> {
        self.entries.iter().map(|(n, e)| (n, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `ρ₁(T)` or `ρ₂(T)`.
    pub fn apply(&self, side: Side, t: &Type) -> Type {
        self.entries.iter().fold(t.clone(), |t, (x, e)| t.subst(x, e.side(side)))
    }

    /// Substitutes representation types into every annotation of `e`.
    pub fn apply_term(&self, side: Side, e: &Term) -> Term {
        self.entries.iter().fold(e.clone(), |t, (x, entry)| t.subst_type(x, entry.side(side)))
    }
}

impl fmt::Display for RelEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&witness::render_rel_env(self))
    }
}

/// `(γ₁, γ₂)`: two value substitutions with the same domain.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubstPair {
    pub bindings: Vec<(Name, Value, Value)>,
}

impl SubstPair {
    pub fn get(&self, x: &str) -> Option<(&Value, &Value)> {
        self.bindings.iter().find(|(n, _, _)| n == x).map(|(_, a, b)| (a, b))
    }

    pub fn value(&self, side: Side, x: &str) -> Option<&Value> {
        self.get(x).map(|(a, b)| if side == Side::Left { a } else { b })
    }

    /// `γ₁(e)` or `γ₂(e)`.
    pub fn apply(&self, side: Side, e: &Term) -> Term {
        self.bindings.iter().fold(e.clone(), |t, (x, v1, v2)| {
            let v = if side == Side::Left { v1 } else { v2 };
            t.subst(x, &v.to_term())
        })
    }
}
