//! Faceted existential security types.
//!
//! The crate provides a parser and pretty-printer for a small call-by-value
//! calculus with faceted security types and existential packages, a security
//! type checker, a small-step evaluator, and an executable logical relation
//! that searches finite models for noninterference counterexamples.

pub mod eval;
pub mod generate;
pub mod lrcheck;
pub mod parser;
pub mod pretty;
pub mod selftest;
pub mod syntax;
pub mod typecheck;

pub use eval::{eval, step, theta, theta_unary, trace, EvalError, StepResult, StuckReason, Trace, Value};
pub use lrcheck::{
    check_erni, check_self_related, enum_rel_envs, enum_subst_pairs, in_expr_rel, in_value_rel, DomainSpec, ErniError,
    Mode, RelEntry, RelEnv, SubstPair, Truth, Verdict,
};
pub use parser::{parse, parse_safety_type, parse_sec_type, parse_term, ParseError, SourceProgram};
pub use syntax::{
    check_wf, erase, rep_type, wf_security_type, BinOp, Literal, Name, Prim, SecType, Simple, Span, Term, TermKind,
    TyVarEnv, Type, TypeEnv, UnOp,
};
pub use typecheck::{precise, simple_type_of, stamp, subtype, type_of, TypeError, TypeErrorKind};
