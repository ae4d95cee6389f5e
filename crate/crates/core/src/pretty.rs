//! Pretty-printing with minimal parentheses. Output reparses to an
//! alpha-equivalent value.

use std::fmt;

use crate::syntax::{BinOp, Literal, SecType, Simple, Term, TermKind, Type};

// Type precedence: 0 arrow / exists, 1 sum, 2 product, 3 faceted, 4 atom.
const TY_ATOM: u8 = 4;

pub fn safety(t: &Type) -> String {
    let mut out = String::new();
    write_safety(&mut out, t, 0);
    out
}

pub fn sec(s: &SecType) -> String {
    let mut out = String::new();
    write_sec(&mut out, s, 0);
    out
}

fn write_sec(out: &mut String, s: &SecType, prec: u8) {
    let wrap = prec > 3;
    if wrap {
        out.push('(');
    }
    if s.is_public() {
        out.push_str("pub ");
        write_safety(out, &s.safety, TY_ATOM);
    } else if matches!(s.declass, Type::Top) {
        out.push_str("priv ");
        write_safety(out, &s.safety, TY_ATOM);
    } else {
        write_safety(out, &s.safety, TY_ATOM);
        out.push('!');
        write_safety(out, &s.declass, TY_ATOM);
    }
    if wrap {
        out.push(')');
    }
}

fn write_safety(out: &mut String, t: &Type, prec: u8) {
    let own = match t {
        Type::Fun(..) | Type::Exists(..) => 0,
        Type::Sum(..) => 1,
        Type::Pair(..) => 2,
        _ => TY_ATOM,
    };
    let wrap = own < prec;
    if wrap {
        out.push('(');
    }
    match t {
        Type::Prim(p) => out.push_str(p.name()),
        Type::Unit => out.push_str("Unit"),
        Type::Top => out.push_str("Top"),
        Type::Var(x) => out.push_str(x),
        Type::Fun(a, b) => {
            write_sec(out, a, 1);
            out.push_str(" -> ");
            write_sec(out, b, 0);
        }
        Type::Sum(a, b) => {
            write_sec(out, a, 1);
            out.push_str(" + ");
            write_sec(out, b, 2);
        }
        Type::Pair(a, b) => {
            write_sec(out, a, 2);
            out.push_str(" * ");
            write_sec(out, b, 3);
        }
        Type::Exists(x, body) => {
            out.push_str("exists ");
            out.push_str(x);
            out.push_str(". ");
            write_safety(out, body, 0);
        }
    }
    if wrap {
        out.push(')');
    }
}

pub fn simple(t: &Simple) -> String {
    let mut out = String::new();
    write_simple(&mut out, t, 0);
    out
}

fn write_simple(out: &mut String, t: &Simple, prec: u8) {
    let own = match t {
        Simple::Fun(..) | Simple::Exists(..) => 0,
        Simple::Sum(..) => 1,
        Simple::Pair(..) => 2,
        _ => TY_ATOM,
    };
    let wrap = own < prec;
    if wrap {
        out.push('(');
    }
    match t {
        Simple::Prim(p) => out.push_str(p.name()),
        Simple::Unit => out.push_str("Unit"),
        Simple::Top => out.push_str("Top"),
        Simple::Var(x) => out.push_str(x),
        Simple::Fun(a, b) => {
            write_simple(out, a, 1);
            out.push_str(" -> ");
            write_simple(out, b, 0);
        }
        Simple::Sum(a, b) => {
            write_simple(out, a, 1);
            out.push_str(" + ");
            write_simple(out, b, 2);
        }
        Simple::Pair(a, b) => {
            write_simple(out, a, 2);
            out.push_str(" * ");
            write_simple(out, b, 3);
        }
        Simple::Exists(x, body) => {
            out.push_str("exists ");
            out.push_str(x);
            out.push_str(". ");
            write_simple(out, body, 0);
        }
    }
    if wrap {
        out.push(')');
    }
}

// Term precedence: 0 binding forms, 1 comparison, 2 concat, 3 additive,
// 4 multiplicative, 5 prefix operators, 6 application, 7 atom.
const ATOM: u8 = 7;

pub fn term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, 0);
    out
}

pub fn literal(l: &Literal) -> String {
    match l {
        Literal::Int(n) => n.to_string(),
        Literal::Bool(b) => b.to_string(),
        Literal::Str(s) => quote(s),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Eq | BinOp::Le => 1,
        BinOp::Concat => 2,
        BinOp::Add | BinOp::Sub => 3,
        BinOp::Mul | BinOp::Mod => 4,
    }
}

fn term_prec(t: &Term) -> u8 {
    match &t.kind {
        TermKind::Lam(..)
        | TermKind::Case { .. }
        | TermKind::Pack { .. }
        | TermKind::Open { .. }
        | TermKind::Inl(..)
        | TermKind::Inr(..) => 0,
        TermKind::BinOp(op, ..) => binop_prec(*op),
        TermKind::UnOp(..) | TermKind::Fst(_) | TermKind::Snd(_) => 5,
        TermKind::Lit(Literal::Int(n)) if *n < 0 => 5,
        TermKind::App(..) => 6,
        _ => ATOM,
    }
}

fn write_term(out: &mut String, t: &Term, prec: u8) {
    let wrap = term_prec(t) < prec;
    if wrap {
        out.push('(');
    }
    match &t.kind {
        TermKind::Var(x) => out.push_str(x),
        TermKind::Lit(l) => out.push_str(&literal(l)),
        TermKind::Unit => out.push_str("unit"),
        TermKind::Lam(x, s, body) => {
            out.push_str("fun (");
            out.push_str(x);
            out.push_str(": ");
            write_sec(out, s, 0);
            out.push_str(") => ");
            write_term(out, body, 0);
        }
        TermKind::App(f, a) => {
            write_term(out, f, 6);
            out.push(' ');
            write_term(out, a, ATOM);
        }
        TermKind::BinOp(op, a, b) => {
            let p = binop_prec(*op);
            // Comparisons do not associate; the rest associate to the left.
            let left = if p == 1 { 2 } else { p };
            write_term(out, a, left);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_term(out, b, p + 1);
        }
        TermKind::UnOp(op, a) => {
            out.push_str(op.symbol());
            out.push(' ');
            write_term(out, a, 5);
        }
        TermKind::Fst(a) => {
            out.push_str("fst ");
            write_term(out, a, 5);
        }
        TermKind::Snd(a) => {
            out.push_str("snd ");
            write_term(out, a, 5);
        }
        TermKind::Pair(a, b) => {
            out.push('(');
            write_term(out, a, 0);
            out.push_str(", ");
            write_term(out, b, 0);
            out.push(')');
        }
        TermKind::Inl(a, s) | TermKind::Inr(a, s) => {
            out.push_str(if matches!(t.kind, TermKind::Inl(..)) { "inl " } else { "inr " });
            write_term(out, a, 1);
            out.push_str(" : ");
            write_sec(out, s, 0);
        }
        TermKind::Case { scrutinee, left_var, left, right_var, right } => {
            out.push_str("case ");
            write_term(out, scrutinee, 0);
            out.push_str(" of inl ");
            out.push_str(left_var);
            out.push_str(" => ");
            write_term(out, left, 0);
            out.push_str(" | inr ");
            out.push_str(right_var);
            out.push_str(" => ");
            write_term(out, right, 0);
        }
        TermKind::Pack { witness, payload, annot } => {
            out.push_str("pack <");
            write_safety(out, witness, 0);
            out.push_str(", ");
            write_term(out, payload, 0);
            out.push_str("> as ");
            write_safety(out, annot, 0);
        }
        TermKind::Open { tyvar, var, package, body } => {
            out.push_str("open ");
            write_term(out, package, 0);
            out.push_str(" as <");
            out.push_str(tyvar);
            out.push_str(", ");
            out.push_str(var);
            out.push_str("> in ");
            write_term(out, body, 0);
        }
        TermKind::Table(table) => {
            out.push_str("table (");
            write_sec(out, &table.domain, 1);
            out.push_str(" -> ");
            write_sec(out, &table.codomain, 0);
            out.push_str(") {");
            for (i, (k, v)) in table.entries.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { ", " });
                write_term(out, k, 1);
                out.push_str(" => ");
                write_term(out, v, 1);
            }
            out.push_str(" }");
        }
    }
    if wrap {
        out.push(')');
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&safety(self))
    }
}

impl fmt::Display for SecType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sec(self))
    }
}

impl fmt::Display for Simple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&simple(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&term(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_literal() {
        assert_eq!(term(&Term::pair(Term::int(1), Term::int(2))), "(1, 2)");
    }

    #[test]
    fn sugar_for_facets() {
        assert_eq!(sec(&SecType::private(Type::int())), "priv Int");
        assert_eq!(sec(&SecType::public(Type::bool())), "pub Bool");
        let ex = Type::exists("X", Type::pair(SecType::new(Type::int(), Type::var("X")), SecType::public(Type::Unit)));
        assert_eq!(safety(&ex), "exists X. Int!X * pub Unit");
        let ex = Type::exists("X", Type::var("X"));
        assert_eq!(safety(&ex), "exists X. X");
    }

    #[test]
    fn operator_parenthesization() {
        let t = Term::binop(BinOp::Sub, Term::int(1), Term::binop(BinOp::Sub, Term::int(2), Term::int(3)));
        assert_eq!(term(&t), "1 - (2 - 3)");
        let t = Term::binop(BinOp::Sub, Term::binop(BinOp::Sub, Term::int(1), Term::int(2)), Term::int(3));
        assert_eq!(term(&t), "1 - 2 - 3");
        let t = Term::app(Term::snd(Term::var("x")), Term::fst(Term::var("x")));
        assert_eq!(term(&t), "(snd x) (fst x)");
        let t = Term::binop(BinOp::Mod, Term::fst(Term::var("x")), Term::int(2));
        assert_eq!(term(&t), "fst x % 2");
        assert_eq!(term(&Term::app(Term::var("f"), Term::int(-5))), "f (-5)");
    }
}
