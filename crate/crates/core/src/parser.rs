//! Lexer and recursive-descent parser for `.fsec` source files.
//!
//! A file is a sequence of header items followed by the main expression:
//!
//! ```text
//! tyvar X : Int;                          -- abstract type and its representation
//! input x : pub (Int!X * (Int!X -> pub Bool));
//! observe pub Bool;                       -- observation type for `erni`
//! carrier Int = 100000, 100001, 100002;   -- finite domain for `erni`
//! let two = 1 + 1;
//! (snd x) (fst x)
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::BinOp;
use crate::syntax::{
    check_wf, FnTable, Literal, Name, Prim, SecType, Span, Term, TermKind, TyVarEnv, Type, TypeEnv, UnOp,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
    pub message: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.span)?;
        if let Some(msg) = &self.message {
            return f.write_str(msg);
        }
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}, found {}", many.join(", "), self.found),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "integer `{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

// Longest match first.
const SYMBOLS: &[&str] = &[
    ":=", "=>", "->", "==", "<=", "++", "(", ")", ",", ":", "!", "+", "-", "*", "%", "<", ">", "|", ".", ";", "{", "}",
    "=",
];

const KEYWORDS: &[&str] = &[
    "fun", "case", "of", "inl", "inr", "pack", "as", "open", "in", "exists", "unit", "true", "false", "fst", "snd",
    "length", "pub", "priv", "let", "input", "tyvar", "observe", "carrier", "table", "Int", "Bool", "String", "Unit",
    "Top",
];

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start, &chars);
            out.push((Tok::Ident(word), span));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start, &chars);
            out.push((Tok::Int(digits), span));
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    None | Some('\n') => {
                        return Err(ParseError {
                            span,
                            expected: vec![],
                            found: "unterminated string".into(),
                            message: Some("unterminated string literal".into()),
                        })
                    }
                    Some('"') => break,
                    Some('\\') => {
                        let esc = match chars.get(j + 1) {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('"') => '"',
                            Some('\\') => '\\',
                            _ => {
                                return Err(ParseError {
                                    span,
                                    expected: vec![],
                                    found: "bad escape".into(),
                                    message: Some("invalid escape sequence in string literal".into()),
                                })
                            }
                        };
                        s.push(esc);
                        j += 2;
                    }
                    Some(&c) => {
                        s.push(c);
                        j += 1;
                    }
                }
            }
            let n = j + 1 - i;
            advance(&mut i, &mut line, &mut col, n, &chars);
            out.push((Tok::Str(s), span));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                advance(&mut i, &mut line, &mut col, sym.len(), &chars);
                out.push((Tok::Sym(sym), span));
            }
            None => {
                return Err(ParseError { span, expected: vec![], found: format!("character `{c}`"), message: None })
            }
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

fn is_term_ident(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase() || c == '_') && !KEYWORDS.contains(&s)
}

fn is_type_ident(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase()) && !KEYWORDS.contains(&s)
}

/// A parsed type before deciding whether it stands for a safety type or a
/// security type. A bare safety type in security position means `pub T`.
#[derive(Clone, Debug)]
enum TyExpr {
    Bare(Type),
    Faceted(SecType),
}

/// A parsed `.fsec` file.
#[derive(Clone, Debug)]
pub struct SourceProgram {
    pub tyvars: TyVarEnv,
    pub inputs: Vec<(Name, SecType)>,
    pub observe: Option<SecType>,
    pub carriers: Vec<(Prim, Vec<Literal>)>,
    pub decls: Vec<(Name, Term)>,
    pub main: Term,
}

impl SourceProgram {
    /// The main expression with every `let` declaration inlined.
    pub fn resolved_main(&self) -> Term {
        let mut resolved: Vec<(Name, Term)> = Vec::new();
        for (name, body) in &self.decls {
            let body = resolved.iter().rev().fold(body.clone(), |t, (n, d)| t.subst(n, d));
            resolved.push((name.clone(), body));
        }
        resolved.iter().rev().fold(self.main.clone(), |t, (n, d)| t.subst(n, d))
    }

    /// Resolves `t` against the program's declarations.
    pub fn resolve(&self, t: &Term) -> Term {
        let mut resolved: Vec<(Name, Term)> = Vec::new();
        for (name, body) in &self.decls {
            let body = resolved.iter().rev().fold(body.clone(), |t, (n, d)| t.subst(n, d));
            resolved.push((name.clone(), body));
        }
        resolved.iter().rev().fold(t.clone(), |t, (n, d)| t.subst(n, d))
    }

    pub fn input_env(&self) -> TypeEnv {
        self.inputs.iter().cloned().collect()
    }
}

pub(crate) struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    allow_tables: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(crate) fn new(text: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(text)?, pos: 0, allow_tables: false })
    }

    pub(crate) fn allow_tables(mut self) -> Self {
        self.allow_tables = true;
        self
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub(crate) fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
            message: None,
        })
    }

    pub(crate) fn fail<T>(&self, span: Span, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { span, expected: vec![], found: String::new(), message: Some(message.into()) })
    }

    pub(crate) fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&[&format!("`{s}`")])
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.at_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&[&format!("`{k}`")])
        }
    }

    pub(crate) fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    pub(crate) fn term_ident(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) if is_term_ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["variable name"]),
        }
    }

    pub(crate) fn at_type_ident(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if is_type_ident(s))
    }

    pub(crate) fn type_ident(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) if is_type_ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["type variable"]),
        }
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<TyExpr> {
        if self.eat_kw("exists") {
            let mut vars = vec![self.type_ident()?];
            while self.eat_sym(",") {
                vars.push(self.type_ident()?);
            }
            self.expect_sym(".")?;
            let body_span = self.span();
            let body = self.ty()?;
            let mut t = self.to_safety(body, body_span)?;
            for v in vars.into_iter().rev() {
                t = Type::Exists(v, Box::new(t));
            }
            return Ok(TyExpr::Bare(t));
        }
        let lhs = self.ty_sum()?;
        if self.eat_sym("->") {
            let rhs = self.ty()?;
            return Ok(TyExpr::Bare(Type::fun(to_sec(lhs), to_sec(rhs))));
        }
        Ok(lhs)
    }

    fn ty_sum(&mut self) -> PResult<TyExpr> {
        let mut acc = self.ty_prod()?;
        while self.eat_sym("+") {
            let rhs = self.ty_prod()?;
            acc = TyExpr::Bare(Type::sum(to_sec(acc), to_sec(rhs)));
        }
        Ok(acc)
    }

    fn ty_prod(&mut self) -> PResult<TyExpr> {
        let mut acc = self.ty_facet()?;
        while self.eat_sym("*") {
            let rhs = self.ty_facet()?;
            acc = TyExpr::Bare(Type::pair(to_sec(acc), to_sec(rhs)));
        }
        Ok(acc)
    }

    fn ty_facet(&mut self) -> PResult<TyExpr> {
        let span = self.span();
        if self.eat_kw("pub") {
            let t = self.ty_atom()?;
            return Ok(TyExpr::Faceted(SecType::public(self.to_safety(t, span)?)));
        }
        if self.eat_kw("priv") {
            let t = self.ty_atom()?;
            return Ok(TyExpr::Faceted(SecType::private(self.to_safety(t, span)?)));
        }
        let left = self.ty_atom()?;
        if self.eat_sym("!") {
            let rspan = self.span();
            let right = self.ty_atom()?;
            let safety = self.to_safety(left, span)?;
            let declass = self.to_safety(right, rspan)?;
            return Ok(TyExpr::Faceted(SecType::new(safety, declass)));
        }
        Ok(left)
    }

    fn ty_atom(&mut self) -> PResult<TyExpr> {
        let t = match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "Int" => Type::int(),
                "Bool" => Type::bool(),
                "String" => Type::string(),
                "Unit" => Type::Unit,
                "Top" => Type::Top,
                s if is_type_ident(s) => Type::Var(s.to_string()),
                _ => return self.error(&["type"]),
            },
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym(")")?;
                return Ok(t);
            }
            _ => return self.error(&["type"]),
        };
        self.bump();
        Ok(TyExpr::Bare(t))
    }

    fn to_safety(&self, t: TyExpr, span: Span) -> PResult<Type> {
        match t {
            TyExpr::Bare(t) => Ok(t),
            TyExpr::Faceted(s) if s.is_public() => Ok(s.safety),
            TyExpr::Faceted(s) => self.fail(span, format!("expected a safety type, found faceted type `{s}`")),
        }
    }

    pub(crate) fn sec_type(&mut self) -> PResult<SecType> {
        Ok(to_sec(self.ty()?))
    }

    pub(crate) fn safety_type(&mut self) -> PResult<Type> {
        let span = self.span();
        let t = self.ty()?;
        self.to_safety(t, span)
    }

    // ---- terms ----

    pub(crate) fn expr(&mut self) -> PResult<Term> {
        let span = self.span();
        match self.peek() {
            Tok::Ident(k) if k == "fun" => {
                self.bump();
                self.expect_sym("(")?;
                let x = self.term_ident()?;
                self.expect_sym(":")?;
                let s = self.sec_type()?;
                self.expect_sym(")")?;
                self.expect_sym("=>")?;
                let body = self.expr()?;
                Ok(Term::new(TermKind::Lam(x, s, Box::new(body)), span))
            }
            Tok::Ident(k) if k == "case" => {
                self.bump();
                let scrutinee = self.expr()?;
                self.expect_kw("of")?;
                self.expect_kw("inl")?;
                let left_var = self.term_ident()?;
                self.expect_sym("=>")?;
                let left = self.expr()?;
                self.expect_sym("|")?;
                self.expect_kw("inr")?;
                let right_var = self.term_ident()?;
                self.expect_sym("=>")?;
                let right = self.expr()?;
                Ok(Term::new(
                    TermKind::Case {
                        scrutinee: Box::new(scrutinee),
                        left_var,
                        left: Box::new(left),
                        right_var,
                        right: Box::new(right),
                    },
                    span,
                ))
            }
            Tok::Ident(k) if k == "inl" || k == "inr" => {
                let left = k == "inl";
                self.bump();
                let payload = self.cmp()?;
                self.expect_sym(":")?;
                let s = self.sec_type()?;
                let kind = if left { TermKind::Inl(Box::new(payload), s) } else { TermKind::Inr(Box::new(payload), s) };
                Ok(Term::new(kind, span))
            }
            Tok::Ident(k) if k == "pack" => {
                self.bump();
                self.pack(span)
            }
            Tok::Ident(k) if k == "open" => {
                self.bump();
                let package = self.expr()?;
                self.expect_kw("as")?;
                self.expect_sym("<")?;
                let mut tyvars = vec![self.type_ident()?];
                self.expect_sym(",")?;
                while matches!(self.peek(), Tok::Ident(s) if is_type_ident(s)) {
                    tyvars.push(self.type_ident()?);
                    self.expect_sym(",")?;
                }
                let var = self.term_ident()?;
                self.expect_sym(">")?;
                self.expect_kw("in")?;
                let body = self.expr()?;
                // `open e as <X, Y, x> in b` opens the nested packages one at a time.
                let mut inner = body;
                for (i, tv) in tyvars.iter().enumerate().rev() {
                    let pkg = if i == 0 { package.clone() } else { Term::new(TermKind::Var(var.clone()), span) };
                    inner = Term::new(
                        TermKind::Open {
                            tyvar: tv.clone(),
                            var: var.clone(),
                            package: Box::new(pkg),
                            body: Box::new(inner),
                        },
                        span,
                    );
                }
                Ok(inner)
            }
            _ => self.cmp(),
        }
    }

    fn pack(&mut self, span: Span) -> PResult<Term> {
        self.expect_sym("<")?;
        let mut witnesses = Vec::new();
        loop {
            let save = self.pos;
            if let Ok(t) = self.safety_type() {
                if self.eat_sym(",") {
                    witnesses.push(t);
                    continue;
                }
            }
            self.pos = save;
            break;
        }
        if witnesses.is_empty() {
            return self.error(&["representation type"]);
        }
        let payload = self.expr()?;
        self.expect_sym(">")?;
        self.expect_kw("as")?;
        let annot_span = self.span();
        let annot = self.safety_type()?;
        build_pack(&witnesses, annot, payload, span).or_else(|msg| self.fail(annot_span, msg))
    }

    fn cmp(&mut self) -> PResult<Term> {
        let lhs = self.concat()?;
        let span = lhs.span;
        let op = if self.eat_sym("==") {
            BinOp::Eq
        } else if self.eat_sym("<=") {
            BinOp::Le
        } else {
            return Ok(lhs);
        };
        let rhs = self.concat()?;
        Ok(Term::new(TermKind::BinOp(op, Box::new(lhs), Box::new(rhs)), span))
    }

    fn concat(&mut self) -> PResult<Term> {
        let mut acc = self.additive()?;
        while self.eat_sym("++") {
            let rhs = self.additive()?;
            let span = acc.span;
            acc = Term::new(TermKind::BinOp(BinOp::Concat, Box::new(acc), Box::new(rhs)), span);
        }
        Ok(acc)
    }

    fn additive(&mut self) -> PResult<Term> {
        let mut acc = self.multiplicative()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(acc);
            };
            let rhs = self.multiplicative()?;
            let span = acc.span;
            acc = Term::new(TermKind::BinOp(op, Box::new(acc), Box::new(rhs)), span);
        }
    }

    fn multiplicative(&mut self) -> PResult<Term> {
        let mut acc = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("%") {
                BinOp::Mod
            } else {
                return Ok(acc);
            };
            let rhs = self.unary()?;
            let span = acc.span;
            acc = Term::new(TermKind::BinOp(op, Box::new(acc), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> PResult<Term> {
        let span = self.span();
        if self.eat_kw("fst") {
            let a = self.unary()?;
            return Ok(Term::new(TermKind::Fst(Box::new(a)), span));
        }
        if self.eat_kw("snd") {
            let a = self.unary()?;
            return Ok(Term::new(TermKind::Snd(Box::new(a)), span));
        }
        if self.eat_kw("length") {
            let a = self.unary()?;
            return Ok(Term::new(TermKind::UnOp(UnOp::Length, Box::new(a)), span));
        }
        if self.at_sym("-") && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            let Tok::Int(digits) = self.bump() else { unreachable!() };
            return match format!("-{digits}").parse::<i64>() {
                Ok(n) => Ok(Term::new(TermKind::Lit(Literal::Int(n)), span)),
                Err(_) => self.fail(span, format!("integer literal -{digits} out of range")),
            };
        }
        self.application()
    }

    fn application(&mut self) -> PResult<Term> {
        let mut acc = self.atom()?;
        while self.at_atom_start() {
            let arg = self.atom()?;
            let span = acc.span;
            acc = Term::new(TermKind::App(Box::new(acc), Box::new(arg)), span);
        }
        Ok(acc)
    }

    fn at_atom_start(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Str(_) => true,
            Tok::Sym(s) => *s == "(",
            Tok::Ident(s) => {
                is_term_ident(s)
                    || matches!(s.as_str(), "unit" | "true" | "false")
                    || (self.allow_tables && s == "table")
            }
            Tok::Eof => false,
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(digits) => {
                self.bump();
                match digits.parse::<i64>() {
                    Ok(n) => Ok(Term::new(TermKind::Lit(Literal::Int(n)), span)),
                    Err(_) => self.fail(span, format!("integer literal {digits} out of range")),
                }
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::new(TermKind::Lit(Literal::Str(s)), span))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Term::new(TermKind::Lit(Literal::Bool(s == "true")), span))
            }
            Tok::Ident(s) if s == "unit" => {
                self.bump();
                Ok(Term::new(TermKind::Unit, span))
            }
            Tok::Ident(s) if s == "table" && self.allow_tables => {
                self.bump();
                self.table(span)
            }
            Tok::Ident(s) if is_term_ident(&s) => {
                self.bump();
                Ok(Term::new(TermKind::Var(s), span))
            }
            Tok::Sym("(") => {
                self.bump();
                let first = self.expr()?;
                if self.eat_sym(",") {
                    let second = self.expr()?;
                    self.expect_sym(")")?;
                    return Ok(Term::new(TermKind::Pair(Box::new(first), Box::new(second)), span));
                }
                self.expect_sym(")")?;
                Ok(first)
            }
            _ => self.error(&["expression"]),
        }
    }

    fn table(&mut self, span: Span) -> PResult<Term> {
        self.expect_sym("(")?;
        let tspan = self.span();
        let ty = self.safety_type()?;
        self.expect_sym(")")?;
        let Type::Fun(domain, codomain) = ty else {
            return self.fail(tspan, "table type must be a function type");
        };
        self.expect_sym("{")?;
        let mut entries = Vec::new();
        if !self.at_sym("}") {
            loop {
                let k = self.cmp()?;
                self.expect_sym("=>")?;
                let v = self.cmp()?;
                entries.push((k, v));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("}")?;
        Ok(Term::new(TermKind::Table(FnTable { domain: *domain, codomain: *codomain, entries }), span))
    }

    pub(crate) fn literal(&mut self) -> PResult<Literal> {
        let span = self.span();
        let t = self.unary()?;
        match t.kind {
            TermKind::Lit(l) => Ok(l),
            _ => self.fail(span, "expected a literal"),
        }
    }

    // ---- programs ----

    fn program(&mut self) -> PResult<SourceProgram> {
        let mut prog = SourceProgram {
            tyvars: TyVarEnv::new(),
            inputs: Vec::new(),
            observe: None,
            carriers: Vec::new(),
            decls: Vec::new(),
            main: Term::unit(),
        };
        let mut names = BTreeSet::new();
        loop {
            let span = self.span();
            if self.eat_kw("tyvar") {
                let x = self.type_ident()?;
                let rep = if self.eat_sym(":") { self.safety_type()? } else { Type::Var(x.clone()) };
                self.expect_sym(";")?;
                if prog.tyvars.insert(&x, rep).is_err() {
                    return self.fail(span, format!("type variable `{x}` declared twice"));
                }
            } else if self.eat_kw("input") {
                let x = self.term_ident()?;
                self.expect_sym(":")?;
                let tspan = self.span();
                let s = self.sec_type()?;
                self.expect_sym(";")?;
                if let Err(e) = check_wf(&prog.tyvars, &s) {
                    return self.fail(tspan, format!("ill-formed input type `{s}`: {e}"));
                }
                if !names.insert(x.clone()) {
                    return self.fail(span, format!("`{x}` declared twice"));
                }
                prog.inputs.push((x, s));
            } else if self.eat_kw("observe") {
                let tspan = self.span();
                let s = self.sec_type()?;
                self.expect_sym(";")?;
                if prog.observe.is_some() {
                    return self.fail(span, "observation type declared twice");
                }
                if let Err(e) = check_wf(&prog.tyvars, &s) {
                    return self.fail(tspan, format!("ill-formed observation type `{s}`: {e}"));
                }
                prog.observe = Some(s);
            } else if self.eat_kw("carrier") {
                let pspan = self.span();
                let prim = match self.safety_type()? {
                    Type::Prim(p) => p,
                    _ => return self.fail(pspan, "carriers are declared for primitive types only"),
                };
                self.expect_sym("=")?;
                let mut lits = vec![self.literal()?];
                while self.eat_sym(",") {
                    lits.push(self.literal()?);
                }
                self.expect_sym(";")?;
                if let Some(bad) = lits.iter().find(|l| l.prim() != prim) {
                    return self.fail(pspan, format!("carrier for {prim} contains `{}`", crate::pretty::literal(bad)));
                }
                prog.carriers.push((prim, lits));
            } else if self.eat_kw("let") {
                let x = self.term_ident()?;
                self.expect_sym("=")?;
                let body = self.expr()?;
                self.expect_sym(";")?;
                if !names.insert(x.clone()) {
                    return self.fail(span, format!("`{x}` declared twice"));
                }
                prog.decls.push((x, body));
            } else {
                break;
            }
        }
        prog.main = self.expr()?;
        self.expect_eof()?;
        Ok(prog)
    }
}

fn to_sec(t: TyExpr) -> SecType {
    match t {
        TyExpr::Bare(t) => SecType::public(t),
        TyExpr::Faceted(s) => s,
    }
}

/// `pack <T1, T2, e> as exists X, Y. T` packs one variable at a time.
fn build_pack(witnesses: &[Type], annot: Type, payload: Term, span: Span) -> Result<Term, String> {
    let Type::Exists(x, inner) = &annot else {
        return Err(format!("package type must be existential, found `{annot}`"));
    };
    if witnesses.len() == 1 {
        return Ok(Term::new(
            TermKind::Pack { witness: witnesses[0].clone(), payload: Box::new(payload), annot },
            span,
        ));
    }
    let inner_annot = inner.subst(x, &witnesses[0]);
    let inner_pack = build_pack(&witnesses[1..], inner_annot, payload, span)?;
    Ok(Term::new(TermKind::Pack { witness: witnesses[0].clone(), payload: Box::new(inner_pack), annot }, span))
}

/// Parses a whole `.fsec` file.
pub fn parse(text: &str) -> Result<SourceProgram, ParseError> {
    Parser::new(text)?.program()
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.expr()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_sec_type(text: &str) -> Result<SecType, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.sec_type()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_safety_type(text: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.safety_type()?;
    p.expect_eof()?;
    Ok(t)
}

/// Like [`parse_term`] but also accepts function tables.
pub fn parse_value_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?.allow_tables();
    let t = p.expr()?;
    p.expect_eof()?;
    Ok(t)
}
