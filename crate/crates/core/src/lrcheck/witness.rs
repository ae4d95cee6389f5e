//! Text format for counterexamples.
//!
//! One item per line; `--` starts a comment.
//!
//! ```text
//! X := (Int, Int) { (100001, 100002); (3, 3) }
//! x := (100001, fun (y: Int!X) => true) | (100002, fun (y: Int!X) => true)
//! ```

use super::{RelEntry, RelEnv, SubstPair};
use crate::eval::Value;
use crate::parser::{ParseError, Parser};
use crate::syntax::Span;

fn value(p: &mut Parser) -> Result<Value, ParseError> {
    let span = p.span();
    let t = p.expr()?;
    match Value::from_term(&t) {
        Some(v) if t.is_closed() => Ok(v),
        _ => p.fail(span, format!("`{t}` is not a closed value")),
    }
}

fn relation_line(p: &mut Parser, rho: &mut RelEnv) -> Result<(), ParseError> {
    let span = p.span();
    let x = p.type_ident()?;
    p.expect_sym(":=")?;
    p.expect_sym("(")?;
    let t1 = p.safety_type()?;
    p.expect_sym(",")?;
    let t2 = p.safety_type()?;
    p.expect_sym(")")?;
    p.expect_sym("{")?;
    let mut rel = Vec::new();
    while !p.at_sym("}") {
        p.expect_sym("(")?;
        let a = value(p)?;
        p.expect_sym(",")?;
        let b = value(p)?;
        p.expect_sym(")")?;
        rel.push((a, b));
        if !p.eat_sym(";") {
            break;
        }
    }
    p.expect_sym("}")?;
    p.expect_eof()?;
    if rho.get(&x).is_some() {
        return p.fail(span, format!("`{x}` is given twice"));
    }
    rho.insert(&x, RelEntry { t1, t2, rel });
    Ok(())
}

fn input_line(p: &mut Parser, sp: &mut SubstPair) -> Result<(), ParseError> {
    let span = p.span();
    let x = p.term_ident()?;
    p.expect_sym(":=")?;
    let v1 = value(p)?;
    p.expect_sym("|")?;
    let v2 = value(p)?;
    p.expect_eof()?;
    if sp.get(&x).is_some() {
        return p.fail(span, format!("`{x}` is given twice"));
    }
    sp.bindings.push((x, v1, v2));
    Ok(())
}

/// Parses a witness file into a relation environment and an input pair.
pub fn parse_witness(text: &str) -> Result<(RelEnv, SubstPair), ParseError> {
    let mut rho = RelEnv::new();
    let mut sp = SubstPair::default();
    for (i, line) in text.lines().enumerate() {
        let at_line = |mut e: ParseError| {
            e.span = Span { line: i as u32 + 1, col: e.span.col };
            e
        };
        let mut p = Parser::new(line).map_err(at_line)?.allow_tables();
        if p.at_eof() {
            continue;
        }
        let r = if p.at_type_ident() { relation_line(&mut p, &mut rho) } else { input_line(&mut p, &mut sp) };
        r.map_err(at_line)?;
    }
    Ok((rho, sp))
}

pub fn render_rel_env(rho: &RelEnv) -> String {
    let mut out = String::new();
    for (x, e) in rho.iter() {
        let pairs: Vec<String> = e.rel.iter().map(|(a, b)| format!("({a}, {b})")).collect();
        let body = if pairs.is_empty() { "{}".to_string() } else { format!("{{ {} }}", pairs.join("; ")) };
        out.push_str(&format!("{x} := ({}, {}) {body}\n", e.t1, e.t2));
    }
    out
}

pub fn render_subst(sp: &SubstPair) -> String {
    sp.bindings.iter().map(|(x, a, b)| format!("{x} := {a} | {b}\n")).collect()
}

/// Replayable text for a violation; the outputs line is a comment.
pub fn render_witness(rho: &RelEnv, sp: &SubstPair, outputs: Option<&(Value, Value)>) -> String {
    let mut out = render_rel_env(rho);
    out.push_str(&render_subst(sp));
    if let Some((a, b)) = outputs {
        out.push_str(&format!("-- outputs: {a} | {b}\n"));
    }
    out
}
