use crate::eval::Value;
use crate::syntax::{Literal, Prim, Term, TermKind};

/// The finite model and search budgets.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub ints: Vec<i64>,
    pub bools: Vec<bool>,
    pub strings: Vec<String>,
    /// Closed lambda terms of the program, offered as function values.
    pub closures: Vec<Term>,
    /// Step bound for each evaluation.
    pub fuel: u64,
    /// Allow different representation types on the two sides when an
    /// abstract type is unconstrained.
    pub hetero: bool,
    /// Largest carrier product searched exhaustively for a relation.
    pub max_relation_pairs: usize,
    /// Largest number of relation environments searched exhaustively.
    pub max_rel_envs: usize,
    /// Largest domain for which function tables are generated.
    pub max_table_domain: usize,
    /// Largest number of tables per function type.
    pub max_tables: usize,
    /// Largest number of values enumerated per type.
    pub max_values: usize,
    /// Largest number of substitution pairs per relation environment.
    pub max_subst_pairs: usize,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            ints: vec![0, 1, 2],
            bools: vec![true, false],
            strings: vec!["a".into(), "aa".into(), String::new()],
            closures: Vec::new(),
            fuel: 100_000,
            hetero: false,
            max_relation_pairs: 16,
            max_rel_envs: 1 << 20,
            max_table_domain: 6,
            max_tables: 4096,
            max_values: 4096,
            max_subst_pairs: 1 << 16,
        }
    }
}

impl DomainSpec {
    /// Defaults, overridden per primitive by `carriers`, then extended with
    /// every literal and closed closure of `program`.
    pub fn for_program(program: &Term, carriers: &[(Prim, Vec<Literal>)]) -> DomainSpec {
        let mut dom = DomainSpec::default();
        for (p, lits) in carriers {
            dom.set_carrier(*p, lits);
        }
        dom.add_literals(&program.literals());
        dom.add_closures(program);
        dom
    }

    pub fn set_carrier(&mut self, p: Prim, lits: &[Literal]) {
        match p {
            Prim::Int => self.ints.clear(),
            Prim::Bool => self.bools.clear(),
            Prim::String => self.strings.clear(),
        }
        self.add_literals(lits);
    }

    pub fn add_literals(&mut self, lits: &[Literal]) {
        for l in lits {
            match l {
                Literal::Int(n) if !self.ints.contains(n) => self.ints.push(*n),
                Literal::Bool(b) if !self.bools.contains(b) => self.bools.push(*b),
                Literal::Str(s) if !self.strings.contains(s) => self.strings.push(s.clone()),
                _ => {}
            }
        }
    }

    pub fn add_closures(&mut self, program: &Term) {
        let mut found = Vec::new();
        program.visit(&mut |t| {
            if matches!(t.kind, TermKind::Lam(..)) && t.is_closed() {
                found.push(t.clone());
            }
        });
        for c in found {
            if !self.closures.iter().any(|d| d.alpha_eq(&c)) {
                self.closures.push(c);
            }
        }
    }

    pub fn carrier(&self, p: Prim) -> Vec<Value> {
        match p {
            Prim::Int => self.ints.iter().map(|n| Value::int(*n)).collect(),
            Prim::Bool => self.bools.iter().map(|b| Value::bool(*b)).collect(),
            Prim::String => self.strings.iter().map(|s| Value::str(s)).collect(),
        }
    }

    pub fn carrier_size(&self, p: Prim) -> usize {
        match p {
            Prim::Int => self.ints.len(),
            Prim::Bool => self.bools.len(),
            Prim::String => self.strings.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    #[test]
    fn program_literals_extend_carriers() {
        let t = parse_term("(fun (y: pub Int) => 7 <= y) 1").unwrap();
        let dom = DomainSpec::for_program(&t, &[(Prim::Int, vec![Literal::Int(100)])]);
        assert_eq!(dom.ints, vec![100, 7, 1]);
        assert_eq!(dom.closures.len(), 1);
        assert_eq!(dom.strings, vec!["a", "aa", ""]);
    }
}
