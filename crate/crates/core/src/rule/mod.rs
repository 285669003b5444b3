//! Conditional-formatting rules: one DNF formula per format id.
//!
//! Surface syntax, one branch per line:
//!
//! ```text
//! IF contains(c, "in") AND NOT endsWith(c, "w") THEN 2
//! IF (less(c, 5)) OR (greater(c, 100)) THEN 1
//! ```

mod canon;
mod excel;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use crate::bits::Bits;
use crate::column::{Cell, Column, FormatId, UNFORMATTED};
use crate::error::{Error, Result};
use crate::predicates::{eval_predicate, ConcretePredicate};

pub use canon::{
    canonicalize, canonicalize_with, exact_match, exact_match_with, RewriteContext, REWRITE_SET_VERSION,
};
pub use excel::to_excel_formula;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub predicate: ConcretePredicate,
    pub negated: bool,
}

impl Literal {
    pub fn pos(predicate: ConcretePredicate) -> Self {
        Literal {
            predicate,
            negated: false,
        }
    }

    pub fn neg(predicate: ConcretePredicate) -> Self {
        Literal {
            predicate,
            negated: true,
        }
    }

    pub fn eval(&self, c: &Cell) -> bool {
        eval_predicate(&self.predicate, c) != self.negated
    }

    pub fn negation(&self) -> Literal {
        Literal {
            predicate: self.predicate.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("NOT ")?;
        }
        fmt::Display::fmt(&self.predicate, f)
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self == other {
            return std::cmp::Ordering::Equal;
        }
        self.to_string().cmp(&other.to_string())
    }
}

pub type Clause = Vec<Literal>;

/// An OR of ANDs of possibly negated predicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dnf {
    clauses: Vec<Clause>,
}

impl Dnf {
    /// Duplicate literals inside a clause are merged; a clause holding a
    /// literal and its negation is rejected.
    pub fn new(clauses: Vec<Clause>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::InvalidRule("a formula needs at least one clause".into()));
        }
        let mut out = Vec::with_capacity(clauses.len());
        for clause in clauses {
            if clause.is_empty() {
                return Err(Error::InvalidRule("empty conjunction".into()));
            }
            let mut dedup: Clause = Vec::with_capacity(clause.len());
            for lit in clause {
                if dedup.contains(&lit.negation()) {
                    return Err(Error::InvalidRule(format!(
                        "clause contains both {lit} and its negation"
                    )));
                }
                if !dedup.contains(&lit) {
                    dedup.push(lit);
                }
            }
            out.push(dedup);
        }
        Ok(Dnf { clauses: out })
    }

    pub fn single(lit: Literal) -> Self {
        Dnf {
            clauses: vec![vec![lit]],
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn eval(&self, c: &Cell) -> bool {
        self.clauses.iter().any(|cl| cl.iter().all(|l| l.eval(c)))
    }

    /// Cells of `column` matched by the formula.
    pub fn matches(&self, column: &Column) -> Bits {
        Bits::from_fn(column.len(), |i| self.eval(&column.cells()[i]))
    }

    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.clauses.iter().flatten()
    }

    pub fn predicates(&self) -> BTreeSet<&ConcretePredicate> {
        self.literals().map(|l| &l.predicate).collect()
    }
}

fn fmt_clause(clause: &[Literal], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, lit) in clause.iter().enumerate() {
        if i > 0 {
            f.write_str(" AND ")?;
        }
        fmt::Display::fmt(lit, f)?;
    }
    Ok(())
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.len() == 1 {
            return fmt_clause(&self.clauses[0], f);
        }
        for (i, clause) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            f.write_str("(")?;
            fmt_clause(clause, f)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub dnf: Dnf,
    pub format: FormatId,
}

/// A set of `(formula, format)` branches with distinct non-zero formats,
/// kept in ascending format order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Rule {
    branches: Vec<Branch>,
}

impl Rule {
    pub fn new(mut branches: Vec<Branch>) -> Result<Self> {
        branches.sort_by_key(|b| b.format);
        for w in branches.windows(2) {
            if w[0].format == w[1].format {
                return Err(Error::InvalidRule(format!("format {} used twice", w[0].format)));
            }
        }
        if branches.iter().any(|b| b.format == UNFORMATTED) {
            return Err(Error::InvalidRule("format 0 cannot be assigned by a rule".into()));
        }
        Ok(Rule { branches })
    }

    pub fn single(dnf: Dnf, format: FormatId) -> Result<Self> {
        Rule::new(vec![Branch { dnf, format }])
    }

    pub fn empty() -> Self {
        Rule::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_rule(text)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn formats(&self) -> Vec<FormatId> {
        self.branches.iter().map(|b| b.format).collect()
    }

    pub fn branch(&self, format: FormatId) -> Option<&Branch> {
        self.branches.iter().find(|b| b.format == format)
    }

    pub fn literal_count(&self) -> usize {
        self.branches.iter().map(|b| b.dnf.literal_count()).sum()
    }

    /// Largest per-branch literal count.
    pub fn depth(&self) -> usize {
        self.branches.iter().map(|b| b.dnf.literal_count()).max().unwrap_or(0)
    }

    /// Format of the first matching branch, or 0.
    pub fn eval(&self, c: &Cell) -> FormatId {
        self.branches
            .iter()
            .find(|b| b.dnf.eval(c))
            .map(|b| b.format)
            .unwrap_or(UNFORMATTED)
    }

    pub fn execute(&self, column: &Column) -> Vec<FormatId> {
        column.cells().iter().map(|c| self.eval(c)).collect()
    }

    /// True when no cell of `column` is matched by two branches.
    pub fn is_disjoint_on(&self, column: &Column) -> bool {
        column
            .cells()
            .iter()
            .all(|c| self.branches.iter().filter(|b| b.dnf.eval(c)).count() <= 1)
    }
}

pub fn eval_rule(rule: &Rule, c: &Cell) -> FormatId {
    rule.eval(c)
}

pub fn parse_rule(text: &str) -> Result<Rule> {
    Rule::parse(text)
}

pub fn print_rule(rule: &Rule) -> String {
    rule.to_string()
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "IF {} THEN {}", b.dnf, b.format)?;
        }
        Ok(())
    }
}
