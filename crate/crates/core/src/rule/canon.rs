//! Semantics-preserving rewrites to a canonical rule form.
//!
//! Rewrite set, applied to a fixpoint:
//! 1. `greaterEquals(n1) AND lessEquals(n2)` with `n1 < n2` becomes `between(n1, n2)`.
//! 2. A negated comparison becomes its complement (`NOT greater` to `lessEquals`, ...),
//!    when the cell's type is implied: either the column is known to hold only that
//!    type, or the same clause has a positive literal of that type.
//! 3. Clauses that are literal supersets of another clause are dropped.
//! 4. Unsatisfiable clauses are dropped (a literal and its negation, positive
//!    literals of different cell types, empty numeric intervals).
//! 5. Literals and clauses are sorted by their rendered text.
//!
//! Numbers render as shortest round-trip decimals, so canonical text is unique.

use std::collections::BTreeMap;

use crate::column::CellType;
use crate::predicates::{ConcretePredicate, DatePart, PredicateArgs, PredicateKind};

use super::{Branch, Clause, Dnf, Literal, Rule};

/// Version of the rewrite set; exact-match numbers depend on it.
pub const REWRITE_SET_VERSION: u32 = 1;

/// What is known about the column a rule is applied to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RewriteContext {
    /// Every cell of the column has this type.
    pub homogeneous: Option<CellType>,
}

impl RewriteContext {
    pub fn homogeneous(ty: CellType) -> Self {
        RewriteContext {
            homogeneous: Some(ty),
        }
    }
}

pub fn canonicalize(rule: &Rule) -> Rule {
    canonicalize_with(rule, &RewriteContext::default())
}

pub fn canonicalize_with(rule: &Rule, ctx: &RewriteContext) -> Rule {
    let branches = rule
        .branches()
        .iter()
        .filter_map(|b| {
            canonical_clauses(b.dnf.clauses(), ctx).map(|clauses| Branch {
                dnf: Dnf { clauses },
                format: b.format,
            })
        })
        .collect();
    Rule::new(branches).expect("rewrites keep formats distinct")
}

pub fn exact_match(a: &Rule, b: &Rule) -> bool {
    exact_match_with(a, b, &RewriteContext::default())
}

pub fn exact_match_with(a: &Rule, b: &Rule, ctx: &RewriteContext) -> bool {
    canonicalize_with(a, ctx).to_string() == canonicalize_with(b, ctx).to_string()
}

fn canonical_clauses(clauses: &[Clause], ctx: &RewriteContext) -> Option<Vec<Clause>> {
    let mut current: Vec<Clause> = clauses.to_vec();
    loop {
        let mut next: Vec<Clause> = current
            .iter()
            .filter_map(|c| rewrite_clause(c.clone(), ctx))
            .collect();
        next = drop_subsumed(next);
        for c in &mut next {
            c.sort();
        }
        next.sort_by_cached_key(|c| clause_text(c));
        if next == current {
            break;
        }
        current = next;
    }
    (!current.is_empty()).then_some(current)
}

fn clause_text(c: &[Literal]) -> String {
    c.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" AND ")
}

/// Returns `None` when the clause is unsatisfiable.
fn rewrite_clause(mut clause: Clause, ctx: &RewriteContext) -> Option<Clause> {
    // (2) complement flips
    let positive_types: Vec<CellType> = clause
        .iter()
        .filter(|l| !l.negated)
        .map(|l| l.predicate.cell_type())
        .collect();
    for lit in &mut clause {
        if !lit.negated {
            continue;
        }
        let ty = lit.predicate.cell_type();
        let type_known = ctx.homogeneous == Some(ty) || positive_types.contains(&ty);
        if let (true, Some(kind)) = (type_known, lit.predicate.kind().complement()) {
            *lit = Literal::pos(lit.predicate.with_kind(kind));
        }
    }
    let mut dedup: Clause = Vec::with_capacity(clause.len());
    for l in clause {
        if !dedup.contains(&l) {
            dedup.push(l);
        }
    }
    let mut clause = dedup;

    // (4) contradictions
    if clause.iter().any(|l| clause.contains(&l.negation())) {
        return None;
    }
    let mut types = clause.iter().filter(|l| !l.negated).map(|l| l.predicate.cell_type());
    if let Some(first) = types.next() {
        if types.any(|t| t != first) {
            return None;
        }
    }
    if !intervals_feasible(&clause) {
        return None;
    }

    // (1) between merge
    loop {
        let mut lower: Vec<&Literal> = clause
            .iter()
            .filter(|l| !l.negated && l.predicate.kind() == PredicateKind::GreaterEquals)
            .collect();
        lower.sort();
        let mut upper: Vec<&Literal> = clause
            .iter()
            .filter(|l| !l.negated && l.predicate.kind() == PredicateKind::LessEquals)
            .collect();
        upper.sort();
        let pair = lower.iter().find_map(|lo| {
            upper
                .iter()
                .find(|hi| {
                    lo.predicate.cell_type() == hi.predicate.cell_type()
                        && lo.predicate.part() == hi.predicate.part()
                        && lo.predicate.number_arg() < hi.predicate.number_arg()
                })
                .map(|hi| ((*lo).clone(), (*hi).clone()))
        });
        let Some((lo, hi)) = pair else { break };
        let merged = ConcretePredicate::between(
            lo.predicate.number_arg().unwrap(),
            hi.predicate.number_arg().unwrap(),
            lo.predicate.part(),
        )
        .expect("ordered bounds")
        .with_provenance(lo.predicate.provenance().max(hi.predicate.provenance()));
        clause.retain(|l| *l != lo && *l != hi);
        let merged = Literal::pos(merged);
        if !clause.contains(&merged) {
            clause.push(merged);
        }
    }
    Some(clause)
}

/// (lower, lower_strict, upper, upper_strict)
type Interval = (f64, bool, f64, bool);

/// Checks the real interval implied by positive numeric literals per date part.
fn intervals_feasible(clause: &[Literal]) -> bool {
    let mut bounds: BTreeMap<(CellType, Option<DatePart>), Interval> = BTreeMap::new();
    for l in clause.iter().filter(|l| !l.negated) {
        let p = &l.predicate;
        if p.kind().is_text() {
            continue;
        }
        let e = bounds
            .entry((p.cell_type(), p.part()))
            .or_insert((f64::NEG_INFINITY, false, f64::INFINITY, false));
        let mut raise = |v: f64, strict: bool| {
            if v > e.0 || (v == e.0 && strict) {
                e.0 = v;
                e.1 = strict;
            }
        };
        match (p.kind(), p.args()) {
            (PredicateKind::Greater, PredicateArgs::Number(n)) => raise(*n, true),
            (PredicateKind::GreaterEquals, PredicateArgs::Number(n)) => raise(*n, false),
            (PredicateKind::Between, PredicateArgs::Range(lo, _)) => raise(*lo, false),
            _ => {}
        }
        let mut lower = |v: f64, strict: bool| {
            if v < e.2 || (v == e.2 && strict) {
                e.2 = v;
                e.3 = strict;
            }
        };
        match (p.kind(), p.args()) {
            (PredicateKind::Less, PredicateArgs::Number(n)) => lower(*n, true),
            (PredicateKind::LessEquals, PredicateArgs::Number(n)) => lower(*n, false),
            (PredicateKind::Between, PredicateArgs::Range(_, hi)) => lower(*hi, false),
            _ => {}
        }
    }
    bounds
        .values()
        .all(|&(lo, lo_s, hi, hi_s)| lo < hi || (lo == hi && !lo_s && !hi_s))
}

fn drop_subsumed(mut clauses: Vec<Clause>) -> Vec<Clause> {
    // Shorter clauses first so that a subsuming clause is kept before its supersets.
    clauses.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| clause_text(a).cmp(&clause_text(b))));
    let mut kept: Vec<Clause> = Vec::new();
    for c in clauses {
        if !kept.iter().any(|k| k.iter().all(|l| c.contains(l))) {
            kept.push(c);
        }
    }
    kept
}
