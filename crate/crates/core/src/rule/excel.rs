//! Export to Excel custom-formula conditional formatting.
//!
//! Excel's text comparisons and `SEARCH` ignore case, so exported text
//! predicates match case-insensitively.

use crate::column::format_number;
use crate::predicates::{ConcretePredicate, DatePart, PredicateArgs, PredicateKind};

use super::{Dnf, Literal};

fn excel_string(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn operand(p: &ConcretePredicate, anchor: &str) -> String {
    match p.part() {
        None => anchor.to_string(),
        Some(DatePart::Day) => format!("DAY({anchor})"),
        Some(DatePart::Month) => format!("MONTH({anchor})"),
        Some(DatePart::Year) => format!("YEAR({anchor})"),
        Some(DatePart::Weekday) => format!("WEEKDAY({anchor},2)"),
    }
}

fn predicate_formula(p: &ConcretePredicate, anchor: &str) -> String {
    let x = operand(p, anchor);
    match (p.kind(), p.args()) {
        (PredicateKind::Greater, PredicateArgs::Number(n)) => format!("{x}>{}", format_number(*n)),
        (PredicateKind::GreaterEquals, PredicateArgs::Number(n)) => {
            format!("{x}>={}", format_number(*n))
        }
        (PredicateKind::Less, PredicateArgs::Number(n)) => format!("{x}<{}", format_number(*n)),
        (PredicateKind::LessEquals, PredicateArgs::Number(n)) => {
            format!("{x}<={}", format_number(*n))
        }
        (PredicateKind::Between, PredicateArgs::Range(lo, hi)) => format!(
            "AND({x}>={},{x}<={})",
            format_number(*lo),
            format_number(*hi)
        ),
        (PredicateKind::Equals, PredicateArgs::Text(s)) => format!("{x}={}", excel_string(s)),
        (PredicateKind::Contains, PredicateArgs::Text(s)) => {
            format!("ISNUMBER(SEARCH({},{x}))", excel_string(s))
        }
        (PredicateKind::StartsWith, PredicateArgs::Text(s)) => {
            format!("LEFT({x},{})={}", s.chars().count(), excel_string(s))
        }
        (PredicateKind::EndsWith, PredicateArgs::Text(s)) => {
            format!("RIGHT({x},{})={}", s.chars().count(), excel_string(s))
        }
        _ => unreachable!("predicate arguments are validated on construction"),
    }
}

fn literal_formula(l: &Literal, anchor: &str) -> String {
    let f = predicate_formula(&l.predicate, anchor);
    if l.negated {
        format!("NOT({f})")
    } else {
        f
    }
}

/// Renders `dnf` as an Excel formula with `anchor` standing for the cell.
pub fn to_excel_formula(dnf: &Dnf, anchor: &str) -> String {
    let clause = |c: &[Literal]| {
        if c.len() == 1 {
            literal_formula(&c[0], anchor)
        } else {
            let parts: Vec<String> = c.iter().map(|l| literal_formula(l, anchor)).collect();
            format!("AND({})", parts.join(","))
        }
    };
    let body = if dnf.clauses().len() == 1 {
        clause(&dnf.clauses()[0])
    } else {
        let parts: Vec<String> = dnf.clauses().iter().map(|c| clause(c)).collect();
        format!("OR({})", parts.join(","))
    };
    format!("={body}")
}
