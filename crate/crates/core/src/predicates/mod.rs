//! Typed boolean predicates over cells and their concretization from column data.

mod constants;
mod matrix;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::column::{format_number, Cell, CellType, CellValue, DateValue};
use crate::error::{Error, Result};

pub use constants::{
    generate_numeric_constants, generate_text_constants, percentile, Constant, TextConstant,
    POPULAR_CONSTANTS,
};
pub use matrix::{generate_predicates, PredicateConfig, PredicateMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PredicateKind {
    Greater,
    GreaterEquals,
    Less,
    LessEquals,
    Between,
    Equals,
    Contains,
    StartsWith,
    EndsWith,
}

impl PredicateKind {
    pub const ALL: [PredicateKind; 9] = [
        PredicateKind::Greater,
        PredicateKind::GreaterEquals,
        PredicateKind::Less,
        PredicateKind::LessEquals,
        PredicateKind::Between,
        PredicateKind::Equals,
        PredicateKind::Contains,
        PredicateKind::StartsWith,
        PredicateKind::EndsWith,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::Greater => "greater",
            PredicateKind::GreaterEquals => "greaterEquals",
            PredicateKind::Less => "less",
            PredicateKind::LessEquals => "lessEquals",
            PredicateKind::Between => "between",
            PredicateKind::Equals => "equals",
            PredicateKind::Contains => "contains",
            PredicateKind::StartsWith => "startsWith",
            PredicateKind::EndsWith => "endsWith",
        }
    }

    pub fn from_name(name: &str) -> Option<PredicateKind> {
        PredicateKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_text(self) -> bool {
        matches!(
            self,
            PredicateKind::Equals
                | PredicateKind::Contains
                | PredicateKind::StartsWith
                | PredicateKind::EndsWith
        )
    }

    /// The comparison that holds exactly where `self` does not, on cells of the right type.
    pub fn complement(self) -> Option<PredicateKind> {
        match self {
            PredicateKind::Greater => Some(PredicateKind::LessEquals),
            PredicateKind::GreaterEquals => Some(PredicateKind::Less),
            PredicateKind::Less => Some(PredicateKind::GreaterEquals),
            PredicateKind::LessEquals => Some(PredicateKind::Greater),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatePart {
    Day,
    Month,
    Year,
    Weekday,
}

impl DatePart {
    pub const ALL: [DatePart; 4] = [DatePart::Day, DatePart::Month, DatePart::Year, DatePart::Weekday];

    pub fn name(self) -> &'static str {
        match self {
            DatePart::Day => "day",
            DatePart::Month => "month",
            DatePart::Year => "year",
            DatePart::Weekday => "weekday",
        }
    }

    pub fn from_name(name: &str) -> Option<DatePart> {
        DatePart::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn extract(self, d: &DateValue) -> f64 {
        match self {
            DatePart::Day => d.day() as f64,
            DatePart::Month => d.month() as f64,
            DatePart::Year => d.year() as f64,
            DatePart::Weekday => d.weekday() as f64,
        }
    }
}

/// Where a predicate's constant came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ColumnValue,
    SummaryStat,
    Popular,
    TokenDelimiter,
    TokenPrefix,
    /// Read from rule text rather than generated.
    External,
}

impl Provenance {
    pub const ALL: [Provenance; 6] = [
        Provenance::ColumnValue,
        Provenance::SummaryStat,
        Provenance::Popular,
        Provenance::TokenDelimiter,
        Provenance::TokenPrefix,
        Provenance::External,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A set of provenances, one bit per variant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ProvenanceSet(u8);

impl ProvenanceSet {
    pub fn single(p: Provenance) -> Self {
        ProvenanceSet(p.bit())
    }

    pub fn insert(&mut self, p: Provenance) {
        self.0 |= p.bit();
    }

    pub fn union(self, other: ProvenanceSet) -> Self {
        ProvenanceSet(self.0 | other.0)
    }

    pub fn contains(self, p: Provenance) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Provenance> {
        Provenance::ALL.into_iter().filter(move |p| self.contains(*p))
    }
}

#[derive(Clone, Debug)]
pub enum PredicateArgs {
    Number(f64),
    Range(f64, f64),
    Text(String),
}

/// A predicate with all arguments bound.
///
/// Equality, hashing and ordering ignore `provenance` and `aliases`;
/// ordering follows the rendered text.
#[derive(Clone, Debug)]
pub struct ConcretePredicate {
    kind: PredicateKind,
    part: Option<DatePart>,
    args: PredicateArgs,
    case_insensitive: bool,
    provenance: Provenance,
    /// Provenances of every generated predicate with the same truth column
    /// on the column this one was generated for.
    aliases: ProvenanceSet,
}

impl ConcretePredicate {
    pub fn new(
        kind: PredicateKind,
        part: Option<DatePart>,
        args: PredicateArgs,
        case_insensitive: bool,
        provenance: Provenance,
    ) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidPredicate(format!("{}: {m}", kind.name())));
        match (&args, kind) {
            (PredicateArgs::Range(lo, hi), PredicateKind::Between) => {
                if !(lo.is_finite() && hi.is_finite()) {
                    return bad("non-finite bound");
                }
                if lo >= hi {
                    return Err(Error::InvalidPredicate("between requires n1 < n2".into()));
                }
            }
            (PredicateArgs::Number(n), k) if !k.is_text() && k != PredicateKind::Between => {
                if !n.is_finite() {
                    return bad("non-finite constant");
                }
            }
            (PredicateArgs::Text(s), k) if k.is_text() => {
                if s.is_empty() {
                    return bad("empty string constant");
                }
                if part.is_some() {
                    return bad("text predicates take no date part");
                }
            }
            _ => return bad("argument kind mismatch"),
        }
        if case_insensitive && !kind.is_text() {
            return bad("case-insensitive flag only applies to text");
        }
        Ok(ConcretePredicate {
            kind,
            part,
            args,
            case_insensitive,
            provenance,
            aliases: ProvenanceSet::single(provenance),
        })
    }

    pub fn number(kind: PredicateKind, n: f64) -> Result<Self> {
        Self::new(kind, None, PredicateArgs::Number(n), false, Provenance::External)
    }

    pub fn date(kind: PredicateKind, n: f64, part: DatePart) -> Result<Self> {
        Self::new(kind, Some(part), PredicateArgs::Number(n), false, Provenance::External)
    }

    pub fn between(lo: f64, hi: f64, part: Option<DatePart>) -> Result<Self> {
        Self::new(
            PredicateKind::Between,
            part,
            PredicateArgs::Range(lo, hi),
            false,
            Provenance::External,
        )
    }

    pub fn text(kind: PredicateKind, s: impl Into<String>) -> Result<Self> {
        Self::new(kind, None, PredicateArgs::Text(s.into()), false, Provenance::External)
    }

    pub fn kind(&self) -> PredicateKind {
        self.kind
    }

    pub fn part(&self) -> Option<DatePart> {
        self.part
    }

    pub fn args(&self) -> &PredicateArgs {
        &self.args
    }

    pub fn case_insensitive(&self) -> bool {
        self.case_insensitive
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self.aliases = ProvenanceSet::single(provenance);
        self
    }

    pub fn aliases(&self) -> ProvenanceSet {
        self.aliases
    }

    pub(crate) fn add_aliases(&mut self, more: ProvenanceSet) {
        self.aliases = self.aliases.union(more);
    }

    pub fn cell_type(&self) -> CellType {
        if self.kind.is_text() {
            CellType::Text
        } else if self.part.is_some() {
            CellType::Date
        } else {
            CellType::Number
        }
    }

    /// Same comparison and constant with the kind swapped (numeric kinds only).
    pub(crate) fn with_kind(&self, kind: PredicateKind) -> Self {
        debug_assert!(!kind.is_text() && kind != PredicateKind::Between);
        ConcretePredicate {
            kind,
            ..self.clone()
        }
    }

    pub fn number_arg(&self) -> Option<f64> {
        match self.args {
            PredicateArgs::Number(n) => Some(n),
            _ => None,
        }
    }

    pub fn text_arg(&self) -> Option<&str> {
        match &self.args {
            PredicateArgs::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    fn key(&self) -> (PredicateKind, Option<DatePart>, u64, u64, Option<&str>, bool) {
        let (a, b, s) = match &self.args {
            PredicateArgs::Number(n) => (norm_bits(*n), 0, None),
            PredicateArgs::Range(lo, hi) => (norm_bits(*lo), norm_bits(*hi), None),
            PredicateArgs::Text(s) => (0, 0, Some(s.as_str())),
        };
        (self.kind, self.part, a, b, s, self.case_insensitive)
    }
}

fn norm_bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

impl PartialEq for ConcretePredicate {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for ConcretePredicate {}

impl Hash for ConcretePredicate {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for ConcretePredicate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ConcretePredicate {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.render().cmp(&other.render())
    }
}

/// Double-quoted with backslash escapes for `"` and `\`.
pub fn quote_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
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

impl fmt::Display for ConcretePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(c", self.kind.name())?;
        match &self.args {
            PredicateArgs::Number(n) => write!(f, ", {}", format_number(*n))?,
            PredicateArgs::Range(lo, hi) => {
                write!(f, ", {}, {}", format_number(*lo), format_number(*hi))?
            }
            PredicateArgs::Text(s) => write!(f, ", {}", quote_string(s))?,
        }
        if let Some(p) = self.part {
            write!(f, ", {}", p.name())?;
        }
        if self.case_insensitive {
            f.write_str(", ci")?;
        }
        f.write_str(")")
    }
}

fn compare(kind: PredicateKind, args: &PredicateArgs, v: f64) -> bool {
    match (kind, args) {
        (PredicateKind::Greater, PredicateArgs::Number(n)) => v > *n,
        (PredicateKind::GreaterEquals, PredicateArgs::Number(n)) => v >= *n,
        (PredicateKind::Less, PredicateArgs::Number(n)) => v < *n,
        (PredicateKind::LessEquals, PredicateArgs::Number(n)) => v <= *n,
        (PredicateKind::Between, PredicateArgs::Range(lo, hi)) => *lo <= v && v <= *hi,
        _ => false,
    }
}

fn text_match(kind: PredicateKind, value: &str, needle: &str) -> bool {
    match kind {
        PredicateKind::Equals => value == needle,
        PredicateKind::Contains => value.contains(needle),
        PredicateKind::StartsWith => value.starts_with(needle),
        PredicateKind::EndsWith => value.ends_with(needle),
        _ => false,
    }
}

/// Evaluates a predicate on a cell. Cells of another type never match.
pub fn eval_predicate(p: &ConcretePredicate, c: &Cell) -> bool {
    eval_on_value(p, &c.value)
}

pub fn eval_on_value(p: &ConcretePredicate, value: &CellValue) -> bool {
    match (value, p.cell_type()) {
        (CellValue::Number(v), CellType::Number) => compare(p.kind, &p.args, *v),
        (CellValue::Date(d), CellType::Date) => {
            let part = p.part.expect("date predicate has a part");
            compare(p.kind, &p.args, part.extract(d))
        }
        (CellValue::Text(s), CellType::Text) => {
            let PredicateArgs::Text(needle) = &p.args else {
                return false;
            };
            if p.case_insensitive {
                text_match(p.kind, &s.to_lowercase(), &needle.to_lowercase())
            } else {
                text_match(p.kind, s, needle)
            }
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn month_comparison_matches_march_onwards() {
        let p = ConcretePredicate::date(PredicateKind::Greater, 2.0, DatePart::Month).unwrap();
        assert!(eval_predicate(&p, &Cell::date(2021, 3, 15)));
        assert!(!eval_predicate(&p, &Cell::date(2021, 2, 28)));
        assert_eq!(p.render(), "greater(c, 2, month)");
    }

    #[test]
    fn type_mismatch_is_false() {
        let p = ConcretePredicate::text(PredicateKind::Equals, "x").unwrap();
        assert!(!eval_predicate(&p, &Cell::number(1.0)));
        let q = ConcretePredicate::number(PredicateKind::Less, 5.0).unwrap();
        assert!(!eval_predicate(&q, &Cell::text("1")));
        assert!(!eval_predicate(&q, &Cell::date(2021, 1, 1)));
    }

    #[test]
    fn between_is_inclusive() {
        let p = ConcretePredicate::between(2.0, 5.0, None).unwrap();
        assert!(eval_predicate(&p, &Cell::number(2.0)));
        assert!(eval_predicate(&p, &Cell::number(5.0)));
        assert!(!eval_predicate(&p, &Cell::number(5.5)));
    }

    #[test]
    fn between_requires_ordered_bounds() {
        let err = ConcretePredicate::between(5.0, 2.0, None).unwrap_err();
        assert_eq!(err.to_string(), "invalid predicate: between requires n1 < n2");
    }

    #[test]
    fn weekday_is_iso() {
        // 2021-03-15 was a Monday.
        let p = ConcretePredicate::date(PredicateKind::LessEquals, 1.0, DatePart::Weekday).unwrap();
        assert!(eval_predicate(&p, &Cell::date(2021, 3, 15)));
        assert!(!eval_predicate(&p, &Cell::date(2021, 3, 14)));
    }

    #[test]
    fn rendering_quotes_and_numbers() {
        let p = ConcretePredicate::text(PredicateKind::Contains, "say \"hi\"").unwrap();
        assert_eq!(p.render(), r#"contains(c, "say \"hi\"")"#);
        let q = ConcretePredicate::number(PredicateKind::Less, -0.0).unwrap();
        assert_eq!(q.render(), "less(c, 0)");
        let r = ConcretePredicate::between(0.5, 1e21, None).unwrap();
        assert_eq!(r.render(), "between(c, 0.5, 1000000000000000000000)");
    }

    #[test]
    fn case_insensitive_text() {
        let p = ConcretePredicate::new(
            PredicateKind::StartsWith,
            None,
            PredicateArgs::Text("In".into()),
            true,
            Provenance::External,
        )
        .unwrap();
        assert!(eval_predicate(&p, &Cell::text("in review")));
        assert_eq!(p.render(), r#"startsWith(c, "In", ci)"#);
    }

    #[test]
    fn equality_ignores_provenance() {
        let a = ConcretePredicate::number(PredicateKind::Less, 5.0).unwrap();
        let b = a.clone().with_provenance(Provenance::Popular);
        assert_eq!(a, b);
    }
}
