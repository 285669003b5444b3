//! The cell-by-predicate truth matrix.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::column::{CellType, CellValue, Column};

use super::constants::{NumericSources, TextSources};
use super::{eval_predicate, ConcretePredicate, DatePart, PredicateArgs, PredicateKind, Provenance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredicateConfig {
    pub max_predicates: usize,
    pub case_insensitive: bool,
}

impl Default for PredicateConfig {
    fn default() -> Self {
        PredicateConfig {
            max_predicates: 5000,
            case_insensitive: false,
        }
    }
}

/// Bit-packed `n x m` matrix: row = cell, column = predicate.
#[derive(Clone, Debug)]
pub struct PredicateMatrix {
    predicates: Vec<ConcretePredicate>,
    columns: Vec<Bits>,
    rows: Vec<Bits>,
    n_cells: usize,
}

impl PredicateMatrix {
    /// Builds a matrix from precomputed truth columns.
    pub fn from_truth_columns(
        n_cells: usize,
        predicates: Vec<ConcretePredicate>,
        columns: Vec<Bits>,
    ) -> Self {
        assert_eq!(predicates.len(), columns.len());
        assert!(columns.iter().all(|c| c.len() == n_cells));
        let m = predicates.len();
        let mut rows = vec![Bits::zeros(m); n_cells];
        for (j, col) in columns.iter().enumerate() {
            for i in col.iter_ones() {
                rows[i].set(j, true);
            }
        }
        PredicateMatrix {
            predicates,
            columns,
            rows,
            n_cells,
        }
    }

    /// Evaluates `predicates` on `column` without filtering.
    pub fn evaluate(column: &Column, predicates: Vec<ConcretePredicate>) -> Self {
        let columns = predicates
            .iter()
            .map(|p| Bits::from_fn(column.len(), |i| eval_predicate(p, &column.cells()[i])))
            .collect();
        Self::from_truth_columns(column.len(), predicates, columns)
    }

    pub fn predicates(&self) -> &[ConcretePredicate] {
        &self.predicates
    }

    pub fn predicate(&self, j: usize) -> &ConcretePredicate {
        &self.predicates[j]
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_predicates(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    #[inline]
    pub fn get(&self, cell: usize, predicate: usize) -> bool {
        self.columns[predicate].get(cell)
    }

    pub fn truth_column(&self, predicate: usize) -> &Bits {
        &self.columns[predicate]
    }

    pub fn row(&self, cell: usize) -> &Bits {
        &self.rows[cell]
    }

    pub fn index_of(&self, p: &ConcretePredicate) -> Option<usize> {
        self.predicates.iter().position(|q| q == p)
    }
}

fn numeric_candidates(
    values: &[f64],
    part: Option<DatePart>,
    out: &mut Vec<ConcretePredicate>,
) {
    let sources = NumericSources::from_values(values);
    let mk = |kind, args, prov| ConcretePredicate::new(kind, part, args, false, prov).ok();
    for c in sources.merged() {
        for kind in [
            PredicateKind::Greater,
            PredicateKind::GreaterEquals,
            PredicateKind::Less,
            PredicateKind::LessEquals,
        ] {
            out.extend(mk(kind, PredicateArgs::Number(c.value), c.provenance));
        }
    }
    // Between endpoints: summary statistics and popular constants crossed,
    // plus adjacent pairs of sorted distinct column values.
    let mut endpoints: Vec<f64> = sources.summary.iter().chain(&sources.popular).copied().collect();
    endpoints.sort_by(f64::total_cmp);
    endpoints.dedup();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (i, &lo) in endpoints.iter().enumerate() {
        for &hi in &endpoints[i + 1..] {
            pairs.push((lo, hi));
        }
    }
    pairs.extend(sources.column_values.windows(2).map(|w| (w[0], w[1])));
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs.dedup();
    for (lo, hi) in pairs {
        let prov = sources.provenance_of(lo).max(sources.provenance_of(hi));
        out.extend(mk(PredicateKind::Between, PredicateArgs::Range(lo, hi), prov));
    }
}

fn text_candidates(values: &[&str], case_insensitive: bool, out: &mut Vec<ConcretePredicate>) {
    let sources = TextSources::from_values(values.iter().copied(), case_insensitive);
    let mut push = |kind, s: &String, prov| {
        out.extend(
            ConcretePredicate::new(kind, None, PredicateArgs::Text(s.clone()), case_insensitive, prov)
                .ok(),
        )
    };
    for v in &sources.values {
        push(PredicateKind::Equals, v, Provenance::ColumnValue);
    }
    for t in &sources.tokens {
        push(PredicateKind::Contains, t, Provenance::TokenDelimiter);
        push(PredicateKind::StartsWith, t, Provenance::TokenDelimiter);
        push(PredicateKind::EndsWith, t, Provenance::TokenDelimiter);
    }
    for p in &sources.prefixes {
        push(PredicateKind::StartsWith, p, Provenance::TokenPrefix);
        push(PredicateKind::Contains, p, Provenance::TokenPrefix);
    }
}

/// Every typed predicate that holds on a strict subset of the column.
///
/// Predicates with identical truth columns are collapsed onto one
/// representative: the one whose constant comes from the column values (then
/// summary statistics, then popular constants), preferring comparisons over
/// `between`, ties to the lexicographically smallest rendering. The
/// representative records the provenances of the predicates it absorbed.
/// Output is ordered by rendering.
pub fn generate_predicates(column: &Column, config: &PredicateConfig) -> PredicateMatrix {
    let mut candidates = Vec::new();

    let numbers: Vec<f64> = column
        .cells()
        .iter()
        .filter_map(|c| match c.value {
            CellValue::Number(v) => Some(v),
            _ => None,
        })
        .collect();
    if !numbers.is_empty() {
        numeric_candidates(&numbers, None, &mut candidates);
    }

    if column.has_type(CellType::Date) {
        for part in DatePart::ALL {
            let series: Vec<f64> = column
                .cells()
                .iter()
                .filter_map(|c| match &c.value {
                    CellValue::Date(d) => Some(part.extract(d)),
                    _ => None,
                })
                .collect();
            numeric_candidates(&series, Some(part), &mut candidates);
        }
    }

    let texts: Vec<&str> = column
        .cells()
        .iter()
        .filter_map(|c| match &c.value {
            CellValue::Text(s) => Some(s.as_str()),
            _ => None,
        })
        .collect();
    if !texts.is_empty() {
        text_candidates(&texts, config.case_insensitive, &mut candidates);
    }

    let n = column.len();
    let mut rendered: Vec<(String, ConcretePredicate)> =
        candidates.into_iter().map(|p| (p.render(), p)).collect();
    rendered.sort_by(|a, b| a.0.cmp(&b.0));
    rendered.dedup_by(|a, b| a.0 == b.0);
    // Among predicates with equal truth columns, constants read from the data
    // win over summary statistics, which win over popular constants, and
    // single comparisons win over ranges.
    rendered.sort_by_key(|(_, p)| {
        (constant_rank(p.provenance()), p.kind() == PredicateKind::Between)
    });

    let mut seen: HashMap<Bits, usize> = HashMap::new();
    let mut kept: Vec<(String, ConcretePredicate, Bits)> = Vec::new();
    for (text, p) in rendered {
        let truth = Bits::from_fn(n, |i| eval_predicate(&p, &column.cells()[i]));
        let ones = truth.count_ones();
        if ones == 0 || ones == n {
            continue;
        }
        match seen.get(&truth) {
            Some(&k) => kept[k].1.add_aliases(p.aliases()),
            None => {
                seen.insert(truth.clone(), kept.len());
                kept.push((text, p, truth));
            }
        }
    }

    if kept.len() > config.max_predicates {
        cap(&mut kept, config.max_predicates);
    }
    kept.sort_by(|a, b| a.0.cmp(&b.0));

    let (predicates, columns): (Vec<_>, Vec<_>) = kept.into_iter().map(|(_, p, t)| (p, t)).unzip();
    PredicateMatrix::from_truth_columns(n, predicates, columns)
}

fn constant_rank(p: Provenance) -> u8 {
    match p {
        Provenance::SummaryStat => 1,
        Provenance::Popular => 2,
        _ => 0,
    }
}

/// Drops Between pairs first, then popular-constant predicates, then the tail.
fn cap(kept: &mut Vec<(String, ConcretePredicate, Bits)>, max: usize) {
    let drop_class = |p: &ConcretePredicate| -> u8 {
        if p.kind() == PredicateKind::Between {
            0
        } else if p.provenance() == Provenance::Popular {
            1
        } else {
            2
        }
    };
    let mut order: Vec<usize> = (0..kept.len()).collect();
    // Within a class, drop the least specific provenance and the last rendering first.
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&kept[a].1, &kept[b].1);
        drop_class(pa)
            .cmp(&drop_class(pb))
            .then(pb.provenance().cmp(&pa.provenance()))
            .then(kept[b].0.cmp(&kept[a].0))
    });
    let excess = kept.len() - max;
    let mut remove = vec![false; kept.len()];
    for &i in order.iter().take(excess) {
        remove[i] = true;
    }
    let mut i = 0;
    kept.retain(|_| {
        let keep = !remove[i];
        i += 1;
        keep
    });
}
