//! Constant generators used to concretize predicate arguments.

use std::collections::BTreeSet;

use crate::column::{CellValue, Column};

use super::Provenance;

/// Thresholds people commonly type into rules by hand.
pub const POPULAR_CONSTANTS: [f64; 7] = [0.0, 1.0, -1.0, 10.0, 100.0, 1000.0, 0.5];

const PERCENTILES: [f64; 3] = [25.0, 50.0, 75.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TextConstant {
    pub value: String,
    pub provenance: Provenance,
}

/// Linear-interpolation percentile of sorted data, `q` in `[0, 100]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Numeric constants split by source, each sorted and distinct.
#[derive(Clone, Debug, Default)]
pub(crate) struct NumericSources {
    pub column_values: Vec<f64>,
    pub summary: Vec<f64>,
    pub popular: Vec<f64>,
}

impl NumericSources {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return NumericSources::default();
        }
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
        let mut summary = vec![mean, sorted[0], sorted[sorted.len() - 1]];
        summary.extend(PERCENTILES.iter().map(|&q| percentile(&sorted, q)));
        let mut column_values = sorted;
        column_values.dedup();
        NumericSources {
            column_values,
            summary: sorted_distinct(summary),
            popular: sorted_distinct(POPULAR_CONSTANTS.to_vec()),
        }
    }

    /// Union of all sources; a value keeps its most specific provenance.
    pub fn merged(&self) -> Vec<Constant> {
        let mut out: Vec<Constant> = Vec::new();
        let tagged = [
            (&self.column_values, Provenance::ColumnValue),
            (&self.summary, Provenance::SummaryStat),
            (&self.popular, Provenance::Popular),
        ];
        for (values, provenance) in tagged {
            for &value in values {
                if !out.iter().any(|c| c.value == value) {
                    out.push(Constant { value, provenance });
                }
            }
        }
        out.sort_by(|a, b| a.value.total_cmp(&b.value));
        out
    }

    pub fn provenance_of(&self, v: f64) -> Provenance {
        if self.column_values.contains(&v) {
            Provenance::ColumnValue
        } else if self.summary.contains(&v) {
            Provenance::SummaryStat
        } else {
            Provenance::Popular
        }
    }
}

fn sorted_distinct(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        if *x == 0.0 {
            *x = 0.0;
        }
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Column values, summary statistics and popular constants for the column's numbers.
pub fn generate_numeric_constants(column: &Column) -> Vec<Constant> {
    let values: Vec<f64> = column
        .cells()
        .iter()
        .filter_map(|c| match c.value {
            CellValue::Number(v) => Some(v),
            _ => None,
        })
        .collect();
    NumericSources::from_values(&values).merged()
}

/// Splits on runs of non-alphanumeric characters.
pub(crate) fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty())
}

fn common_prefix<'a>(a: &'a str, b: &str) -> &'a str {
    let end = a
        .char_indices()
        .zip(b.chars())
        .find(|((_, x), y)| x != y)
        .map(|((i, _), _)| i)
        .unwrap_or_else(|| a.len().min(b.len()));
    &a[..end]
}

/// Maximal prefixes shared by at least two distinct values: the branching
/// points of the prefix trie. For sorted distinct strings every pairwise
/// common prefix is the common prefix of some adjacent pair.
pub(crate) fn trie_prefixes(distinct_sorted: &[&str]) -> BTreeSet<String> {
    distinct_sorted
        .windows(2)
        .map(|w| common_prefix(w[0], w[1]))
        .filter(|p| p.chars().count() >= 2)
        .map(str::to_string)
        .collect()
}

/// Text constants split by source.
#[derive(Clone, Debug, Default)]
pub(crate) struct TextSources {
    pub values: BTreeSet<String>,
    pub tokens: BTreeSet<String>,
    pub prefixes: BTreeSet<String>,
}

impl TextSources {
    pub fn from_values<'a>(values: impl IntoIterator<Item = &'a str>, lowercase: bool) -> Self {
        let distinct: BTreeSet<String> = values
            .into_iter()
            .map(|s| if lowercase { s.to_lowercase() } else { s.to_string() })
            .filter(|s| !s.is_empty())
            .collect();
        let tokens = distinct
            .iter()
            .flat_map(|s| tokens(s))
            .map(str::to_string)
            .collect();
        let sorted: Vec<&str> = distinct.iter().map(String::as_str).collect();
        let prefixes = trie_prefixes(&sorted);
        TextSources {
            values: distinct,
            tokens,
            prefixes,
        }
    }
}

/// Full cell values, delimiter tokens and prefix-trie tokens of the column's text cells.
pub fn generate_text_constants(column: &Column) -> Vec<TextConstant> {
    let sources = TextSources::from_values(
        column.cells().iter().filter_map(|c| match &c.value {
            CellValue::Text(s) => Some(s.as_str()),
            _ => None,
        }),
        false,
    );
    let mut out: BTreeSet<TextConstant> = BTreeSet::new();
    let tagged = [
        (sources.values, Provenance::ColumnValue),
        (sources.tokens, Provenance::TokenDelimiter),
        (sources.prefixes, Provenance::TokenPrefix),
    ];
    for (set, provenance) in tagged {
        out.extend(set.into_iter().map(|value| TextConstant { value, provenance }));
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column::Column;

    fn values(c: &[Constant]) -> Vec<f64> {
        c.iter().map(|c| c.value).collect()
    }

    fn text_values(c: &[TextConstant], p: Provenance) -> BTreeSet<String> {
        c.iter()
            .filter(|t| t.provenance == p)
            .map(|t| t.value.clone())
            .collect()
    }

    /// Independent reference: rank-based definition `(n - 1) * q` with explicit weights.
    fn reference_percentile(data: &[f64], q: f64) -> f64 {
        let mut d = data.to_vec();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = q / 100.0 * (d.len() as f64 - 1.0);
        let below = rank as usize;
        let frac = rank - below as f64;
        if below + 1 >= d.len() {
            return d[below];
        }
        d[below] * (1.0 - frac) + d[below + 1] * frac
    }

    #[test]
    fn percentile_matches_reference() {
        let data: Vec<f64> = (1..=100).map(f64::from).collect();
        let expected = reference_percentile(&data, 25.0);
        assert_eq!(expected, 25.75);
        assert_eq!(percentile(&data, 25.0), 25.75);
        for q in [0.0, 10.0, 33.0, 50.0, 75.0, 100.0] {
            assert!((percentile(&data, q) - reference_percentile(&data, q)).abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_constants_small_column() {
        let col = Column::numbers(&[1.0, 2.0, 3.0]).unwrap();
        let c = generate_numeric_constants(&col);
        let v = values(&c);
        for x in [1.0, 2.0, 3.0] {
            assert!(v.contains(&x));
        }
        // 1..3 are column values; mean/median 2 collapse onto them.
        assert!(c.iter().filter(|c| c.value <= 3.0 && c.value >= 1.0).all(|c| c.provenance
            == Provenance::ColumnValue
            || c.value.fract() != 0.0));
        assert!(v.contains(&1.5) && v.contains(&2.5));
        let mut sorted = v.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), v.len());
    }

    #[test]
    fn numeric_constants_singleton_includes_popular() {
        let col = Column::numbers(&[5.0]).unwrap();
        let v = values(&generate_numeric_constants(&col));
        assert!(v.contains(&5.0));
        for p in POPULAR_CONSTANTS {
            assert!(v.contains(&p));
        }
    }

    /// Brute force: every common prefix of every pair, keep the maximal ones.
    fn brute_force_prefixes(vals: &[&str]) -> BTreeSet<String> {
        let mut all = BTreeSet::new();
        for (i, a) in vals.iter().enumerate() {
            for b in &vals[i + 1..] {
                if a == b {
                    continue;
                }
                let p: String = a
                    .chars()
                    .zip(b.chars())
                    .take_while(|(x, y)| x == y)
                    .map(|(x, _)| x)
                    .collect();
                if p.chars().count() >= 2 {
                    all.insert(p);
                }
            }
        }
        all
    }

    #[test]
    fn text_constants_tokens_and_prefix() {
        let col = Column::texts(&["in-progress", "in-review"]).unwrap();
        let c = generate_text_constants(&col);
        let tokens = text_values(&c, Provenance::TokenDelimiter);
        assert_eq!(tokens, ["in", "progress", "review"].map(String::from).into());
        let prefixes = text_values(&c, Provenance::TokenPrefix);
        assert_eq!(prefixes, brute_force_prefixes(&["in-progress", "in-review"]));
        assert_eq!(prefixes, ["in-".to_string()].into());
    }

    #[test]
    fn text_constants_single_value() {
        let col = Column::texts(&["done"]).unwrap();
        let c = generate_text_constants(&col);
        let all: BTreeSet<String> = c.iter().map(|t| t.value.clone()).collect();
        assert_eq!(all, ["done".to_string()].into());
        assert!(text_values(&c, Provenance::TokenPrefix).is_empty());
    }

    #[test]
    fn text_constants_split_on_comma() {
        let col = Column::texts(&["a,b"]).unwrap();
        let tokens = text_values(&generate_text_constants(&col), Provenance::TokenDelimiter);
        assert_eq!(tokens, ["a", "b"].map(String::from).into());
    }

    #[test]
    fn empty_text_never_a_constant() {
        let col = Column::texts(&["", "x"]).unwrap();
        assert!(generate_text_constants(&col).iter().all(|t| !t.value.is_empty()));
    }

    proptest::proptest! {
        #[test]
        fn trie_prefixes_equal_brute_force(words in proptest::collection::vec("[ab-]{0,6}", 0..8)) {
            let mut distinct: Vec<&str> = words.iter().map(String::as_str).collect();
            distinct.sort();
            distinct.dedup();
            proptest::prop_assert_eq!(trie_prefixes(&distinct), brute_force_prefixes(&distinct));
        }
    }
}
