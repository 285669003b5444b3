//! Seeded synthetic tasks: a random column, a gold rule drawn from the
//! predicates the engine itself would generate, and the gold formatting.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::column::{CellType, CellValue, Column, DateValue, FormatId, Task};
use crate::error::{Error, Result};
use crate::predicates::{
    generate_predicates, ConcretePredicate, PredicateConfig, PredicateKind, PredicateMatrix, Provenance,
};
use crate::rule::{Branch, Clause, Dnf, Literal, Rule};
use crate::tree::{dnf_matches, prune_dnf};

/// Probability of a gold rule with 1, 2, 3 literals per format before
/// truncation to `max_depth`.
pub const DEPTH_WEIGHTS: [f64; 3] = [0.3, 0.5, 0.2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskSpec {
    /// `None` draws a type per task with [`TYPE_MIX`] weights.
    pub column_type: Option<CellType>,
    pub n_cells: usize,
    /// Maximum literals per format (1 to 3).
    pub max_depth: usize,
    pub n_formats: usize,
    /// Minimum number of unformatted cells.
    pub min_unformatted: usize,
    pub max_attempts: usize,
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec {
            column_type: None,
            n_cells: 60,
            max_depth: 2,
            n_formats: 1,
            min_unformatted: 2,
            max_attempts: 1000,
        }
    }
}

/// Relative frequency of text, number and date columns among real-world
/// conditional-formatting rules (586 / 329 / 53 rules).
pub const TYPE_MIX: [(CellType, u32); 3] = [(CellType::Text, 586), (CellType::Number, 329), (CellType::Date, 53)];

const NEGATION_PROB: f64 = 0.1;
const OR_PROB: f64 = 0.4;

pub fn sample_depth(rng: &mut impl Rng, max_depth: usize) -> usize {
    let w = &DEPTH_WEIGHTS[..max_depth.clamp(1, 3)];
    let total: f64 = w.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (k, p) in w.iter().enumerate() {
        if x < *p {
            return k + 1;
        }
        x -= p;
    }
    w.len()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn numeric_column(rng: &mut impl Rng, n: usize) -> Vec<CellValue> {
    let values: Vec<f64> = match rng.gen_range(0..3) {
        0 => {
            let hi = *[10.0, 100.0, 1000.0].choose(rng).unwrap();
            (0..n).map(|_| rng.gen_range(0..=hi as i64) as f64).collect()
        }
        1 => {
            let lo = *[-50.0, 0.0, 0.0, 100.0].choose(rng).unwrap();
            let width = *[1.0, 10.0, 200.0].choose(rng).unwrap();
            (0..n).map(|_| round2(lo + rng.gen::<f64>() * width)).collect()
        }
        _ => {
            let a = rng.gen_range(0.0..50.0);
            let b = a + rng.gen_range(20.0..200.0);
            (0..n)
                .map(|_| {
                    let c = if rng.gen_bool(0.5) { a } else { b };
                    round2(c + rng.gen_range(-10.0..10.0))
                })
                .collect()
        }
    };
    values.into_iter().map(CellValue::Number).collect()
}

const PREFIXES: [&str; 10] = ["inv", "ord", "ref", "acc", "usr", "tmp", "prj", "cus", "sku", "emp"];
const WORDS: [&str; 16] = [
    "alpha", "beta", "gamma", "delta", "north", "south", "east", "west", "red", "green", "blue",
    "amber", "open", "closed", "pending", "review",
];
const PHRASES: [&str; 12] = [
    "done",
    "in progress",
    "todo",
    "blocked",
    "in review",
    "on hold",
    "cancelled",
    "waiting on customer",
    "ready for qa",
    "qa failed",
    "deployed",
    "needs info",
];

fn text_column(rng: &mut impl Rng, n: usize) -> Vec<CellValue> {
    let values: Vec<String> = match rng.gen_range(0..3) {
        0 => {
            let k = rng.gen_range(3..=PHRASES.len());
            let vocab: Vec<&str> = PHRASES.choose_multiple(rng, k).copied().collect();
            (0..n).map(|_| vocab.choose(rng).unwrap().to_string()).collect()
        }
        1 => {
            let k = rng.gen_range(2..=4);
            let prefixes: Vec<&str> = PREFIXES.choose_multiple(rng, k).copied().collect();
            let sep = *["-", "_", " "].choose(rng).unwrap();
            (0..n)
                .map(|_| {
                    format!(
                        "{}{sep}{}{sep}{:03}",
                        prefixes.choose(rng).unwrap(),
                        rng.gen_range(2019..=2023),
                        rng.gen_range(0..1000)
                    )
                })
                .collect()
        }
        _ => {
            let (k1, k2) = (rng.gen_range(2..=5), rng.gen_range(2..=5));
            let first: Vec<&str> = WORDS.choose_multiple(rng, k1).copied().collect();
            let second: Vec<&str> = WORDS.choose_multiple(rng, k2).copied().collect();
            (0..n)
                .map(|_| format!("{} {}", first.choose(rng).unwrap(), second.choose(rng).unwrap()))
                .collect()
        }
    };
    values.into_iter().map(CellValue::Text).collect()
}

fn date_column(rng: &mut impl Rng, n: usize) -> Vec<CellValue> {
    let start = NaiveDate::from_ymd_opt(rng.gen_range(2015..=2023), rng.gen_range(1..=12), 1).expect("valid date");
    let span_days = *[60i64, 365, 3 * 365].choose(rng).unwrap();
    (0..n)
        .map(|_| {
            let d = start + Duration::days(rng.gen_range(0..span_days));
            debug_assert!(d.year() >= 2015);
            CellValue::Date(DateValue { date: d, time: None })
        })
        .collect()
}

pub fn sample_column(rng: &mut impl Rng, ty: CellType, n: usize) -> Column {
    let values = match ty {
        CellType::Number => numeric_column(rng, n),
        CellType::Text => text_column(rng, n),
        CellType::Date => date_column(rng, n),
    };
    Column::from_values(values).expect("n_cells > 0")
}

/// Weights of the constant sources for numeric and date gold literals.
pub const NUMERIC_SOURCE_WEIGHTS: [(Provenance, f64); 3] = [
    (Provenance::ColumnValue, 1.0),
    (Provenance::SummaryStat, 1.0),
    (Provenance::Popular, 1.0),
];

/// Text predicates uniformly; numeric predicates by first drawing a constant
/// source, then a predicate whose truth column that source can produce.
/// Ranges between two adjacent column values are never drawn.
fn sample_predicate<'m>(rng: &mut impl Rng, m: &'m PredicateMatrix) -> &'m ConcretePredicate {
    let preds = m.predicates();
    if preds.iter().any(|p| p.kind().is_text()) {
        return &preds[rng.gen_range(0..preds.len())];
    }
    let pools: Vec<(Vec<usize>, f64)> = NUMERIC_SOURCE_WEIGHTS
        .iter()
        .map(|&(src, w)| {
            let pool: Vec<usize> = (0..preds.len())
                .filter(|&j| {
                    let p = &preds[j];
                    p.aliases().contains(src)
                        && !(p.kind() == PredicateKind::Between && p.provenance() == Provenance::ColumnValue)
                })
                .collect();
            (pool, w)
        })
        .filter(|(pool, _)| !pool.is_empty())
        .collect();
    match pools.choose_weighted(rng, |(_, w)| *w) {
        Ok((pool, _)) => &preds[*pool.choose(rng).expect("non-empty pool")],
        Err(_) => &preds[rng.gen_range(0..preds.len())],
    }
}

const DEPTH_PATIENCE: usize = 100;

fn sample_literal(rng: &mut impl Rng, m: &PredicateMatrix) -> Literal {
    let p = sample_predicate(rng, m).clone();
    if rng.gen_bool(NEGATION_PROB) {
        Literal::neg(p)
    } else {
        Literal::pos(p)
    }
}

/// A DNF with exactly `depth` literals: one clause, or (for depth > 1) a
/// disjunction of smaller clauses.
pub fn sample_dnf(rng: &mut impl Rng, m: &PredicateMatrix, depth: usize) -> Option<Dnf> {
    let mut sizes = vec![depth];
    if depth > 1 && rng.gen_bool(OR_PROB) {
        let split = rng.gen_range(1..depth);
        sizes = vec![split, depth - split];
    }
    let mut clauses: Vec<Clause> = Vec::new();
    for size in sizes {
        let mut clause: Clause = Vec::new();
        while clause.len() < size {
            let l = sample_literal(rng, m);
            if clause.iter().any(|c: &Literal| c.predicate == l.predicate) {
                if m.n_predicates() < size * 2 {
                    return None;
                }
                continue;
            }
            clause.push(l);
        }
        clauses.push(clause);
    }
    Dnf::new(clauses).ok()
}

/// Every clause matches at least two cells and no literal or clause can be
/// dropped without changing the matched cells.
fn is_irredundant(dnf: &Dnf, m: &PredicateMatrix) -> bool {
    let clause_support = |c: &Clause| dnf_matches(&Dnf::new(vec![c.clone()]).expect("clause"), m).count_ones();
    dnf.clauses().iter().all(|c| clause_support(c) >= 2) && prune_dnf(dnf, m).literal_count() == dnf.literal_count()
}

/// Deterministic task for `seed`. Resamples until the gold rule is
/// irredundant, formats at least two cells per format and leaves
/// `min_unformatted` cells unformatted. The column type and rule depths are
/// redrawn only every `DEPTH_PATIENCE` attempts so that rejection keeps their
/// distributions.
pub fn generate_task(seed: u64, spec: &TaskSpec) -> Result<Task> {
    if spec.n_cells < 5 {
        return Err(Error::Generation("n_cells must be at least 5".into()));
    }
    if !(1..=3).contains(&spec.max_depth) || spec.n_formats < 1 {
        return Err(Error::Generation("max_depth must be 1..=3 and n_formats at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut depths = Vec::new();
    let mut ty = CellType::Text;
    for attempt in 0..spec.max_attempts {
        if attempt % DEPTH_PATIENCE == 0 {
            ty = spec
                .column_type
                .unwrap_or_else(|| TYPE_MIX.choose_weighted(&mut rng, |t| t.1).expect("positive weights").0);
            depths = (0..spec.n_formats).map(|_| sample_depth(&mut rng, spec.max_depth)).collect();
        }
        let column = sample_column(&mut rng, ty, spec.n_cells);
        let m = generate_predicates(&column, &PredicateConfig::default());
        if m.is_empty() {
            continue;
        }
        let mut branches = Vec::new();
        for (f, &depth) in (1..=spec.n_formats as FormatId).zip(&depths) {
            match sample_dnf(&mut rng, &m, depth) {
                Some(dnf) => branches.push(Branch { dnf, format: f }),
                None => break,
            }
        }
        if branches.len() != spec.n_formats {
            continue;
        }
        if !branches.iter().all(|b| is_irredundant(&b.dnf, &m)) {
            continue;
        }
        let rule = Rule::new(branches)?;
        if !rule.is_disjoint_on(&column) {
            continue;
        }
        let gold = rule.execute(&column);
        let formatted = gold.iter().filter(|&&f| f != 0).count();
        let each_format_present = (1..=spec.n_formats as FormatId).all(|f| gold.iter().filter(|&&g| g == f).count() >= 2);
        if formatted < 2 || spec.n_cells - formatted < spec.min_unformatted || !each_format_present {
            continue;
        }
        let column = column.with_formats(&gold);
        return Task::new(column, BTreeMap::new(), Some(rule), Some(gold));
    }
    Err(Error::Generation(format!(
        "no acceptable task after {} attempts",
        spec.max_attempts
    )))
}

/// `count` tasks from consecutive seeds starting at `seed`.
pub fn generate_suite(seed: u64, count: usize, spec: &TaskSpec) -> Result<Vec<Task>> {
    (0..count as u64).map(|k| generate_task(seed.wrapping_add(k), spec)).collect()
}

/// Gold rules with injected redundancy, each paired with its column.
///
/// Redundancy is a clause whose matched cells are already covered, or an
/// extra literal that holds on every cell its clause matches.
pub fn redundant_rule_corpus(seed: u64, count: usize) -> Result<Vec<(Rule, Column)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = TaskSpec {
        n_cells: 40,
        ..TaskSpec::default()
    };
    let mut out = Vec::with_capacity(count);
    let mut k = 0u64;
    while out.len() < count {
        k += 1;
        let task = generate_task(seed.wrapping_mul(31).wrapping_add(k), &spec)?;
        let rule = task.gold_rule.clone().expect("generated tasks have gold");
        let column = task.column.clone();
        let m = generate_predicates(&column, &PredicateConfig::default());
        let branch = &rule.branches()[0];
        let matched = branch.dnf.matches(&column);
        let mut clauses: Vec<Clause> = branch.dnf.clauses().to_vec();
        // Try a few random predicates for one that is redundant here.
        let mut injected = false;
        for _ in 0..50 {
            let p = m.predicate(rng.gen_range(0..m.n_predicates())).clone();
            let truth = m.truth_column(m.index_of(&p).expect("own predicate"));
            if rng.gen_bool(0.5) {
                // extra clause p AND q with q from the rule: covered when p AND q matches nothing new
                let q = clauses[0][0].clone();
                let extra = vec![Literal::pos(p.clone()), q];
                let mut trial = clauses.clone();
                trial.push(extra);
                if let Ok(d) = Dnf::new(trial.clone()) {
                    if d.matches(&column) == matched && d.literal_count() > branch.dnf.literal_count() {
                        clauses = trial;
                        injected = true;
                        break;
                    }
                }
            } else {
                let ci = rng.gen_range(0..clauses.len());
                let clause_cells = Dnf::new(vec![clauses[ci].clone()]).expect("clause").matches(&column);
                if clause_cells.and_not(truth).any() || clauses[ci].iter().any(|l| l.predicate == p) {
                    continue;
                }
                let mut trial = clauses.clone();
                trial[ci].push(Literal::pos(p));
                if let Ok(d) = Dnf::new(trial.clone()) {
                    if d.matches(&column) == matched {
                        clauses = trial;
                        injected = true;
                        break;
                    }
                }
            }
        }
        if !injected {
            continue;
        }
        let dnf = Dnf::new(clauses).expect("validated");
        out.push((Rule::single(dnf, branch.format)?, column));
    }
    Ok(out)
}
