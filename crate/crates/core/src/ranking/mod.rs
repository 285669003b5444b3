//! Candidate scoring and combination of per-format candidates into rules.

mod train;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::column::{FormatId, Task};
use crate::error::{Error, Result};
use crate::predicates::Provenance;
use crate::rule::{Branch, Rule};
use crate::tree::Candidate;

pub use train::{loss_and_gradient, train_on_examples, train_ranker, TrainConfig, TrainingExample};

/// Hand-picked description of a candidate rule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleFeatures {
    pub literal_count: f64,
    pub clause_count: f64,
    pub max_clause_len: f64,
    pub negation_count: f64,
    pub column_value_constants: f64,
    pub summary_stat_constants: f64,
    pub popular_constants: f64,
    pub token_constants: f64,
    pub matched_cell_count: f64,
    /// Jaccard overlap between matched cells and the hypothesized positives.
    pub matched_fraction: f64,
    pub soft_negative_violations: f64,
    pub observed_coverage: f64,
    pub tree_accuracy: f64,
    pub iteration_index: f64,
}

pub const FEATURE_NAMES: [&str; 14] = [
    "literal_count",
    "clause_count",
    "max_clause_len",
    "negation_count",
    "column_value_constants",
    "summary_stat_constants",
    "popular_constants",
    "token_constants",
    "matched_cell_count",
    "matched_fraction",
    "soft_negative_violations",
    "observed_coverage",
    "tree_accuracy",
    "iteration_index",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();

impl RuleFeatures {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.literal_count,
            self.clause_count,
            self.max_clause_len,
            self.negation_count,
            self.column_value_constants,
            self.summary_stat_constants,
            self.popular_constants,
            self.token_constants,
            self.matched_cell_count,
            self.matched_fraction,
            self.soft_negative_violations,
            self.observed_coverage,
            self.tree_accuracy,
            self.iteration_index,
        ]
    }
}

/// What a scorer may look at besides the candidates.
#[derive(Clone, Copy, Debug)]
pub struct ScoringContext<'a> {
    pub task: &'a Task,
    /// Hypothesized format per cell (`None` when unknown).
    pub hypothesis: &'a [Option<FormatId>],
    pub soft_negatives: &'a [usize],
}

pub fn extract_features(candidate: &Candidate, ctx: &ScoringContext<'_>) -> RuleFeatures {
    let dnf = &candidate.dnf;
    let mut f = RuleFeatures {
        literal_count: dnf.literal_count() as f64,
        clause_count: dnf.clauses().len() as f64,
        max_clause_len: dnf.clauses().iter().map(Vec::len).max().unwrap_or(0) as f64,
        tree_accuracy: candidate.tree_accuracy,
        iteration_index: candidate.iteration as f64,
        ..RuleFeatures::default()
    };
    for lit in dnf.literals() {
        if lit.negated {
            f.negation_count += 1.0;
        }
        // A literal counts once for every constant source that yields its
        // truth column.
        let aliases = lit.predicate.aliases();
        let has = |p| aliases.contains(p);
        f.column_value_constants += has(Provenance::ColumnValue) as u8 as f64;
        f.summary_stat_constants += has(Provenance::SummaryStat) as u8 as f64;
        f.popular_constants += has(Provenance::Popular) as u8 as f64;
        f.token_constants += (has(Provenance::TokenDelimiter) || has(Provenance::TokenPrefix)) as u8 as f64;
    }
    let matched = &candidate.matched;
    let positives = Bits::from_fn(matched.len(), |i| ctx.hypothesis.get(i).copied().flatten() == Some(candidate.format));
    f.matched_cell_count = matched.count_ones() as f64;
    let union = matched.or(&positives).count_ones();
    f.matched_fraction = if union == 0 {
        1.0
    } else {
        matched.and_count(&positives) as f64 / union as f64
    };
    f.soft_negative_violations = ctx.soft_negatives.iter().filter(|&&i| matched.get(i)).count() as f64;
    let observed: Vec<usize> = ctx
        .task
        .observed
        .iter()
        .filter(|(_, &g)| g == candidate.format)
        .map(|(&i, _)| i)
        .collect();
    f.observed_coverage = if observed.is_empty() {
        1.0
    } else {
        observed.iter().filter(|&&i| matched.get(i)).count() as f64 / observed.len() as f64
    };
    f
}

/// Min-max normalization of each feature over one task's candidate set.
/// Features that are constant over the set map to 0.
pub fn normalize(rows: &[[f64; N_FEATURES]]) -> Vec<[f64; N_FEATURES]> {
    let mut lo = [f64::INFINITY; N_FEATURES];
    let mut hi = [f64::NEG_INFINITY; N_FEATURES];
    for r in rows {
        for k in 0..N_FEATURES {
            lo[k] = lo[k].min(r[k]);
            hi[k] = hi[k].max(r[k]);
        }
    }
    rows.iter()
        .map(|r| {
            let mut out = [0.0; N_FEATURES];
            for k in 0..N_FEATURES {
                if hi[k] > lo[k] {
                    out[k] = (r[k] - lo[k]) / (hi[k] - lo[k]);
                }
            }
            out
        })
        .collect()
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Logistic model over normalized features.
#[derive(Clone, Debug, PartialEq)]
pub struct RankerModel {
    pub weights: [f64; N_FEATURES],
    pub bias: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    weights: BTreeMap<String, f64>,
    bias: f64,
    normalization: String,
}

const NORMALIZATION: &str = "minmax-per-task";

impl Default for RankerModel {
    fn default() -> Self {
        let mut weights = [0.0; N_FEATURES];
        let mut set = |name: &str, w: f64| {
            let k = FEATURE_NAMES.iter().position(|n| *n == name).expect("known feature");
            weights[k] = w;
        };
        set("literal_count", -1.5);
        set("clause_count", -0.5);
        set("negation_count", -0.5);
        set("column_value_constants", 0.5);
        set("summary_stat_constants", -0.2);
        set("popular_constants", -0.3);
        set("matched_fraction", 3.0);
        set("soft_negative_violations", -2.0);
        set("tree_accuracy", 1.0);
        set("iteration_index", -0.2);
        RankerModel { weights, bias: 0.0 }
    }
}

impl RankerModel {
    pub fn score_features(&self, x: &[f64; N_FEATURES]) -> f64 {
        logistic(self.linear(x))
    }

    pub fn linear(&self, x: &[f64; N_FEATURES]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|k| self.weights[k])
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            weights: FEATURE_NAMES
                .iter()
                .zip(self.weights)
                .map(|(n, w)| (n.to_string(), w))
                .collect(),
            bias: self.bias,
            normalization: NORMALIZATION.into(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    /// Parses a model file; missing features get weight 0.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("ranker model: {e}")))?;
        if file.normalization != NORMALIZATION {
            return Err(Error::Config(format!(
                "ranker model: unsupported normalization `{}`",
                file.normalization
            )));
        }
        let mut weights = [0.0; N_FEATURES];
        for (name, w) in file.weights {
            let k = FEATURE_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Config(format!("ranker model: unknown feature `{name}`")))?;
            weights[k] = w;
        }
        Ok(RankerModel {
            weights,
            bias: file.bias,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Assigns a score to every candidate of one task; higher is better.
pub trait Scorer: Send + Sync {
    fn score_all(&self, candidates: &[Candidate], ctx: &ScoringContext<'_>) -> Vec<f64>;
}

impl Scorer for RankerModel {
    fn score_all(&self, candidates: &[Candidate], ctx: &ScoringContext<'_>) -> Vec<f64> {
        let rows: Vec<[f64; N_FEATURES]> = candidates
            .iter()
            .map(|c| extract_features(c, ctx).to_array())
            .collect();
        normalize(&rows).iter().map(|x| self.score_features(x)).collect()
    }
}

/// Gives every candidate the same score, leaving order to the tie-breaks.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstantScorer(pub f64);

impl Scorer for ConstantScorer {
    fn score_all(&self, candidates: &[Candidate], _: &ScoringContext<'_>) -> Vec<f64> {
        vec![self.0; candidates.len()]
    }
}

/// Adapts a function of (rule text, column values, execution bitmap) into a scorer.
pub struct ExternalScorer<F> {
    f: F,
}

impl<F> ExternalScorer<F>
where
    F: Fn(&str, &[String], &[bool]) -> f64 + Send + Sync,
{
    pub fn new(f: F) -> Self {
        ExternalScorer { f }
    }
}

impl<F> Scorer for ExternalScorer<F>
where
    F: Fn(&str, &[String], &[bool]) -> f64 + Send + Sync,
{
    fn score_all(&self, candidates: &[Candidate], ctx: &ScoringContext<'_>) -> Vec<f64> {
        let values: Vec<String> = ctx.task.column.cells().iter().map(|c| c.value.to_string()).collect();
        candidates
            .iter()
            .map(|c| {
                let text = format!("IF {} THEN {}", c.dnf, c.format);
                (self.f)(&text, &values, &c.matched.to_bools())
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    pub score: f64,
}

pub fn score_candidates(
    per_format: &BTreeMap<FormatId, Vec<Candidate>>,
    ctx: &ScoringContext<'_>,
    scorer: &dyn Scorer,
) -> BTreeMap<FormatId, Vec<ScoredCandidate>> {
    let all: Vec<Candidate> = per_format.values().flatten().cloned().collect();
    let scores = scorer.score_all(&all, ctx);
    let mut it = all.into_iter().zip(scores);
    per_format
        .iter()
        .map(|(&f, list)| {
            let scored = it
                .by_ref()
                .take(list.len())
                .map(|(candidate, score)| ScoredCandidate { candidate, score })
                .collect();
            (f, scored)
        })
        .collect()
}

/// A complete rule with its total score.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedRule {
    pub rule: Rule,
    pub score: f64,
    /// Per-branch candidate scores, in branch order.
    pub branch_scores: Vec<f64>,
    pub candidates: Vec<Candidate>,
}

/// Maximum number of combinations examined by the best-first search.
pub const BEAM_CAP: usize = 1000;

/// Scores within this distance are considered tied.
const SCORE_EPS: f64 = 1e-9;

struct Entry {
    total: f64,
    literals: usize,
    text: String,
    index: Vec<usize>,
}

impl Entry {
    /// Descending score, then fewer literals, then text.
    fn rank_cmp(&self, other: &Entry) -> Ordering {
        if (self.total - other.total).abs() > SCORE_EPS {
            return other.total.total_cmp(&self.total);
        }
        self.literals
            .cmp(&other.literals)
            .then_with(|| self.text.cmp(&other.text))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // The heap pops the greatest element, i.e. the best-ranked.
    fn cmp(&self, other: &Self) -> Ordering {
        other.rank_cmp(self).then_with(|| other.index.cmp(&self.index))
    }
}

fn sort_list(list: &[ScoredCandidate]) -> Vec<(ScoredCandidate, String)> {
    let mut v: Vec<(ScoredCandidate, String)> = list
        .iter()
        .map(|c| (c.clone(), c.candidate.dnf.to_string()))
        .collect();
    v.sort_by(|a, b| {
        b.0.score
            .total_cmp(&a.0.score)
            .then(a.0.candidate.dnf.literal_count().cmp(&b.0.candidate.dnf.literal_count()))
            .then_with(|| a.1.cmp(&b.1))
    });
    let mut seen = HashSet::new();
    v.retain(|(_, t)| seen.insert(t.clone()));
    v
}

fn build_rule(parts: &[(FormatId, &ScoredCandidate)]) -> RankedRule {
    let branches = parts
        .iter()
        .map(|(f, c)| Branch {
            dnf: c.candidate.dnf.clone(),
            format: *f,
        })
        .collect();
    RankedRule {
        rule: Rule::new(branches).expect("formats are distinct and non-zero"),
        score: parts.iter().map(|(_, c)| c.score).sum(),
        branch_scores: parts.iter().map(|(_, c)| c.score).collect(),
        candidates: parts.iter().map(|(_, c)| c.candidate.clone()).collect(),
    }
}

fn pairwise_disjoint(parts: &[&Bits]) -> bool {
    for a in 0..parts.len() {
        for b in a + 1..parts.len() {
            if parts[a].intersects(parts[b]) {
                return false;
            }
        }
    }
    true
}

/// Combines one candidate per format into rules whose branches match
/// disjoint cells, best total score first.
///
/// Ties are broken by fewer literals, then by rule text. When no disjoint
/// combination is found within [`BEAM_CAP`] combinations, single-format
/// rules are returned instead.
pub fn combine_and_rank(
    per_format: &BTreeMap<FormatId, Vec<ScoredCandidate>>,
    top_k: usize,
) -> Vec<RankedRule> {
    let formats: Vec<FormatId> = per_format.keys().copied().collect();
    let lists: Vec<Vec<(ScoredCandidate, String)>> = per_format.values().map(|l| sort_list(l)).collect();
    if top_k == 0 || lists.is_empty() || lists.iter().any(Vec::is_empty) {
        return single_format_fallback(&formats, &lists, top_k);
    }

    let make = |index: Vec<usize>| {
        let parts: Vec<&(ScoredCandidate, String)> =
            index.iter().enumerate().map(|(d, &k)| &lists[d][k]).collect();
        Entry {
            total: parts.iter().map(|p| p.0.score).sum(),
            literals: parts.iter().map(|p| p.0.candidate.dnf.literal_count()).sum(),
            text: formats
                .iter()
                .zip(&parts)
                .map(|(f, p)| format!("IF {} THEN {f}", p.1))
                .collect::<Vec<_>>()
                .join("\n"),
            index,
        }
    };

    let mut heap = BinaryHeap::new();
    let mut pushed: HashSet<Vec<usize>> = HashSet::new();
    let start = vec![0; lists.len()];
    pushed.insert(start.clone());
    heap.push(make(start));

    let mut out: Vec<RankedRule> = Vec::new();
    let mut group: Vec<Entry> = Vec::new();
    let mut examined = 0;
    let flush = |group: &mut Vec<Entry>, out: &mut Vec<RankedRule>| {
        group.sort_by(|a, b| a.rank_cmp(b));
        for e in group.drain(..) {
            if out.len() >= top_k {
                break;
            }
            let parts: Vec<(FormatId, &ScoredCandidate)> = e
                .index
                .iter()
                .enumerate()
                .map(|(d, &k)| (formats[d], &lists[d][k].0))
                .collect();
            out.push(build_rule(&parts));
        }
    };
    while let Some(e) = heap.pop() {
        if group.first().is_some_and(|g| (g.total - e.total).abs() > SCORE_EPS) {
            flush(&mut group, &mut out);
            if out.len() >= top_k {
                break;
            }
        }
        if examined >= BEAM_CAP {
            break;
        }
        examined += 1;
        for d in 0..e.index.len() {
            if e.index[d] + 1 < lists[d].len() {
                let mut next = e.index.clone();
                next[d] += 1;
                if pushed.insert(next.clone()) {
                    heap.push(make(next));
                }
            }
        }
        let matched: Vec<&Bits> = e
            .index
            .iter()
            .enumerate()
            .map(|(d, &k)| &lists[d][k].0.candidate.matched)
            .collect();
        if pairwise_disjoint(&matched) {
            group.push(e);
        }
    }
    flush(&mut group, &mut out);
    if out.is_empty() {
        return single_format_fallback(&formats, &lists, top_k);
    }
    out
}

fn single_format_fallback(
    formats: &[FormatId],
    lists: &[Vec<(ScoredCandidate, String)>],
    top_k: usize,
) -> Vec<RankedRule> {
    let mut all: Vec<(FormatId, &ScoredCandidate, &String)> = formats
        .iter()
        .zip(lists)
        .flat_map(|(&f, l)| l.iter().map(move |(c, t)| (f, c, t)))
        .collect();
    all.sort_by(|a, b| {
        b.1.score
            .total_cmp(&a.1.score)
            .then(a.1.candidate.dnf.literal_count().cmp(&b.1.candidate.dnf.literal_count()))
            .then_with(|| (a.0, a.2).cmp(&(b.0, b.2)))
    });
    all.into_iter()
        .take(top_k)
        .map(|(f, c, _)| build_rule(&[(f, c)]))
        .collect()
}

/// Exhaustive reference for [`combine_and_rank`]'s first result.
pub fn exhaustive_best(per_format: &BTreeMap<FormatId, Vec<ScoredCandidate>>) -> Option<RankedRule> {
    let formats: Vec<FormatId> = per_format.keys().copied().collect();
    let lists: Vec<&Vec<ScoredCandidate>> = per_format.values().collect();
    if lists.iter().any(|l| l.is_empty()) {
        return None;
    }
    let mut best: Option<(RankedRule, usize, String)> = None;
    let mut index = vec![0usize; lists.len()];
    loop {
        let parts: Vec<(FormatId, &ScoredCandidate)> =
            index.iter().enumerate().map(|(d, &k)| (formats[d], &lists[d][k])).collect();
        let matched: Vec<&Bits> = parts.iter().map(|(_, c)| &c.candidate.matched).collect();
        if pairwise_disjoint(&matched) {
            let r = build_rule(&parts);
            let lits = r.rule.literal_count();
            let text = r.rule.to_string();
            let better = match &best {
                None => true,
                Some((b, bl, bt)) => {
                    if (r.score - b.score).abs() > SCORE_EPS {
                        r.score > b.score
                    } else {
                        (lits, &text) < (*bl, bt)
                    }
                }
            };
            if better {
                best = Some((r, lits, text));
            }
        }
        let mut d = 0;
        loop {
            if d == index.len() {
                return best.map(|b| b.0);
            }
            index[d] += 1;
            if index[d] < lists[d].len() {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}

/// Formats whose candidate lists are all present.
pub fn formats_of(per_format: &BTreeMap<FormatId, Vec<ScoredCandidate>>) -> BTreeSet<FormatId> {
    per_format.keys().copied().collect()
}
