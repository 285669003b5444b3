//! End-to-end learning: predicates, clustering, per-format enumeration,
//! ranking and combination.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::cluster::{cluster, observed_only, ClusterConfig, Combiner, Hypothesis};
use crate::column::{soft_negatives, Column, FormatId, Task, UNFORMATTED};
use crate::error::{Error, Result};
use crate::predicates::{eval_predicate, generate_predicates, PredicateConfig, PredicateMatrix};
use crate::ranking::{
    combine_and_rank, extract_features, score_candidates, RankedRule, RankerModel, RuleFeatures,
    Scorer, ScoringContext,
};
use crate::rule::{Branch, Clause, Dnf, Literal, Rule};
use crate::tree::{
    dnf_matches, enumerate_rules, fallback_candidate, fit_multiclass, one_vs_all_labels,
    prune_dnf, prune_dnf_with, tree_to_dnf_for, Candidate, EnumConfig, LabelConfig, NegativesMode,
};

/// Every engine knob; deserializes from TOML with defaults for missing keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub lambda_a: f64,
    pub lambda_n: usize,
    pub observed_weight: f64,
    pub weight_soft_negatives: bool,
    pub negatives_mode: NegativesMode,
    pub clustering_enabled: bool,
    pub iterative_enumeration_enabled: bool,
    pub max_enum_iterations: usize,
    pub max_predicates: usize,
    pub case_insensitive: bool,
    pub max_iter: usize,
    pub combiner: Combiner,
    pub unknown_competes: bool,
    pub top_k: usize,
    /// Also enumerate on observed examples plus soft negatives alone, and
    /// add every single literal consistent with the observed examples.
    pub evidence_candidates: bool,
    /// Path to a ranker model JSON file; the built-in weights when absent.
    pub ranker_model: Option<PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let e = EnumConfig::default();
        let l = LabelConfig::default();
        let c = ClusterConfig::default();
        let p = PredicateConfig::default();
        EngineConfig {
            lambda_a: e.lambda_a,
            lambda_n: e.lambda_n,
            observed_weight: l.observed_weight,
            weight_soft_negatives: l.weight_soft_negatives,
            negatives_mode: l.negatives_mode,
            clustering_enabled: true,
            iterative_enumeration_enabled: e.iterative,
            max_enum_iterations: e.max_iterations,
            max_predicates: p.max_predicates,
            case_insensitive: p.case_insensitive,
            max_iter: c.max_iter,
            combiner: c.combiner,
            unknown_competes: c.unknown_competes,
            top_k: 5,
            evidence_candidates: true,
            ranker_model: None,
        }
    }
}

/// Named ablations of the default configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    Clustering,
    IterEnum,
    NegativesNone,
    NegativesHard,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::Clustering,
        Ablation::IterEnum,
        Ablation::NegativesNone,
        Ablation::NegativesHard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Clustering => "clustering",
            Ablation::IterEnum => "iter-enum",
            Ablation::NegativesNone => "negatives=none",
            Ablation::NegativesHard => "negatives=hard",
        }
    }

    pub fn from_name(s: &str) -> Option<Ablation> {
        Ablation::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn apply(self, config: &mut EngineConfig) {
        match self {
            Ablation::Clustering => config.clustering_enabled = false,
            Ablation::IterEnum => config.iterative_enumeration_enabled = false,
            Ablation::NegativesNone => config.negatives_mode = NegativesMode::None,
            Ablation::NegativesHard => config.negatives_mode = NegativesMode::Hard,
        }
    }
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: EngineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.lambda_a.is_finite() && self.lambda_a >= 0.0) {
            return bad("lambda_a must be a non-negative number");
        }
        if self.lambda_n < 1 {
            return bad("lambda_n must be at least 1");
        }
        if !(self.observed_weight.is_finite() && self.observed_weight > 0.0) {
            return bad("observed_weight must be positive");
        }
        if self.top_k < 1 {
            return bad("top_k must be at least 1");
        }
        if self.max_predicates < 1 {
            return bad("max_predicates must be at least 1");
        }
        Ok(())
    }

    pub fn with_ablation(mut self, a: Ablation) -> Self {
        a.apply(&mut self);
        self
    }

    pub fn predicate_config(&self) -> PredicateConfig {
        PredicateConfig {
            max_predicates: self.max_predicates,
            case_insensitive: self.case_insensitive,
        }
    }

    pub fn cluster_config(&self) -> ClusterConfig {
        ClusterConfig {
            max_iter: self.max_iter,
            combiner: self.combiner,
            unknown_competes: self.unknown_competes,
        }
    }

    pub fn label_config(&self) -> LabelConfig {
        LabelConfig {
            observed_weight: self.observed_weight,
            weight_soft_negatives: self.weight_soft_negatives,
            negatives_mode: self.negatives_mode,
        }
    }

    pub fn enum_config(&self) -> EnumConfig {
        EnumConfig {
            lambda_a: self.lambda_a,
            lambda_n: self.lambda_n,
            max_iterations: self.max_enum_iterations,
            iterative: self.iterative_enumeration_enabled,
        }
    }
}

/// Where candidates for a format came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateSource {
    Enumeration,
    UnboundedTree,
    SingleLiteral,
    ExampleCover,
    None,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n_cells: usize,
    pub n_predicates: usize,
    pub n_soft_negatives: usize,
    pub clustering_iterations: usize,
    pub candidates_per_format: BTreeMap<FormatId, usize>,
    pub candidate_source: BTreeMap<FormatId, CandidateSource>,
    /// Set when the returned rules come from a joint multi-format tree.
    pub joint_fallback: bool,
    /// Stage that left nothing to return, when no rule was found.
    pub no_rule_reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Suggestion {
    pub rule: Rule,
    pub score: f64,
    pub per_cell_formats: Vec<FormatId>,
    /// Features of each branch, in branch order.
    pub features: Vec<RuleFeatures>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnOutcome {
    pub suggestions: Vec<Suggestion>,
    pub diagnostics: Diagnostics,
}

/// Intermediate state shared by learning and ranker training.
pub struct Prepared {
    pub matrix: PredicateMatrix,
    pub soft_negatives: Vec<usize>,
    pub hypothesis: Hypothesis,
    pub per_format: BTreeMap<FormatId, Vec<Candidate>>,
    pub diagnostics: Diagnostics,
}

/// Immutable engine: a configuration plus a scorer.
#[derive(Clone)]
pub struct Engine {
    config: EngineConfig,
    scorer: Arc<dyn Scorer>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("config", &self.config).finish()
    }
}

impl Default for Engine {
    fn default() -> Self {
        Engine::with_scorer(EngineConfig::default(), Arc::new(RankerModel::default()))
    }
}

impl Engine {
    /// Validates `config` and loads its ranker model, if any.
    pub fn new(config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let model = match &config.ranker_model {
            Some(path) => RankerModel::load(path)?,
            None => RankerModel::default(),
        };
        Ok(Engine::with_scorer(config, Arc::new(model)))
    }

    pub fn with_scorer(config: EngineConfig, scorer: Arc<dyn Scorer>) -> Self {
        Engine { config, scorer }
    }

    /// An engine with `config` sharing this engine's scorer.
    pub fn with_config(&self, config: EngineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Engine {
            config,
            scorer: self.scorer.clone(),
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn scorer(&self) -> &dyn Scorer {
        self.scorer.as_ref()
    }

    /// Runs every stage up to (not including) ranking.
    pub fn prepare(&self, task: &Task) -> Result<Prepared> {
        if task.observed.is_empty() {
            return Err(Error::InvalidTask("at least one formatted example is required".into()));
        }
        let cfg = &self.config;
        let matrix = generate_predicates(&task.column, &cfg.predicate_config());
        let negs = soft_negatives(task);
        let pinned: &[usize] = if cfg.negatives_mode == NegativesMode::None { &[] } else { &negs };
        let mut diagnostics = Diagnostics {
            n_cells: task.len(),
            n_predicates: matrix.n_predicates(),
            n_soft_negatives: negs.len(),
            ..Diagnostics::default()
        };
        let hypothesis: Hypothesis = if cfg.clustering_enabled && !matrix.is_empty() {
            let out = cluster(task, &matrix, pinned, &cfg.cluster_config());
            diagnostics.clustering_iterations = out.iterations;
            out.labels.into_iter().map(Some).collect()
        } else {
            observed_only(task, pinned)
        };
        let mut per_format = BTreeMap::new();
        if !matrix.is_empty() {
            for f in task.observed_formats() {
                let labels = one_vs_all_labels(&hypothesis, f, task, &negs, &cfg.label_config());
                let (mut cands, source) = format_candidates(&matrix, &labels, task, &hypothesis, &cfg.enum_config());
                if cfg.evidence_candidates {
                    let evidence = observed_only(task, pinned);
                    let ev_labels = one_vs_all_labels(&evidence, f, task, &negs, &cfg.label_config());
                    if cfg.clustering_enabled {
                        cands.extend(format_candidates(&matrix, &ev_labels, task, &hypothesis, &cfg.enum_config()).0);
                    }
                    let lits = single_literal_candidates(&matrix, f, task, &hypothesis);
                    cands.extend(lits.into_iter().filter(|c| ev_labels.accepts(|i| c.matched.get(i))));
                    cands = dedupe(cands);
                }
                diagnostics.candidates_per_format.insert(f, cands.len());
                diagnostics.candidate_source.insert(f, source);
                per_format.insert(f, cands);
            }
        }
        Ok(Prepared {
            matrix,
            soft_negatives: negs,
            hypothesis,
            per_format,
            diagnostics,
        })
    }

    /// Ranked rules for `task`, each consistent with every observed example.
    pub fn learn(&self, task: &Task) -> Result<LearnOutcome> {
        let mut prep = self.prepare(task)?;
        let top_k = self.config.top_k;
        if prep.matrix.is_empty() {
            prep.diagnostics.no_rule_reason =
                Some("predicate generation: no predicate separates any cells".into());
            return Ok(LearnOutcome {
                suggestions: Vec::new(),
                diagnostics: prep.diagnostics,
            });
        }
        let ctx = ScoringContext {
            task,
            hypothesis: &prep.hypothesis,
            soft_negatives: &prep.soft_negatives,
        };
        let mut ranked: Vec<RankedRule> = Vec::new();
        if prep.per_format.values().all(|l| !l.is_empty()) {
            let scored = score_candidates(&prep.per_format, &ctx, self.scorer.as_ref());
            ranked = combine_and_rank(&scored, top_k)
                .into_iter()
                .filter(|r| r.rule.branches().len() == prep.per_format.len() && is_consistent(&r.rule, task))
                .collect();
        }
        if ranked.is_empty() {
            if let Some(rule) = joint_fallback(&prep.matrix, task, &prep.hypothesis, &prep.soft_negatives) {
                prep.diagnostics.joint_fallback = true;
                let cands = rule_candidates(&rule, &prep.matrix);
                let scores = self.scorer.score_all(&cands, &ctx);
                ranked.push(RankedRule {
                    score: scores.iter().sum(),
                    branch_scores: scores,
                    candidates: cands,
                    rule,
                });
            }
        }
        if ranked.is_empty() {
            prep.diagnostics.no_rule_reason =
                Some("enumeration: observed examples with different formats are indistinguishable".into());
        }
        let suggestions = ranked
            .into_iter()
            .map(|r| Suggestion {
                per_cell_formats: r.rule.execute(&task.column),
                features: r.candidates.iter().map(|c| extract_features(c, &ctx)).collect(),
                score: r.score,
                rule: r.rule,
            })
            .collect();
        Ok(LearnOutcome {
            suggestions,
            diagnostics: prep.diagnostics,
        })
    }

    /// Simplest rule found whose execution on `column` equals `rule`'s.
    pub fn simplify(&self, rule: &Rule, column: &Column) -> Rule {
        simplify_with(self, rule, column)
    }
}

/// Convenience entry point with the default engine.
pub fn learn(task: &Task, config: &EngineConfig) -> Result<LearnOutcome> {
    Engine::new(config.clone())?.learn(task)
}

fn dedupe(cands: Vec<Candidate>) -> Vec<Candidate> {
    let mut seen = BTreeSet::new();
    cands
        .into_iter()
        .filter(|c| seen.insert(c.dnf.to_string()))
        .collect()
}

/// Candidates for one format, trying progressively weaker generators.
fn format_candidates(
    m: &PredicateMatrix,
    labels: &crate::tree::LabelVector,
    task: &Task,
    hypothesis: &Hypothesis,
    config: &EnumConfig,
) -> (Vec<Candidate>, CandidateSource) {
    let prune = |mut c: Candidate| {
        c.dnf = prune_dnf(&c.dnf, m);
        c
    };
    let cands = dedupe(enumerate_rules(m, labels, config).into_iter().map(prune).collect());
    if !cands.is_empty() {
        return (cands, CandidateSource::Enumeration);
    }
    if let Some(c) = fallback_candidate(m, labels) {
        return (vec![prune(c)], CandidateSource::UnboundedTree);
    }
    let lits = single_literal_candidates(m, labels.format, task, hypothesis);
    if !lits.is_empty() {
        return (lits, CandidateSource::SingleLiteral);
    }
    match example_cover(m, labels.format, task) {
        Some(c) => (vec![c], CandidateSource::ExampleCover),
        None => (Vec::new(), CandidateSource::None),
    }
}

const MAX_LITERAL_CANDIDATES: usize = 32;

/// Single positive predicates true on every observed cell of `format` and
/// false on every other observed cell, closest to the hypothesis first.
fn single_literal_candidates(
    m: &PredicateMatrix,
    format: FormatId,
    task: &Task,
    hypothesis: &Hypothesis,
) -> Vec<Candidate> {
    let positives = Bits::from_fn(m.n_cells(), |i| hypothesis[i] == Some(format));
    let mut scored: Vec<(f64, usize)> = Vec::new();
    for j in 0..m.n_predicates() {
        let col = m.truth_column(j);
        let ok = task.observed.iter().all(|(&i, &f)| col.get(i) == (f == format));
        if ok {
            let union = col.or(&positives).count_ones().max(1);
            scored.push((col.and_count(&positives) as f64 / union as f64, j));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored
        .into_iter()
        .take(MAX_LITERAL_CANDIDATES)
        .enumerate()
        .map(|(k, (acc, j))| Candidate {
            dnf: Dnf::single(Literal::pos(m.predicate(j).clone())),
            format,
            tree_accuracy: acc,
            node_count: 3,
            iteration: k,
            matched: m.truth_column(j).clone(),
        })
        .collect()
}

/// One clause per observed cell of `format`, separating it from every
/// observed cell of another format. `None` when two such cells have equal rows.
fn example_cover(m: &PredicateMatrix, format: FormatId, task: &Task) -> Option<Candidate> {
    let (mine, others): (Vec<usize>, Vec<usize>) = {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (&i, &f) in &task.observed {
            if f == format {
                a.push(i);
            } else {
                b.push(i);
            }
        }
        (a, b)
    };
    let lit = |i: usize, j: usize| {
        let p = m.predicate(j).clone();
        if m.get(i, j) {
            Literal::pos(p)
        } else {
            Literal::neg(p)
        }
    };
    let mut clauses: Vec<Clause> = Vec::new();
    for &i in &mine {
        let mut clause: Clause = Vec::new();
        for &o in &others {
            if clause.iter().any(|l| !l.eval(&task.column.cells()[o])) {
                continue;
            }
            let j = (0..m.n_predicates()).find(|&j| m.get(i, j) != m.get(o, j))?;
            clause.push(lit(i, j));
        }
        if clause.is_empty() {
            clause.push(lit(i, 0));
        }
        clauses.push(clause);
    }
    let dnf = prune_dnf(&Dnf::new(clauses).ok()?, m);
    let matched = dnf_matches(&dnf, m);
    Some(Candidate {
        dnf,
        format,
        tree_accuracy: 0.0,
        node_count: 0,
        iteration: 0,
        matched,
    })
}

/// A multi-format tree on (hypothesis), then (observed + soft negatives),
/// then (observed only); the first that reproduces every observed example.
fn joint_fallback(
    m: &PredicateMatrix,
    task: &Task,
    hypothesis: &Hypothesis,
    negs: &[usize],
) -> Option<Rule> {
    let formats = task.observed_formats();
    let mut classes_of = vec![UNFORMATTED];
    classes_of.extend(&formats);
    let class_index = |f: FormatId| classes_of.iter().position(|&g| g == f).unwrap_or(0);
    let n = task.len();
    let sources: [Box<dyn Fn(usize) -> Option<FormatId>>; 3] = [
        Box::new(|i| task.observed.get(&i).copied().or(hypothesis[i])),
        Box::new(|i| {
            task.observed
                .get(&i)
                .copied()
                .or_else(|| negs.contains(&i).then_some(UNFORMATTED))
        }),
        Box::new(|i| task.observed.get(&i).copied()),
    ];
    for source in &sources {
        let mut classes = vec![0usize; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            if let Some(f) = source(i) {
                classes[i] = class_index(f);
                weights[i] = if task.observed.contains_key(&i) { 2.0 } else { 1.0 };
            }
        }
        let allowed = vec![true; m.n_predicates()];
        let tree = fit_multiclass(m, &classes, &weights, classes_of.len(), &allowed, usize::MAX);
        let mut branches = Vec::new();
        for (k, &f) in classes_of.iter().enumerate().skip(1) {
            if let Ok(dnf) = tree_to_dnf_for(&tree, m, k as u32) {
                branches.push(Branch {
                    dnf: prune_dnf(&dnf, m),
                    format: f,
                });
            }
        }
        if let Ok(rule) = Rule::new(branches) {
            if !rule.branches().is_empty() && is_consistent(&rule, task) {
                return Some(rule);
            }
        }
    }
    // Only one format observed and nothing to contrast it with.
    if formats.len() == 1 {
        let f = formats[0];
        let c = example_cover(m, f, task)?;
        let rule = Rule::single(c.dnf, f).ok()?;
        return is_consistent(&rule, task).then_some(rule);
    }
    None
}

fn rule_candidates(rule: &Rule, m: &PredicateMatrix) -> Vec<Candidate> {
    rule.branches()
        .iter()
        .map(|b| Candidate {
            matched: dnf_matches(&b.dnf, m),
            dnf: b.dnf.clone(),
            format: b.format,
            tree_accuracy: 0.0,
            node_count: 0,
            iteration: 0,
        })
        .collect()
}

/// True when `rule` reproduces every observed example of `task`.
pub fn is_consistent(rule: &Rule, task: &Task) -> bool {
    task.observed
        .iter()
        .all(|(&i, &f)| rule.eval(&task.column.cells()[i]) == f)
}

/// Compares `rule`'s execution with the gold formats, after mapping each
/// predicted format to the gold format of its observed exemplars.
pub fn execution_match(rule: &Rule, task: &Task) -> Result<bool> {
    let gold = task.gold_formats.as_ref().ok_or(Error::MissingGold)?;
    let predicted = rule.execute(&task.column);
    let mut map: BTreeMap<FormatId, FormatId> = BTreeMap::new();
    map.insert(UNFORMATTED, UNFORMATTED);
    let mut ok = true;
    for &i in task.observed.keys() {
        let p = predicted[i];
        match map.get(&p) {
            Some(&g) if g != gold[i] => ok = false,
            Some(_) => {}
            None => {
                map.insert(p, gold[i]);
            }
        }
    }
    let images: BTreeSet<FormatId> = map.values().copied().collect();
    if !ok || images.len() != map.len() {
        map.clear();
    }
    Ok(predicted
        .iter()
        .zip(gold)
        .all(|(p, g)| map.get(p).copied().unwrap_or(*p) == *g))
}

/// Drops branches that match nothing, then prunes literals and clauses of
/// each branch while its matched cells stay the same.
pub fn prune_rule(rule: &Rule, column: &Column) -> Rule {
    let n = column.len();
    let truth = |p: &crate::predicates::ConcretePredicate| {
        Bits::from_fn(n, |i| eval_predicate(p, &column.cells()[i]))
    };
    let branches: Vec<Branch> = rule
        .branches()
        .iter()
        .filter(|b| b.dnf.matches(column).any())
        .map(|b| Branch {
            dnf: prune_dnf_with(&b.dnf, n, &truth),
            format: b.format,
        })
        .collect();
    Rule::new(branches).expect("formats unchanged")
}

fn simplify_with(engine: &Engine, rule: &Rule, column: &Column) -> Rule {
    let target = rule.execute(column);
    let mut best = rule.clone();
    let mut consider = |r: Rule| {
        if r.literal_count() < best.literal_count() && r.execute(column) == target {
            best = r;
        }
    };
    consider(prune_rule(rule, column));

    let observed: BTreeMap<usize, FormatId> = target
        .iter()
        .enumerate()
        .filter(|(_, &f)| f != UNFORMATTED)
        .map(|(i, &f)| (i, f))
        .collect();
    if observed.is_empty() {
        return best;
    }
    let Ok(task) = Task::new(column.clone(), observed, None, None) else {
        return best;
    };
    let cfg = &engine.config;
    let matrix = generate_predicates(column, &cfg.predicate_config());
    if matrix.is_empty() {
        return best;
    }
    let hypothesis: Hypothesis = target.iter().map(|&f| Some(f)).collect();
    let mut per_format = BTreeMap::new();
    for f in task.observed_formats() {
        let labels = one_vs_all_labels(&hypothesis, f, &task, &[], &cfg.label_config());
        let exact = Bits::from_fn(column.len(), |i| target[i] == f);
        let (cands, _) = format_candidates(&matrix, &labels, &task, &hypothesis, &cfg.enum_config());
        let cands: Vec<Candidate> = cands.into_iter().filter(|c| c.matched == exact).collect();
        if cands.is_empty() {
            return best;
        }
        per_format.insert(f, cands);
    }
    let ctx = ScoringContext {
        task: &task,
        hypothesis: &hypothesis,
        soft_negatives: &[],
    };
    let scored = score_candidates(&per_format, &ctx, engine.scorer());
    // Each branch matches exactly its target cells, so any combination
    // reproduces the execution; keep the one with fewest literals.
    let pick: Vec<Branch> = scored
        .iter()
        .map(|(&f, list)| {
            let c = list
                .iter()
                .min_by(|a, b| {
                    a.candidate
                        .dnf
                        .literal_count()
                        .cmp(&b.candidate.dnf.literal_count())
                        .then(b.score.total_cmp(&a.score))
                        .then_with(|| a.candidate.dnf.to_string().cmp(&b.candidate.dnf.to_string()))
                })
                .expect("non-empty");
            Branch {
                dnf: c.candidate.dnf.clone(),
                format: f,
            }
        })
        .collect();
    if let Ok(r) = Rule::new(pick) {
        consider(r);
    }
    best
}

pub fn simplify_against_column(rule: &Rule, column: &Column) -> Rule {
    Engine::default().simplify(rule, column)
}
