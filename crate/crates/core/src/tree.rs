//! Weighted decision trees over predicate features, and the enumeration loop
//! that turns successive trees into candidate DNF rules for one format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::column::{FormatId, Task};
use crate::error::{Error, Result};
use crate::predicates::{ConcretePredicate, PredicateMatrix};
use crate::rule::{Clause, Dnf, Literal};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Split { feature: usize, on_true: usize, on_false: usize },
    Leaf { class: u32 },
}

/// A binary tree over matrix features; node 0 is the root.
///
/// For one-vs-all trees class 1 is the positive class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(class: u32) -> Self {
        DecisionTree {
            nodes: vec![Node::Leaf { class }],
        }
    }

    /// Builds a tree from raw nodes, checking that children exist, every node
    /// is reachable exactly once, and paths test distinct features.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidRule("tree has no nodes".into()));
        }
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![(0usize, Vec::<usize>::new())];
        while let Some((i, path)) = stack.pop() {
            let node = nodes
                .get(i)
                .ok_or_else(|| Error::InvalidRule(format!("node {i} does not exist")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidRule(format!("node {i} reached twice")));
            }
            if let Node::Split {
                feature,
                on_true,
                on_false,
            } = node
            {
                if path.contains(feature) {
                    return Err(Error::InvalidRule(format!("feature {feature} repeated on a path")));
                }
                let mut p = path.clone();
                p.push(*feature);
                stack.push((*on_true, p.clone()));
                stack.push((*on_false, p));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidRule("unreachable node".into()));
        }
        Ok(DecisionTree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_feature(&self) -> Option<usize> {
        match self.nodes[0] {
            Node::Split { feature, .. } => Some(feature),
            Node::Leaf { .. } => None,
        }
    }

    /// Class for a feature assignment given as a lookup function.
    pub fn classify(&self, feature: impl Fn(usize) -> bool) -> u32 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature: f,
                    on_true,
                    on_false,
                } => i = if feature(f) { on_true } else { on_false },
            }
        }
    }

    pub fn predict(&self, m: &PredicateMatrix) -> Vec<u32> {
        (0..m.n_cells())
            .map(|i| {
                let row = m.row(i);
                self.classify(|f| row.get(f))
            })
            .collect()
    }

    /// Root-to-leaf paths ending in a leaf of `class`, as (feature, polarity) lists.
    pub fn paths_to(&self, class: u32) -> Vec<Vec<(usize, bool)>> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((i, path)) = stack.pop() {
            match self.nodes[i] {
                Node::Leaf { class: c } => {
                    if c == class {
                        out.push(path);
                    }
                }
                Node::Split {
                    feature,
                    on_true,
                    on_false,
                } => {
                    let mut f = path.clone();
                    f.push((feature, false));
                    stack.push((on_false, f));
                    let mut t = path;
                    t.push((feature, true));
                    stack.push((on_true, t));
                }
            }
        }
        out
    }
}

/// DNF for the positive (class 1) leaves of a one-vs-all tree.
pub fn tree_to_dnf(tree: &DecisionTree, m: &PredicateMatrix) -> Result<Dnf> {
    tree_to_dnf_for(tree, m, 1)
}

/// DNF with one clause per leaf of `class`.
pub fn tree_to_dnf_for(tree: &DecisionTree, m: &PredicateMatrix, class: u32) -> Result<Dnf> {
    let paths = tree.paths_to(class);
    if paths.is_empty() {
        return Err(Error::EmptyRule);
    }
    let mut clauses: Vec<Clause> = Vec::with_capacity(paths.len());
    for path in paths {
        if path.is_empty() {
            return Err(Error::InvalidRule("a leaf-only tree has no predicates".into()));
        }
        clauses.push(
            path.into_iter()
                .map(|(f, pol)| {
                    let p = m.predicate(f).clone();
                    if pol {
                        Literal::pos(p)
                    } else {
                        Literal::neg(p)
                    }
                })
                .collect(),
        );
    }
    Dnf::new(clauses)
}

/// Cells matched by `dnf`, given each predicate's truth column.
pub fn dnf_matches_with(dnf: &Dnf, n: usize, truth: &dyn Fn(&ConcretePredicate) -> Bits) -> Bits {
    let mut out = Bits::zeros(n);
    for clause in dnf.clauses() {
        let mut acc = Bits::ones(n);
        for lit in clause {
            let col = truth(&lit.predicate);
            acc = if lit.negated { acc.and_not(&col) } else { acc.and(&col) };
        }
        out = out.or(&acc);
    }
    out
}

/// Truth column of `p` in `m`, or all-false when `m` lacks it.
fn matrix_truth(m: &PredicateMatrix, p: &ConcretePredicate) -> Bits {
    match m.index_of(p) {
        Some(j) => m.truth_column(j).clone(),
        None => Bits::zeros(m.n_cells()),
    }
}

/// Cells matched by a DNF whose predicates all belong to `m`.
pub fn dnf_matches(dnf: &Dnf, m: &PredicateMatrix) -> Bits {
    dnf_matches_with(dnf, m.n_cells(), &|p| matrix_truth(m, p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Observed,
    SoftNegative,
    Cluster,
    Excluded,
}

/// How soft negatives enter learning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativesMode {
    /// Pinned unformatted during clustering, ordinary training cells afterwards.
    #[default]
    Soft,
    /// Neither pinned nor used for training.
    None,
    /// Like `Soft`, and an accepted tree must classify every one of them correctly.
    Hard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelConfig {
    pub observed_weight: f64,
    /// Give soft negatives the observed weight as well.
    pub weight_soft_negatives: bool,
    pub negatives_mode: NegativesMode,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            observed_weight: 2.0,
            weight_soft_negatives: false,
            negatives_mode: NegativesMode::Soft,
        }
    }
}

/// One-vs-all training targets for a single format.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelVector {
    pub format: FormatId,
    pub target: Vec<bool>,
    pub weight: Vec<f64>,
    pub origin: Vec<Origin>,
    pub hard_negatives: bool,
}

impl LabelVector {
    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    /// Builds labels directly from targets with unit weights.
    pub fn from_targets(format: FormatId, target: Vec<bool>, origin: Vec<Origin>) -> Self {
        let weight = origin
            .iter()
            .map(|o| if *o == Origin::Excluded { 0.0 } else { 1.0 })
            .collect();
        LabelVector {
            format,
            target,
            weight,
            origin,
            hard_negatives: false,
        }
    }

    /// True when `predicted` agrees with every observed cell (and every soft
    /// negative in hard mode).
    pub fn accepts(&self, predicted: impl Fn(usize) -> bool) -> bool {
        (0..self.len()).all(|i| match self.origin[i] {
            Origin::Observed => predicted(i) == self.target[i],
            Origin::SoftNegative if self.hard_negatives => !predicted(i),
            _ => true,
        })
    }

    /// Weighted fraction of cells whose prediction equals the target.
    pub fn accuracy(&self, predicted: impl Fn(usize) -> bool) -> f64 {
        let (mut ok, mut total) = (0.0, 0.0);
        for i in 0..self.len() {
            total += self.weight[i];
            if predicted(i) == self.target[i] {
                ok += self.weight[i];
            }
        }
        if total > 0.0 {
            ok / total
        } else {
            0.0
        }
    }
}

/// Labels for format `format` from hypothesized formats.
///
/// Cells with no hypothesis are excluded with weight 0.
pub fn one_vs_all_labels(
    hypothesis: &[Option<FormatId>],
    format: FormatId,
    task: &Task,
    soft_negatives: &[usize],
    config: &LabelConfig,
) -> LabelVector {
    let n = hypothesis.len();
    let mut target = vec![false; n];
    let mut weight = vec![0.0; n];
    let mut origin = vec![Origin::Excluded; n];
    for i in 0..n {
        if let Some(h) = hypothesis[i] {
            target[i] = h == format;
            weight[i] = 1.0;
            origin[i] = Origin::Cluster;
        }
    }
    for &i in soft_negatives {
        if config.negatives_mode == NegativesMode::None {
            target[i] = false;
            weight[i] = 0.0;
            origin[i] = Origin::Excluded;
        } else {
            target[i] = false;
            weight[i] = if config.weight_soft_negatives {
                config.observed_weight
            } else {
                1.0
            };
            origin[i] = Origin::SoftNegative;
        }
    }
    for (&i, &f) in &task.observed {
        target[i] = f == format;
        weight[i] = config.observed_weight;
        origin[i] = Origin::Observed;
    }
    LabelVector {
        format,
        target,
        weight,
        origin,
        hard_negatives: config.negatives_mode == NegativesMode::Hard,
    }
}

/// Cells grouped by (class, weight) so weighted counts reduce to popcounts.
struct Groups {
    bits: Vec<Bits>,
    class: Vec<usize>,
    weight: Vec<f64>,
}

impl Groups {
    fn new(classes: &[usize], weights: &[f64]) -> Self {
        let n = classes.len();
        let mut index: BTreeMap<(usize, u64), usize> = BTreeMap::new();
        let mut g = Groups {
            bits: Vec::new(),
            class: Vec::new(),
            weight: Vec::new(),
        };
        for i in 0..n {
            let w = weights[i];
            if w <= 0.0 {
                continue;
            }
            let k = *index.entry((classes[i], w.to_bits())).or_insert_with(|| {
                g.bits.push(Bits::zeros(n));
                g.class.push(classes[i]);
                g.weight.push(w);
                g.bits.len() - 1
            });
            g.bits[k].set(i, true);
        }
        g
    }

    fn support(&self, n: usize) -> Bits {
        self.bits.iter().fold(Bits::zeros(n), |acc, b| acc.or(b))
    }
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

fn majority(counts: &[f64]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

/// Greedy top-down induction grown breadth-first until `max_nodes`.
///
/// `classes` are dense class indices `0..n_classes`; cells with zero weight
/// are ignored. Splits maximize weighted Gini gain over `allowed` features
/// (ties to the lowest index) and must put positive weight on both sides;
/// a zero-gain split is still taken so that parity-like targets are reachable.
/// Leaf class is the weighted majority, ties to the lowest class.
pub fn fit_multiclass(
    m: &PredicateMatrix,
    classes: &[usize],
    weights: &[f64],
    n_classes: usize,
    allowed: &[bool],
    max_nodes: usize,
) -> DecisionTree {
    let n = m.n_cells();
    assert_eq!(classes.len(), n);
    assert_eq!(weights.len(), n);
    let groups = Groups::new(classes, weights);
    let features: Vec<usize> = (0..m.n_predicates()).filter(|&j| allowed[j]).collect();

    let mut nodes = vec![Node::Leaf { class: 0 }];
    let mut queue = std::collections::VecDeque::new();
    queue.push_back((0usize, groups.support(n)));
    while let Some((idx, sample)) = queue.pop_front() {
        let gs: Vec<Bits> = groups.bits.iter().map(|b| b.and(&sample)).collect();
        let cnt: Vec<usize> = gs.iter().map(Bits::count_ones).collect();
        let mut counts = vec![0.0; n_classes];
        for (g, &c) in cnt.iter().enumerate() {
            counts[groups.class[g]] += groups.weight[g] * c as f64;
        }
        let total: f64 = counts.iter().sum();
        nodes[idx] = Node::Leaf {
            class: majority(&counts) as u32,
        };
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        if pure || nodes.len() + 2 > max_nodes {
            continue;
        }
        let parent = gini(&counts, total);
        let mut best: Option<(f64, usize)> = None;
        let mut left = vec![0.0; n_classes];
        for &j in &features {
            let col = m.truth_column(j);
            left.iter_mut().for_each(|c| *c = 0.0);
            let mut left_n = 0;
            let mut right_n = 0;
            for (g, b) in gs.iter().enumerate() {
                if cnt[g] == 0 {
                    continue;
                }
                let k = col.and_count(b);
                left_n += k;
                right_n += cnt[g] - k;
                left[groups.class[g]] += groups.weight[g] * k as f64;
            }
            if left_n == 0 || right_n == 0 {
                continue;
            }
            let lw: f64 = left.iter().sum();
            let rw = total - lw;
            let right: Vec<f64> = counts.iter().zip(&left).map(|(a, b)| a - b).collect();
            let gain = parent - (lw / total) * gini(&left, lw) - (rw / total) * gini(&right, rw);
            if best.is_none_or(|(g, _)| gain > g + 1e-12) {
                best = Some((gain, j));
            }
        }
        let Some((_, j)) = best else { continue };
        let col = m.truth_column(j);
        let t = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        nodes.push(Node::Leaf { class: 0 });
        nodes[idx] = Node::Split {
            feature: j,
            on_true: t,
            on_false: t + 1,
        };
        queue.push_back((t, sample.and(col)));
        queue.push_back((t + 1, sample.and_not(col)));
    }
    DecisionTree { nodes }
}

/// One-vs-all tree: class 1 is the target format.
pub fn fit_tree(
    m: &PredicateMatrix,
    labels: &LabelVector,
    allowed: &[bool],
    max_nodes: usize,
) -> DecisionTree {
    let classes: Vec<usize> = labels.target.iter().map(|&t| t as usize).collect();
    fit_multiclass(m, &classes, &labels.weight, 2, allowed, max_nodes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumConfig {
    pub lambda_a: f64,
    pub lambda_n: usize,
    /// Upper bound on loop iterations per format.
    pub max_iterations: usize,
    /// When false only the most accurate accepted tree is kept.
    pub iterative: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            lambda_a: 0.80,
            lambda_n: 7,
            max_iterations: 64,
            iterative: true,
        }
    }
}

/// A per-format rule proposed by the enumeration loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub dnf: Dnf,
    pub format: FormatId,
    pub tree_accuracy: f64,
    pub node_count: usize,
    pub iteration: usize,
    /// Cells of the column matched by `dnf`.
    pub matched: Bits,
}

fn candidate_from_tree(
    tree: &DecisionTree,
    m: &PredicateMatrix,
    labels: &LabelVector,
    iteration: usize,
) -> Option<Candidate> {
    let predicted = tree.predict(m);
    if !labels.accepts(|i| predicted[i] == 1) {
        return None;
    }
    let dnf = tree_to_dnf(tree, m).ok()?;
    let matched = Bits::from_fn(m.n_cells(), |i| predicted[i] == 1);
    Some(Candidate {
        dnf,
        format: labels.format,
        tree_accuracy: labels.accuracy(|i| predicted[i] == 1),
        node_count: tree.node_count(),
        iteration,
        matched,
    })
}

/// Fits trees while the accuracy stays at least `lambda_a`, removing each
/// tree's root feature from the allowed set. A tree becomes a candidate when
/// it classifies the observed cells correctly and has at most `lambda_n` nodes.
pub fn enumerate_rules(m: &PredicateMatrix, labels: &LabelVector, config: &EnumConfig) -> Vec<Candidate> {
    let mut allowed = vec![true; m.n_predicates()];
    let mut remaining = m.n_predicates();
    let mut out: Vec<Candidate> = Vec::new();
    let mut iteration = 0;
    while remaining > 0 && iteration < config.max_iterations {
        let tree = fit_tree(m, labels, &allowed, config.lambda_n);
        let Some(root) = tree.root_feature() else { break };
        allowed[root] = false;
        remaining -= 1;
        let predicted = tree.predict(m);
        let accuracy = labels.accuracy(|i| predicted[i] == 1);
        if tree.node_count() <= config.lambda_n {
            if let Some(c) = candidate_from_tree(&tree, m, labels, iteration) {
                out.push(c);
            }
        }
        iteration += 1;
        if accuracy < config.lambda_a {
            break;
        }
    }
    if !config.iterative && out.len() > 1 {
        let mut best = 0;
        for (k, c) in out.iter().enumerate() {
            if c.tree_accuracy > out[best].tree_accuracy {
                best = k;
            }
        }
        out = vec![out.swap_remove(best)];
    }
    out
}

/// The unrestricted tree over all features, if it is observed-consistent.
pub fn fallback_candidate(m: &PredicateMatrix, labels: &LabelVector) -> Option<Candidate> {
    let allowed = vec![true; m.n_predicates()];
    let tree = fit_tree(m, labels, &allowed, usize::MAX);
    candidate_from_tree(&tree, m, labels, 0)
}

/// Removes literals and clauses that do not change which cells of `m` match.
pub fn prune_dnf(dnf: &Dnf, m: &PredicateMatrix) -> Dnf {
    prune_dnf_with(dnf, m.n_cells(), &|p| matrix_truth(m, p))
}

/// Greedy pruning: drops literals, then whole clauses, in order, whenever
/// the set of matched cells stays the same.
pub fn prune_dnf_with(dnf: &Dnf, n: usize, truth: &dyn Fn(&ConcretePredicate) -> Bits) -> Dnf {
    let mut cache: Vec<(ConcretePredicate, Bits)> = Vec::new();
    for p in dnf.predicates() {
        cache.push((p.clone(), truth(p)));
    }
    let lookup = |p: &ConcretePredicate| {
        cache
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, b)| b.clone())
            .unwrap_or_else(|| Bits::zeros(n))
    };
    let matches = |cs: &[Clause]| {
        let mut out = Bits::zeros(n);
        for clause in cs {
            let mut acc = Bits::ones(n);
            for lit in clause {
                let col = lookup(&lit.predicate);
                acc = if lit.negated { acc.and_not(&col) } else { acc.and(&col) };
            }
            out = out.or(&acc);
        }
        out
    };
    let mut clauses: Vec<Clause> = dnf.clauses().to_vec();
    let target = matches(&clauses);
    for ci in 0..clauses.len() {
        let mut li = 0;
        while clauses[ci].len() > 1 && li < clauses[ci].len() {
            let mut trial = clauses.clone();
            trial[ci].remove(li);
            if matches(&trial) == target {
                clauses = trial;
            } else {
                li += 1;
            }
        }
    }
    let mut ci = 0;
    while clauses.len() > 1 && ci < clauses.len() {
        let mut trial = clauses.clone();
        trial.remove(ci);
        if matches(&trial) == target {
            clauses = trial;
        } else {
            ci += 1;
        }
    }
    let mut unique: Vec<Clause> = Vec::with_capacity(clauses.len());
    for c in clauses {
        if !unique.iter().any(|u| u.len() == c.len() && c.iter().all(|l| u.contains(l))) {
            unique.push(c);
        }
    }
    Dnf::new(unique).expect("pruning keeps clauses non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicates::PredicateKind;

    fn matrix(cols: &[Vec<bool>]) -> PredicateMatrix {
        let n = cols[0].len();
        let preds = (0..cols.len())
            .map(|j| ConcretePredicate::number(PredicateKind::Greater, j as f64).unwrap())
            .collect();
        PredicateMatrix::from_truth_columns(n, preds, cols.iter().map(|c| Bits::from_bools(c)).collect())
    }

    fn labels(target: &[bool]) -> LabelVector {
        LabelVector::from_targets(1, target.to_vec(), vec![Origin::Cluster; target.len()])
    }

    #[test]
    fn single_feature_split() {
        let f = vec![true, false, true, false, false];
        let m = matrix(&[vec![true, true, false, false, true], f.clone()]);
        let t = fit_tree(&m, &labels(&f), &[true, true], usize::MAX);
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.root_feature(), Some(1));
        let dnf = tree_to_dnf(&t, &m).unwrap();
        assert_eq!(dnf.to_string(), "greater(c, 1)");
    }

    #[test]
    fn xor_needs_seven_nodes() {
        let a = vec![false, false, true, true];
        let b = vec![false, true, false, true];
        let y: Vec<bool> = (0..4).map(|i| a[i] != b[i]).collect();
        let m = matrix(&[a, b]);
        let l = labels(&y);
        let t = fit_tree(&m, &l, &[true, true], 7);
        assert_eq!(t.node_count(), 7);
        let p = t.predict(&m);
        assert_eq!(l.accuracy(|i| p[i] == 1), 1.0);
    }

    #[test]
    fn all_negative_is_a_leaf() {
        let m = matrix(&[vec![true, false, true]]);
        let t = fit_tree(&m, &labels(&[false, false, false]), &[true], 7);
        assert_eq!(t, DecisionTree::leaf(0));
        assert_eq!(tree_to_dnf(&t, &m), Err(Error::EmptyRule));
    }

    #[test]
    fn dnf_of_two_level_tree() {
        let m = matrix(&[vec![true, false, false], vec![false, true, false]]);
        let t = DecisionTree::from_nodes(vec![
            Node::Split {
                feature: 0,
                on_true: 1,
                on_false: 2,
            },
            Node::Leaf { class: 1 },
            Node::Split {
                feature: 1,
                on_true: 3,
                on_false: 4,
            },
            Node::Leaf { class: 1 },
            Node::Leaf { class: 0 },
        ])
        .unwrap();
        assert_eq!(
            tree_to_dnf(&t, &m).unwrap().to_string(),
            "(greater(c, 0)) OR (NOT greater(c, 0) AND greater(c, 1))"
        );
        let pruned = prune_dnf(&tree_to_dnf(&t, &m).unwrap(), &m);
        assert_eq!(pruned.to_string(), "(greater(c, 0)) OR (greater(c, 1))");
    }

    #[test]
    fn from_nodes_rejects_repeated_feature() {
        let nodes = vec![
            Node::Split {
                feature: 0,
                on_true: 1,
                on_false: 2,
            },
            Node::Split {
                feature: 0,
                on_true: 3,
                on_false: 4,
            },
            Node::Leaf { class: 0 },
            Node::Leaf { class: 1 },
            Node::Leaf { class: 0 },
        ];
        assert!(DecisionTree::from_nodes(nodes).is_err());
    }

    #[test]
    fn redundant_copies_give_distinct_roots() {
        let f = vec![true, false, true, false, false, true];
        let other = vec![true, true, false, false, true, false];
        let m = matrix(&[f.clone(), other, f.clone(), f.clone()]);
        let mut l = labels(&f);
        l.origin[0] = Origin::Observed;
        let cands = enumerate_rules(&m, &l, &EnumConfig::default());
        assert!(cands.len() >= 3, "{cands:?}");
        let roots: std::collections::BTreeSet<String> =
            cands.iter().map(|c| c.dnf.to_string()).collect();
        assert_eq!(roots.len(), cands.len());
    }

    #[test]
    fn unattainable_threshold_stops_after_first_tree() {
        let f = vec![true, false, true, false];
        let noise = vec![true, true, false, false];
        let m = matrix(&[f.clone(), f.clone(), noise]);
        let cfg = EnumConfig {
            lambda_a: 1.01,
            ..EnumConfig::default()
        };
        assert!(enumerate_rules(&m, &labels(&f), &cfg).len() <= 1);
    }

    #[test]
    fn hard_negatives_reject_misclassified_soft_negative() {
        let mut l = labels(&[true, false, false]);
        l.origin = vec![Origin::Observed, Origin::SoftNegative, Origin::Cluster];
        assert!(l.accepts(|i| i == 0 || i == 1));
        l.hard_negatives = true;
        assert!(!l.accepts(|i| i == 0 || i == 1));
        assert!(l.accepts(|i| i == 0));
    }
}
