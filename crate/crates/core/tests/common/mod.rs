//! Randomized instances and independent reference checks shared by the
//! integration tests and the acceptance target.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use cf_synth::bits::Bits;
use cf_synth::cluster::{cluster, ClusterConfig, ClusterId};
use cf_synth::column::{soft_negatives, Cell, CellType, Column, FormatId, Task, UNFORMATTED};
use cf_synth::harness::{generate_task, sample_column, Reveal, TaskSpec};
use cf_synth::pipeline::{is_consistent, Engine};
use cf_synth::predicates::{eval_predicate, generate_predicates, ConcretePredicate, PredicateConfig, PredicateKind, PredicateMatrix};
use cf_synth::ranking::{combine_and_rank, exhaustive_best, loss_and_gradient, RankerModel, ScoredCandidate, TrainingExample, N_FEATURES};
use cf_synth::rule::{canonicalize_with, exact_match, Branch, Clause, Dnf, Literal, RewriteContext, Rule};
use cf_synth::tree::{dnf_matches, tree_to_dnf, Candidate, DecisionTree, Node};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const TYPES: [CellType; 3] = [CellType::Number, CellType::Text, CellType::Date];

/// A single-typed column, or occasionally a mix of two types.
pub fn random_column(rng: &mut ChaCha8Rng, n: usize) -> Column {
    let ty = *TYPES.choose(rng).unwrap();
    if n >= 4 && rng.gen_bool(0.15) {
        let other = *TYPES.choose(rng).unwrap();
        let k = rng.gen_range(1..n);
        let mut cells: Vec<Cell> = sample_column(rng, ty, k).cells().to_vec();
        cells.extend(sample_column(rng, other, n - k).cells().iter().cloned());
        cells.shuffle(rng);
        return Column::new(cells).unwrap();
    }
    sample_column(rng, ty, n)
}

/// A predicate matrix with one row per assignment of `n` boolean features.
pub fn boolean_matrix(n: usize) -> PredicateMatrix {
    let cells = 1usize << n;
    let preds = (0..n)
        .map(|j| ConcretePredicate::number(PredicateKind::Greater, j as f64).unwrap())
        .collect();
    let cols = (0..n).map(|j| Bits::from_fn(cells, |i| (i >> j) & 1 == 1)).collect();
    PredicateMatrix::from_truth_columns(cells, preds, cols)
}

/// Random tree over `n_features` with distinct features on every path and at
/// least one split.
pub fn random_tree(rng: &mut ChaCha8Rng, n_features: usize, max_depth: usize) -> DecisionTree {
    fn grow(
        rng: &mut ChaCha8Rng,
        nodes: &mut Vec<Node>,
        used: &mut Vec<usize>,
        n_features: usize,
        depth_left: usize,
        force_split: bool,
    ) -> usize {
        let id = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        let split = force_split || (depth_left > 0 && used.len() < n_features && rng.gen_bool(0.65));
        if !split || depth_left == 0 || used.len() >= n_features {
            nodes[id] = Node::Leaf {
                class: rng.gen_range(0..2),
            };
            return id;
        }
        let free: Vec<usize> = (0..n_features).filter(|f| !used.contains(f)).collect();
        let feature = *free.choose(rng).unwrap();
        used.push(feature);
        let on_true = grow(rng, nodes, used, n_features, depth_left - 1, false);
        let on_false = grow(rng, nodes, used, n_features, depth_left - 1, false);
        used.pop();
        nodes[id] = Node::Split {
            feature,
            on_true,
            on_false,
        };
        id
    }
    let mut nodes = Vec::new();
    grow(rng, &mut nodes, &mut Vec::new(), n_features, max_depth.max(1), true);
    DecisionTree::from_nodes(nodes).unwrap()
}

/// Trees whose DNF disagrees with the tree on some assignment, or whose
/// conversion fails although a positive leaf exists.
pub fn dnf_tree_violations(trials: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    let mut bad = 0;
    for _ in 0..trials {
        let n = r.gen_range(1..=10);
        let m = boolean_matrix(n);
        let tree = random_tree(&mut r, n, 6);
        let expected = Bits::from_fn(m.n_cells(), |i| tree.classify(|f| (i >> f) & 1 == 1) == 1);
        match tree_to_dnf(&tree, &m) {
            Ok(dnf) => {
                let by_matrix = dnf_matches(&dnf, &m);
                let by_literals = Bits::from_fn(m.n_cells(), |i| {
                    dnf.clauses()
                        .iter()
                        .any(|c| c.iter().all(|l| ((i >> m.index_of(&l.predicate).unwrap()) & 1 == 1) != l.negated))
                });
                if by_matrix != expected || by_literals != expected {
                    bad += 1;
                }
            }
            Err(_) => {
                if expected.count_ones() > 0 {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// Predicates that hold on no cell or every cell, share a truth column with
/// another predicate, or disagree with direct evaluation.
pub fn predicate_violations(columns: usize, seed: u64) -> usize {
    (0..columns)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(seed.wrapping_add(k as u64));
            let n = r.gen_range(1..=80);
            let column = random_column(&mut r, n);
            let config = PredicateConfig {
                case_insensitive: r.gen_bool(0.3),
                ..PredicateConfig::default()
            };
            let m = generate_predicates(&column, &config);
            let mut seen = BTreeSet::new();
            let mut bad = 0;
            for j in 0..m.n_predicates() {
                let col = m.truth_column(j);
                let ones = col.count_ones();
                if ones == 0 || ones == n {
                    bad += 1;
                }
                if !seen.insert(col.to_bools()) {
                    bad += 1;
                }
                let p = m.predicate(j);
                if (0..n).any(|i| eval_predicate(p, &column.cells()[i]) != col.get(i)) {
                    bad += 1;
                }
            }
            bad
        })
        .sum()
}

/// Random matrix with `n` cells and `width` features, and a task on it with
/// one to three observed cells over one or two formats.
pub fn random_cluster_instance(r: &mut ChaCha8Rng, n: usize, width: usize) -> (Task, PredicateMatrix) {
    let rows: Vec<Vec<bool>> = (0..n).map(|_| (0..width).map(|_| r.gen_bool(0.5)).collect()).collect();
    let preds = (0..width)
        .map(|j| ConcretePredicate::number(PredicateKind::Greater, j as f64).unwrap())
        .collect();
    let cols = (0..width).map(|j| Bits::from_fn(n, |i| rows[i][j])).collect();
    let m = PredicateMatrix::from_truth_columns(n, preds, cols);
    let k = r.gen_range(1..=3.min(n));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(r);
    let n_formats = r.gen_range(1..=2);
    let observed: BTreeMap<usize, FormatId> = idx[..k].iter().map(|&i| (i, r.gen_range(1..=n_formats))).collect();
    let column = Column::numbers(&vec![0.0; n]).unwrap();
    (Task::new(column, observed, None, None).unwrap(), m)
}

/// Straight-line simulation of the clustering update: every unpinned cell
/// moves to the cluster (format clusters by id, then the unknown cluster)
/// with the smallest min + max distance to its other members, reading the
/// previous sweep; stops at a fixpoint or after `max_iter` sweeps.
pub fn brute_force_cluster(task: &Task, m: &PredicateMatrix, pinned_negatives: &[usize], max_iter: usize) -> Vec<FormatId> {
    const UNKNOWN: usize = usize::MAX;
    let n = task.len();
    let rows: Vec<Vec<bool>> = (0..n).map(|i| (0..m.n_predicates()).map(|j| m.get(i, j)).collect()).collect();
    let dist = |a: usize, b: usize| rows[a].iter().zip(&rows[b]).filter(|(x, y)| x != y).count();
    let formats: Vec<FormatId> = std::iter::once(UNFORMATTED)
        .chain(task.observed.values().copied().collect::<BTreeSet<_>>())
        .collect();
    let mut assign = vec![UNKNOWN; n];
    let mut pinned = vec![false; n];
    for &i in pinned_negatives {
        assign[i] = 0;
        pinned[i] = true;
    }
    for (&i, f) in &task.observed {
        assign[i] = formats.iter().position(|g| g == f).unwrap();
        pinned[i] = true;
    }
    let order: Vec<usize> = (0..formats.len()).chain(std::iter::once(UNKNOWN)).collect();
    for _ in 0..max_iter {
        let prev = assign.clone();
        for i in 0..n {
            if pinned[i] {
                continue;
            }
            let mut best: Option<(usize, usize)> = None;
            for &c in &order {
                let ds: Vec<usize> = (0..n).filter(|&j| j != i && prev[j] == c).map(|j| dist(i, j)).collect();
                if ds.is_empty() {
                    continue;
                }
                let score = ds.iter().min().unwrap() + ds.iter().max().unwrap();
                if best.is_none() || score < best.unwrap().0 {
                    best = Some((score, c));
                }
            }
            if let Some((_, c)) = best {
                assign[i] = c;
            }
        }
        if assign == prev {
            break;
        }
    }
    assign
        .iter()
        .map(|&c| if c == UNKNOWN { UNFORMATTED } else { formats[c] })
        .collect()
}

/// Instances where the engine's clustering differs from the simulation.
pub fn clustering_oracle_mismatches(instances: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    let mut bad = 0;
    for _ in 0..instances {
        let n = r.gen_range(2..=12);
        let width = r.gen_range(1..=8);
        let (task, m) = random_cluster_instance(&mut r, n, width);
        let negs = soft_negatives(&task);
        let config = ClusterConfig::default();
        let got = cluster(&task, &m, &negs, &config).labels;
        if got != brute_force_cluster(&task, &m, &negs, config.max_iter) {
            bad += 1;
        }
    }
    bad
}

/// Runs where a pinned cell left its cluster or the sweep count exceeded `max_iter`.
pub fn clustering_constraint_violations(runs: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    let mut bad = 0;
    for _ in 0..runs {
        let n = r.gen_range(2..=40);
        let width = r.gen_range(1..=16);
        let (task, m) = random_cluster_instance(&mut r, n, width);
        let negs = soft_negatives(&task);
        let config = ClusterConfig {
            max_iter: r.gen_range(1..=12),
            ..ClusterConfig::default()
        };
        let out = cluster(&task, &m, &negs, &config);
        let observed_ok = task.observed.iter().all(|(&i, &f)| out.labels[i] == f);
        let negs_ok = negs.iter().all(|&i| out.labels[i] == UNFORMATTED && out.state.assignment[i] == ClusterId::Format(0));
        if !observed_ok || !negs_ok || out.iterations > config.max_iter {
            bad += 1;
        }
    }
    bad
}

fn random_literal(r: &mut ChaCha8Rng, m: &PredicateMatrix) -> Literal {
    let p = m.predicate(r.gen_range(0..m.n_predicates())).clone();
    if r.gen_bool(0.25) {
        Literal::neg(p)
    } else {
        Literal::pos(p)
    }
}

/// Comparisons around a random constant, including bound pairs that can
/// merge into ranges.
fn random_comparison_clause(r: &mut ChaCha8Rng) -> Clause {
    let a = r.gen_range(-20..20) as f64 / 2.0;
    let b = a + r.gen_range(0..20) as f64 / 2.0;
    let kinds = [PredicateKind::Greater, PredicateKind::GreaterEquals, PredicateKind::Less, PredicateKind::LessEquals];
    let lit = |k: PredicateKind, v: f64, neg: bool| {
        let p = ConcretePredicate::number(k, v).unwrap();
        if neg {
            Literal::neg(p)
        } else {
            Literal::pos(p)
        }
    };
    match r.gen_range(0..3) {
        0 => vec![lit(PredicateKind::GreaterEquals, a, false), lit(PredicateKind::LessEquals, b, false)],
        1 => vec![lit(*kinds.choose(r).unwrap(), a, r.gen_bool(0.5))],
        _ => vec![lit(*kinds.choose(r).unwrap(), a, r.gen_bool(0.5)), lit(*kinds.choose(r).unwrap(), b, r.gen_bool(0.5))],
    }
}

/// Random rule over predicates of `m` plus hand-built comparisons.
pub fn random_rule(r: &mut ChaCha8Rng, m: &PredicateMatrix, numeric: bool) -> Rule {
    let n_formats = r.gen_range(1..=2);
    let mut branches = Vec::new();
    for f in 1..=n_formats {
        let n_clauses = r.gen_range(1..=3);
        let mut clauses: Vec<Clause> = Vec::new();
        for _ in 0..n_clauses {
            let clause: Clause = if (numeric && r.gen_bool(0.4)) || m.n_predicates() == 0 {
                random_comparison_clause(r)
            } else {
                let len = r.gen_range(1..=3);
                let mut c: Clause = Vec::new();
                for _ in 0..len {
                    let l = random_literal(r, m);
                    if !c.iter().any(|x| x.predicate == l.predicate) {
                        c.push(l);
                    }
                }
                c
            };
            clauses.push(clause);
        }
        if let Ok(dnf) = Dnf::new(clauses) {
            branches.push(Branch { dnf, format: f });
        }
    }
    Rule::new(branches).unwrap_or_else(|_| Rule::empty())
}

/// Cases where canonicalization changes execution, plus `between` pairs that
/// fail to match their bound form.
pub fn canonicalizer_violations(cases: usize, seed: u64) -> usize {
    (0..cases)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(seed.wrapping_add(k as u64));
            let n = r.gen_range(1..=40);
            let column = random_column(&mut r, n);
            let m = generate_predicates(&column, &PredicateConfig::default());
            let numeric = column.has_type(CellType::Number);
            let rule = random_rule(&mut r, &m, numeric);
            let ty = column.dominant_type();
            let ctx = if column.cells().iter().all(|c| c.cell_type() == ty) {
                RewriteContext::homogeneous(ty)
            } else {
                RewriteContext::default()
            };
            let mut bad = 0;
            for c in [ctx, RewriteContext::default()] {
                if canonicalize_with(&rule, &c).execute(&column) != rule.execute(&column) {
                    bad += 1;
                }
            }
            let lo = r.gen_range(-50..50) as f64 / 4.0;
            let hi = lo + r.gen_range(1..50) as f64 / 4.0;
            let between = Rule::parse(&format!("IF between(c, {lo}, {hi}) THEN 1")).unwrap();
            let bounds = Rule::parse(&format!("IF lessEquals(c, {hi}) AND greaterEquals(c, {lo}) THEN 1")).unwrap();
            if !exact_match(&between, &bounds) {
                bad += 1;
            }
            bad
        })
        .sum()
}

fn candidate(format: FormatId, id: usize, matched: Bits) -> Candidate {
    Candidate {
        dnf: Dnf::single(Literal::pos(ConcretePredicate::number(PredicateKind::Greater, id as f64).unwrap())),
        format,
        tree_accuracy: 1.0,
        node_count: 3,
        iteration: 0,
        matched,
    }
}

/// Instances (at most 100 combinations) where the first ranked rule differs
/// from the exhaustive argmax; returns (instances checked, mismatches).
pub fn ranker_oracle_mismatches(instances: usize, seed: u64) -> (usize, usize) {
    let mut r = rng(seed);
    let mut checked = 0;
    let mut bad = 0;
    while checked < instances {
        let n_formats = r.gen_range(1..=3);
        let n_cells = r.gen_range(4..=12);
        let mut per_format = BTreeMap::new();
        let mut id = 0;
        for f in 1..=n_formats as FormatId {
            let len = r.gen_range(1..=8);
            let list: Vec<ScoredCandidate> = (0..len)
                .map(|_| {
                    id += 1;
                    let matched = Bits::from_fn(n_cells, |_| r.gen_bool(0.25));
                    // Coarse scores so that ties occur.
                    let score = r.gen_range(0..6) as f64 / 5.0;
                    ScoredCandidate {
                        candidate: candidate(f, id, matched),
                        score,
                    }
                })
                .collect();
            per_format.insert(f, list);
        }
        let combos: usize = per_format.values().map(Vec::len).product();
        if combos > 100 {
            continue;
        }
        checked += 1;
        let ranked = combine_and_rank(&per_format, 1);
        match exhaustive_best(&per_format) {
            Some(best) => {
                let ok = ranked.first().is_some_and(|top| {
                    top.rule.to_string() == best.rule.to_string() && (top.score - best.score).abs() < 1e-12
                });
                if !ok {
                    bad += 1;
                }
            }
            None => {
                // No disjoint combination: the single-format fallback.
                if ranked.first().is_none_or(|top| top.rule.branches().len() != 1) {
                    bad += 1;
                }
            }
        }
    }
    (checked, bad)
}

/// Largest relative error between the analytic and central-difference
/// gradient of the ranker loss over random models and data.
pub fn gradient_max_relative_error(trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let data: Vec<TrainingExample> = (0..30)
            .map(|_| {
                let mut x = [0.0; N_FEATURES];
                for v in &mut x {
                    *v = r.gen();
                }
                TrainingExample { x, y: r.gen_bool(0.3) }
            })
            .collect();
        let mut model = RankerModel::default();
        for w in &mut model.weights {
            *w = r.gen_range(-2.0..2.0);
        }
        model.bias = r.gen_range(-1.0..1.0);
        let l2 = 1e-2;
        let (_, gw, gb) = loss_and_gradient(&model, &data, l2);
        let h = 1e-6;
        for k in 0..=N_FEATURES {
            let (mut plus, mut minus) = (model.clone(), model.clone());
            if k < N_FEATURES {
                plus.weights[k] += h;
                minus.weights[k] -= h;
            } else {
                plus.bias += h;
                minus.bias -= h;
            }
            let fd = (loss_and_gradient(&plus, &data, l2).0 - loss_and_gradient(&minus, &data, l2).0) / (2.0 * h);
            let an = if k < N_FEATURES { gw[k] } else { gb };
            worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
        }
    }
    worst
}

/// Generated task with random type, size, depth and format count, revealed
/// through a random subset of one to five formatted cells. Specs the
/// generator cannot satisfy are redrawn.
pub fn random_task(seed: u64) -> Task {
    let mut r = rng(seed ^ 0x5eed);
    loop {
        let spec = TaskSpec {
            column_type: if r.gen_bool(0.25) { None } else { Some(*TYPES.choose(&mut r).unwrap()) },
            n_cells: r.gen_range(8..=80),
            max_depth: r.gen_range(1..=3),
            n_formats: if r.gen_bool(0.8) { 1 } else { 2 },
            ..TaskSpec::default()
        };
        let Ok(task) = generate_task(r.gen(), &spec) else {
            continue;
        };
        let k = r.gen_range(1..=5);
        return Reveal::Random { seed }.apply(&task, "t", k).unwrap();
    }
}

/// Returned rules that violate an observed example, over `count` random
/// tasks; also the wall time.
pub fn observed_consistency(count: usize, seed: u64, engine: &Engine) -> (usize, usize, Duration) {
    let start = Instant::now();
    let (rules, bad) = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let task = random_task(seed.wrapping_add(k));
            let out = engine.learn(&task).expect("learn succeeds on observed tasks");
            let bad = out.suggestions.iter().filter(|s| !is_consistent(&s.rule, &task)).count();
            (out.suggestions.len(), bad)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    (rules, bad, start.elapsed())
}

/// A column of `n` cells of `ty` with its first five formatted cells observed.
pub fn large_task(ty: CellType, n: usize, seed: u64) -> Task {
    let spec = TaskSpec {
        column_type: Some(ty),
        n_cells: n,
        ..TaskSpec::default()
    };
    generate_task(seed, &spec).unwrap().reveal_first(5).unwrap()
}
