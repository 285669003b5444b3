//! Semi-supervised clustering that hypothesizes a format for every cell.
//!
//! Observed examples seed one cluster per format and positional soft
//! negatives seed the unformatted cluster; these cells are pinned. Every other
//! cell starts in an "unknown" cluster and is repeatedly moved to the cluster
//! minimizing a combination of its minimal and maximal distance to the
//! cluster's members. Distance between cells is the number of predicates that
//! hold for exactly one of them. At the end unknown cells are unformatted.

use serde::{Deserialize, Serialize};

use crate::column::{FormatId, Task, UNFORMATTED};
use crate::predicates::PredicateMatrix;

/// Hypothesized format per cell; `None` marks a cell excluded from learning.
pub type Hypothesis = Vec<Option<FormatId>>;

/// How minimal and maximal member distance are combined into a score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    #[default]
    Sum,
    Mean,
    /// Compare by minimal distance, then by maximal distance.
    Lexicographic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub max_iter: usize,
    pub combiner: Combiner,
    /// Whether the unknown cluster competes for cells during reassignment.
    pub unknown_competes: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            max_iter: 10,
            combiner: Combiner::Sum,
            unknown_competes: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClusterId {
    /// Index into [`ClusterState::formats`]; index 0 is the unformatted cluster.
    Format(usize),
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterState {
    pub assignment: Vec<ClusterId>,
    pub pinned: Vec<bool>,
    /// Format of each format cluster: `formats[0] == 0`, then observed formats ascending.
    pub formats: Vec<FormatId>,
}

impl ClusterState {
    pub fn init(task: &Task, soft_negatives: &[usize]) -> Self {
        let n = task.len();
        let mut formats = vec![UNFORMATTED];
        formats.extend(task.observed_formats());
        let mut assignment = vec![ClusterId::Unknown; n];
        let mut pinned = vec![false; n];
        for &i in soft_negatives {
            assignment[i] = ClusterId::Format(0);
            pinned[i] = true;
        }
        for (&i, f) in &task.observed {
            let idx = formats.iter().position(|g| g == f).expect("observed format listed");
            assignment[i] = ClusterId::Format(idx);
            pinned[i] = true;
        }
        ClusterState {
            assignment,
            pinned,
            formats,
        }
    }

    /// Number of clusters, counting the unformatted one but not the unknown one.
    pub fn k(&self) -> usize {
        self.formats.len()
    }

    pub fn labels(&self) -> Vec<FormatId> {
        self.assignment
            .iter()
            .map(|c| match c {
                ClusterId::Format(idx) => self.formats[*idx],
                ClusterId::Unknown => UNFORMATTED,
            })
            .collect()
    }

    fn members(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut by_format = vec![Vec::new(); self.k()];
        let mut unknown = Vec::new();
        for (i, c) in self.assignment.iter().enumerate() {
            match c {
                ClusterId::Format(idx) => by_format[*idx].push(i),
                ClusterId::Unknown => unknown.push(i),
            }
        }
        (by_format, unknown)
    }
}

/// Size of the symmetric difference of the predicate sets holding for `a` and `b`.
pub fn cell_distance(a: usize, b: usize, m: &PredicateMatrix) -> usize {
    m.row(a).xor_count(m.row(b))
}

/// Minimal and maximal distance from `i` to the members of `cluster`.
pub fn min_max_distance(i: usize, cluster: &[usize], m: &PredicateMatrix) -> Option<(usize, usize)> {
    let mut it = cluster.iter().map(|&j| cell_distance(i, j, m));
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d))))
}

/// Score of `i` against a non-empty cluster; lower is closer.
pub fn assign_scores(i: usize, cluster: &[usize], m: &PredicateMatrix) -> usize {
    let (lo, hi) = min_max_distance(i, cluster, m).expect("cluster must be non-empty");
    lo + hi
}

fn combine(combiner: Combiner, lo: usize, hi: usize) -> (f64, f64) {
    match combiner {
        Combiner::Sum => ((lo + hi) as f64, 0.0),
        Combiner::Mean => ((lo + hi) as f64 / 2.0, 0.0),
        Combiner::Lexicographic => (lo as f64, hi as f64),
    }
}

/// Pairwise distances, precomputed when the column is small enough.
struct Distances<'a> {
    m: &'a PredicateMatrix,
    table: Option<Vec<u32>>,
    n: usize,
}

const MAX_TABLE_CELLS: usize = 2048;

impl<'a> Distances<'a> {
    fn new(m: &'a PredicateMatrix) -> Self {
        let n = m.n_cells();
        let table = (n <= MAX_TABLE_CELLS).then(|| {
            let mut t = vec![0u32; n * n];
            for a in 0..n {
                for b in a + 1..n {
                    let d = cell_distance(a, b, m) as u32;
                    t[a * n + b] = d;
                    t[b * n + a] = d;
                }
            }
            t
        });
        Distances { m, table, n }
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.n + b] as usize,
            None => cell_distance(a, b, self.m),
        }
    }

    fn min_max(&self, i: usize, members: &[usize]) -> Option<(usize, usize)> {
        let mut out: Option<(usize, usize)> = None;
        for &j in members {
            if j == i {
                continue;
            }
            let d = self.get(i, j);
            out = Some(match out {
                None => (d, d),
                Some((lo, hi)) => (lo.min(d), hi.max(d)),
            });
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct ClusterOutcome {
    /// Hypothesized format per cell; unknown cells are unformatted.
    pub labels: Vec<FormatId>,
    pub iterations: usize,
    pub state: ClusterState,
}

/// Runs the clustering to a fixpoint or `max_iter` sweeps.
///
/// Each sweep reads the previous sweep's assignment. A cell is scored
/// against every non-empty cluster other than itself; ties go to the lowest
/// format cluster, with the unknown cluster last.
pub fn cluster(
    task: &Task,
    m: &PredicateMatrix,
    soft_negatives: &[usize],
    config: &ClusterConfig,
) -> ClusterOutcome {
    let mut state = ClusterState::init(task, soft_negatives);
    let dist = Distances::new(m);
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let (by_format, unknown) = state.members();
        let mut next = state.assignment.clone();
        for i in 0..task.len() {
            if state.pinned[i] {
                continue;
            }
            let mut candidates: Vec<(ClusterId, &[usize])> = by_format
                .iter()
                .enumerate()
                .map(|(idx, mem)| (ClusterId::Format(idx), mem.as_slice()))
                .collect();
            if config.unknown_competes {
                candidates.push((ClusterId::Unknown, unknown.as_slice()));
            }
            let mut best: Option<((f64, f64), ClusterId)> = None;
            for (id, members) in candidates {
                let Some((lo, hi)) = dist.min_max(i, members) else {
                    continue;
                };
                let score = combine(config.combiner, lo, hi);
                if best.as_ref().is_none_or(|(s, _)| score < *s) {
                    best = Some((score, id));
                }
            }
            if let Some((_, id)) = best {
                next[i] = id;
            }
        }
        if next == state.assignment {
            break;
        }
        state.assignment = next;
    }
    ClusterOutcome {
        labels: state.labels(),
        iterations,
        state,
    }
}

/// Labels without clustering: observed formats, soft negatives unformatted,
/// everything else excluded.
pub fn observed_only(task: &Task, soft_negatives: &[usize]) -> Hypothesis {
    let mut h = vec![None; task.len()];
    for &i in soft_negatives {
        h[i] = Some(UNFORMATTED);
    }
    for (&i, &f) in &task.observed {
        h[i] = Some(f);
    }
    h
}
