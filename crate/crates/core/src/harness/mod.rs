//! Benchmark runs, reports and convergence studies over tasks with gold answers.

mod generate;

pub use generate::{
    generate_suite, generate_task, redundant_rule_corpus, sample_column, sample_depth, sample_dnf, TaskSpec,
    DEPTH_WEIGHTS, NUMERIC_SOURCE_WEIGHTS, TYPE_MIX,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::column::{load_task, CellType, FormatId, Task, UNFORMATTED};
use crate::error::{Error, Result};
use crate::pipeline::{execution_match, Engine};
use crate::rule::{exact_match_with, RewriteContext, Rule};

/// A task with a stable identifier for report rows.
#[derive(Clone, Debug)]
pub struct NamedTask {
    pub id: String,
    pub task: Task,
}

impl NamedTask {
    pub fn new(id: impl Into<String>, task: Task) -> Self {
        NamedTask { id: id.into(), task }
    }
}

/// Generated tasks named `gen-<seed>`.
pub fn generated_suite(seed: u64, count: usize, spec: &TaskSpec) -> Result<Vec<NamedTask>> {
    (0..count as u64)
        .map(|k| {
            let s = seed.wrapping_add(k);
            Ok(NamedTask::new(format!("gen-{s:06}"), generate_task(s, spec)?))
        })
        .collect()
}

/// Loads every `*.json` task in `dir`, named by file stem, sorted by name.
pub fn load_task_dir(dir: &Path) -> Result<Vec<NamedTask>> {
    let io = |e: std::io::Error| Error::InvalidTask(format!("{}: {e}", dir.display()));
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(io)?;
        let task = load_task(&text).map_err(|e| Error::InvalidTask(format!("{}: {e}", path.display())))?;
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        out.push(NamedTask::new(id, task));
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

/// Which formatted cells become the observed examples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Reveal {
    /// The first k formatted cells, top to bottom.
    #[default]
    First,
    /// k formatted cells drawn with a seed mixed with the task id.
    Random { seed: u64 },
}

impl Reveal {
    pub fn apply(&self, task: &Task, task_id: &str, k: usize) -> Result<Task> {
        match *self {
            Reveal::First => task.reveal_first(k),
            Reveal::Random { seed } => {
                let mut formatted = task.gold_formatted()?;
                let mixed = task_id.bytes().fold(seed, |h, b| h.wrapping_mul(0x100000001b3).wrapping_add(b as u64));
                formatted.shuffle(&mut ChaCha8Rng::seed_from_u64(mixed));
                formatted.truncate(k);
                formatted.sort_unstable();
                task.reveal(&formatted)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub example_counts: Vec<usize>,
    pub reveal: Reveal,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            example_counts: vec![1, 3, 5],
            reveal: Reveal::First,
        }
    }
}

/// Outcome of one (task, example count) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub task_id: String,
    pub column_type: CellType,
    pub n_cells: usize,
    pub n_formats: usize,
    /// Requested example count.
    pub examples: usize,
    /// Examples actually revealed (clamped to the formatted cells).
    pub observed: usize,
    /// Top-1 suggestion reproduces the gold formatting.
    pub execution_match: bool,
    /// Top-1 suggestion equals the gold rule after canonicalization.
    pub exact_match: bool,
    /// 1-based rank of the first suggestion with an execution match.
    pub hit_depth: Option<usize>,
    pub n_suggestions: usize,
    pub top_rule: Option<String>,
    pub runtime_ms: f64,
}

/// Mean metrics over a group of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub examples: usize,
    /// `None` for the group over all column types.
    pub column_type: Option<CellType>,
    pub n: usize,
    pub execution_match: f64,
    pub exact_match: f64,
    pub top_k_match: f64,
    pub mean_runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub aggregates: Vec<Aggregate>,
}

fn aggregate(rows: &[&BenchmarkRow], examples: usize, column_type: Option<CellType>) -> Aggregate {
    let n = rows.len();
    let mean = |f: &dyn Fn(&BenchmarkRow) -> f64| {
        if n == 0 {
            0.0
        } else {
            rows.iter().map(|r| f(r)).sum::<f64>() / n as f64
        }
    };
    let b = |x: bool| if x { 1.0 } else { 0.0 };
    Aggregate {
        examples,
        column_type,
        n,
        execution_match: mean(&|r| b(r.execution_match)),
        exact_match: mean(&|r| b(r.exact_match)),
        top_k_match: mean(&|r| b(r.hit_depth.is_some())),
        mean_runtime_ms: mean(&|r| r.runtime_ms),
    }
}

impl BenchmarkReport {
    /// Sorts rows by (task id, examples) and computes aggregates per example
    /// count, overall and per column type.
    pub fn from_rows(mut rows: Vec<BenchmarkRow>) -> Self {
        rows.sort_by(|a, b| a.task_id.cmp(&b.task_id).then(a.examples.cmp(&b.examples)));
        let mut groups: BTreeMap<(usize, Option<CellType>), Vec<&BenchmarkRow>> = BTreeMap::new();
        for r in &rows {
            groups.entry((r.examples, None)).or_default().push(r);
            groups.entry((r.examples, Some(r.column_type))).or_default().push(r);
        }
        let aggregates = groups.iter().map(|(&(k, t), rs)| aggregate(rs, k, t)).collect();
        BenchmarkReport { rows, aggregates }
    }

    /// Recomputes the aggregates from the rows.
    pub fn recompute(&self) -> BenchmarkReport {
        BenchmarkReport::from_rows(self.rows.clone())
    }

    pub fn overall(&self, examples: usize) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.examples == examples && a.column_type.is_none())
    }

    /// Mean top-1 execution match at `examples`, or 0 when absent.
    pub fn execution_rate(&self, examples: usize) -> f64 {
        self.overall(examples).map_or(0.0, |a| a.execution_match)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per overall aggregate.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for a in self.aggregates.iter().filter(|a| a.column_type.is_none()) {
            let _ = writeln!(
                s,
                "{} ex: execution {:.1}%  exact {:.1}%  top-k {:.1}%  n={}  mean {:.1} ms",
                a.examples,
                100.0 * a.execution_match,
                100.0 * a.exact_match,
                100.0 * a.top_k_match,
                a.n,
                a.mean_runtime_ms
            );
        }
        s
    }
}

fn rewrite_context(task: &Task) -> RewriteContext {
    let ty = task.column.dominant_type();
    if task.column.cells().iter().all(|c| c.cell_type() == ty) {
        RewriteContext::homogeneous(ty)
    } else {
        RewriteContext::default()
    }
}

fn distinct_formats(gold: &[FormatId]) -> usize {
    let mut f: Vec<FormatId> = gold.iter().copied().filter(|&f| f != UNFORMATTED).collect();
    f.sort_unstable();
    f.dedup();
    f.len()
}

/// Runs `engine` on one revealed task and scores its suggestions.
pub fn evaluate(engine: &Engine, named: &NamedTask, examples: usize, reveal: &Reveal) -> Result<BenchmarkRow> {
    let task = &named.task;
    let gold = task.gold_formats.as_ref().ok_or(Error::MissingGold)?;
    let shown = reveal.apply(task, &named.id, examples)?;
    let start = Instant::now();
    let outcome = engine.learn(&shown)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut hit_depth = None;
    for (rank, s) in outcome.suggestions.iter().enumerate() {
        if execution_match(&s.rule, &shown)? {
            hit_depth = Some(rank + 1);
            break;
        }
    }
    let top: Option<&Rule> = outcome.suggestions.first().map(|s| &s.rule);
    let exact_match = match (top, &task.gold_rule) {
        (Some(r), Some(g)) => exact_match_with(r, g, &rewrite_context(task)),
        _ => false,
    };
    Ok(BenchmarkRow {
        task_id: named.id.clone(),
        column_type: task.column.dominant_type(),
        n_cells: task.len(),
        n_formats: distinct_formats(gold),
        examples,
        observed: shown.observed.len(),
        execution_match: hit_depth == Some(1),
        exact_match,
        hit_depth,
        n_suggestions: outcome.suggestions.len(),
        top_rule: top.map(|r| r.to_string()),
        runtime_ms,
    })
}

/// Every task at every example count, in parallel.
pub fn run_benchmark(tasks: &[NamedTask], config: &BenchConfig, engine: &Engine) -> Result<BenchmarkReport> {
    let jobs: Vec<(&NamedTask, usize)> = tasks
        .iter()
        .flat_map(|t| config.example_counts.iter().map(move |&k| (t, k)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(t, k)| evaluate(engine, t, k, &config.reveal))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkReport::from_rows(rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyAxis {
    /// Number of revealed examples.
    Examples,
    /// Number of unformatted cells kept in the column.
    Unformatted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub axis: StudyAxis,
    pub values: Vec<usize>,
    /// Examples revealed on the unformatted axis.
    pub examples: usize,
}

impl StudyConfig {
    pub fn examples_axis() -> Self {
        StudyConfig {
            axis: StudyAxis::Examples,
            values: (1..=15).collect(),
            examples: 3,
        }
    }

    pub fn unformatted_axis() -> Self {
        StudyConfig {
            axis: StudyAxis::Unformatted,
            values: vec![5, 10, 20, 30, 50, 75, 100],
            examples: 3,
        }
    }
}

/// Mean execution match at one axis value; `column_type` "all" pools every type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub axis_value: usize,
    pub column_type: String,
    pub mean_execution_match: f64,
    pub n: usize,
}

/// The task restricted to its formatted cells plus its first `u` unformatted
/// cells, in column order, together with the kept indices.
pub fn truncate_unformatted(task: &Task, u: usize) -> Result<(Task, Vec<usize>)> {
    let gold = task.gold_formats.as_ref().ok_or(Error::MissingGold)?;
    let mut kept = Vec::new();
    let mut seen = 0;
    for (i, &g) in gold.iter().enumerate() {
        if g != UNFORMATTED {
            kept.push(i);
        } else if seen < u {
            seen += 1;
            kept.push(i);
        }
    }
    let column = task.column.select(&kept)?;
    let sub_gold: Vec<FormatId> = kept.iter().map(|&i| gold[i]).collect();
    Ok((Task::new(column, BTreeMap::new(), None, Some(sub_gold))?, kept))
}

fn study_point(engine: &Engine, named: &NamedTask, config: &StudyConfig, value: usize) -> Result<bool> {
    let task = &named.task;
    match config.axis {
        StudyAxis::Examples => {
            let shown = task.reveal_first(value)?;
            let outcome = engine.learn(&shown)?;
            match outcome.suggestions.first() {
                Some(s) => execution_match(&s.rule, &shown),
                None => Ok(false),
            }
        }
        StudyAxis::Unformatted => {
            let (sub, kept) = truncate_unformatted(task, value)?;
            let shown = sub.reveal_first(config.examples)?;
            let outcome = engine.learn(&shown)?;
            let Some(s) = outcome.suggestions.first() else {
                return Ok(false);
            };
            // Learned on the truncated column, judged on the full one.
            let full_observed: Vec<usize> = shown.observed.keys().map(|&i| kept[i]).collect();
            execution_match(&s.rule, &task.reveal(&full_observed)?)
        }
    }
}

/// Mean execution match per axis value, per column type and pooled.
pub fn convergence_study(tasks: &[NamedTask], config: &StudyConfig, engine: &Engine) -> Result<Vec<StudyRow>> {
    let jobs: Vec<(&NamedTask, usize)> = config
        .values
        .iter()
        .flat_map(|&v| tasks.iter().map(move |t| (t, v)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(t, v)| study_point(engine, t, config, v).map(|ok| (v, t.task.column.dominant_type(), ok)))
        .collect::<Result<Vec<_>>>()?;
    let mut groups: BTreeMap<(usize, String), (usize, usize)> = BTreeMap::new();
    for (v, ty, ok) in results {
        for key in [(v, ty.as_str().to_string()), (v, "all".to_string())] {
            let e = groups.entry(key).or_default();
            e.0 += ok as usize;
            e.1 += 1;
        }
    }
    Ok(groups
        .into_iter()
        .map(|((axis_value, column_type), (hits, n))| StudyRow {
            axis_value,
            column_type,
            mean_execution_match: hits as f64 / n as f64,
            n,
        })
        .collect())
}

/// Plot data: `axis_value,column_type,mean_execution_match,n`.
pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["axis_value", "column_type", "mean_execution_match", "n"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.axis_value.to_string(),
            r.column_type.clone(),
            format!("{:.6}", r.mean_execution_match),
            r.n.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Pooled mean at `value`, if present.
pub fn study_value(rows: &[StudyRow], value: usize) -> Option<f64> {
    rows.iter()
        .find(|r| r.axis_value == value && r.column_type == "all")
        .map(|r| r.mean_execution_match)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column::Column;
    use crate::pipeline::EngineConfig;

    /// Only one truth column holds on the formatted cells.
    fn trivial_task() -> NamedTask {
        let column = Column::numbers(&[1.0, 1.0, 1.0, 40.0, 40.0, 40.0]).unwrap();
        let gold = vec![0, 0, 0, 1, 1, 1];
        let rule = Rule::parse("IF greater(c, 3) THEN 1").ok();
        NamedTask::new("t", Task::new(column, BTreeMap::new(), rule, Some(gold)).unwrap())
    }

    #[test]
    fn clamps_examples_and_matches_trivial_task() {
        let engine = Engine::new(EngineConfig::default()).unwrap();
        let cfg = BenchConfig {
            example_counts: vec![1, 9],
            ..BenchConfig::default()
        };
        let report = run_benchmark(&[trivial_task()], &cfg, &engine).unwrap();
        assert_eq!(report.rows[1].observed, 3);
        assert!(report.rows.iter().all(|r| r.execution_match));
        assert_eq!(report.recompute(), report);
    }

    #[test]
    fn random_reveal_is_deterministic() {
        let t = trivial_task();
        let r = Reveal::Random { seed: 4 };
        let a = r.apply(&t.task, &t.id, 2).unwrap();
        let b = r.apply(&t.task, &t.id, 2).unwrap();
        assert_eq!(a.observed, b.observed);
        assert_eq!(a.observed.len(), 2);
    }

    #[test]
    fn single_task_study_has_one_row_per_value() {
        let engine = Engine::default();
        let cfg = StudyConfig {
            axis: StudyAxis::Unformatted,
            values: vec![1, 2, 3],
            examples: 2,
        };
        let rows = convergence_study(&[trivial_task()], &cfg, &engine).unwrap();
        let pooled: Vec<_> = rows.iter().filter(|r| r.column_type == "all").collect();
        assert_eq!(pooled.len(), 3);
        let csv = study_csv(&rows);
        assert!(csv.starts_with("axis_value,column_type,mean_execution_match,n\n"));
    }

    #[test]
    fn truncation_keeps_formatted_cells() {
        let t = trivial_task();
        let (sub, kept) = truncate_unformatted(&t.task, 1).unwrap();
        assert_eq!(kept, vec![0, 3, 4, 5]);
        assert_eq!(sub.gold_formats.unwrap(), vec![0, 1, 1, 1]);
    }
}
