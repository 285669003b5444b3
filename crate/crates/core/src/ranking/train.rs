//! Fitting the logistic ranker by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::column::Task;
use crate::error::{Error, Result};
use crate::pipeline::{Engine, EngineConfig};

use super::{extract_features, logistic, normalize, RankerModel, ScoringContext, N_FEATURES};

/// One normalized feature vector and whether its candidate was correct.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub x: [f64; N_FEATURES],
    pub y: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub example_counts: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 2000,
            learning_rate: 0.5,
            l2: 1e-3,
            example_counts: vec![1, 3, 5],
        }
    }
}

/// Mean logistic loss plus `l2/2 * |w|^2`, and its gradient in (weights, bias).
pub fn loss_and_gradient(
    model: &RankerModel,
    data: &[TrainingExample],
    l2: f64,
) -> (f64, [f64; N_FEATURES], f64) {
    let n = data.len().max(1) as f64;
    let mut loss = 0.0;
    let mut gw = [0.0; N_FEATURES];
    let mut gb = 0.0;
    for e in data {
        let z = model.linear(&e.x);
        let y = if e.y { 1.0 } else { 0.0 };
        // log(1 + exp(z)) - y z, computed stably
        loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z;
        let r = logistic(z) - y;
        for k in 0..N_FEATURES {
            gw[k] += r * e.x[k];
        }
        gb += r;
    }
    loss /= n;
    gb /= n;
    for k in 0..N_FEATURES {
        gw[k] = gw[k] / n + l2 * model.weights[k];
        loss += 0.5 * l2 * model.weights[k] * model.weights[k];
    }
    (loss, gw, gb)
}

/// Gradient descent from zero weights; returns the model and the loss per epoch.
pub fn train_on_examples(data: &[TrainingExample], config: &TrainConfig) -> (RankerModel, Vec<f64>) {
    let mut model = RankerModel {
        weights: [0.0; N_FEATURES],
        bias: 0.0,
    };
    let mut curve = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let (loss, gw, gb) = loss_and_gradient(&model, data, config.l2);
        curve.push(loss);
        for k in 0..N_FEATURES {
            model.weights[k] -= config.learning_rate * gw[k];
        }
        model.bias -= config.learning_rate * gb;
    }
    (model, curve)
}

/// Collects labeled candidates from the engine on each task and example count.
/// A candidate is positive when the cells it matches are exactly the gold
/// cells of its format.
pub fn collect_examples(tasks: &[Task], engine: &Engine, counts: &[usize]) -> Result<Vec<TrainingExample>> {
    let mut out = Vec::new();
    for task in tasks {
        let gold = task.gold_formats.as_ref().ok_or(Error::MissingGold)?;
        for &k in counts {
            let t = task.reveal_first(k)?;
            let prep = engine.prepare(&t)?;
            let ctx = ScoringContext {
                task: &t,
                hypothesis: &prep.hypothesis,
                soft_negatives: &prep.soft_negatives,
            };
            let cands: Vec<_> = prep.per_format.values().flatten().collect();
            let rows: Vec<[f64; N_FEATURES]> =
                cands.iter().map(|c| extract_features(c, &ctx).to_array()).collect();
            for (c, x) in cands.iter().zip(normalize(&rows)) {
                let exact = Bits::from_fn(gold.len(), |i| gold[i] == c.format);
                out.push(TrainingExample {
                    x,
                    y: c.matched == exact,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: RankerModel,
    pub curve: Vec<f64>,
    pub n_examples: usize,
    pub n_positive: usize,
}

/// Trains a ranker on candidates enumerated for `tasks`. A training set with
/// a single class yields the default model.
pub fn train_ranker(tasks: &[Task], engine_config: &EngineConfig, config: &TrainConfig) -> Result<TrainOutcome> {
    let engine = Engine::new(engine_config.clone())?;
    let data = collect_examples(tasks, &engine, &config.example_counts)?;
    let n_positive = data.iter().filter(|e| e.y).count();
    if n_positive == 0 || n_positive == data.len() {
        log::warn!("ranker training data has a single class; keeping the default model");
        return Ok(TrainOutcome {
            model: RankerModel::default(),
            curve: Vec::new(),
            n_examples: data.len(),
            n_positive,
        });
    }
    let (model, curve) = train_on_examples(&data, config);
    Ok(TrainOutcome {
        model,
        curve,
        n_examples: data.len(),
        n_positive,
    })
}
