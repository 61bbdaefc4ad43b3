//! Pairwise ranking training for [`LinearScorer`].

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::VALUE_FEATURES;
use super::linear::{LinearScorer, POSITIONS};
use super::traces::TraceDataset;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Upper bound on parameter updates.
    pub max_steps: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
    /// Operations with fewer trace steps keep their initial parameters.
    pub min_op_steps: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_steps: 10_000,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 0,
            min_op_steps: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub updates: usize,
    /// Trace steps available per operation.
    pub steps_per_op: BTreeMap<String, usize>,
    /// Operations left at their initial parameters for lack of data.
    pub untrained_ops: Vec<String>,
    /// Mean pairwise logistic loss over all step/negative pairs, before and after.
    pub loss_before: f64,
    pub loss_after: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn mean_loss(scorer: &LinearScorer, data: &TraceDataset) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for s in &data.steps {
        let pos = scorer.score_features(&s.op, s.position, &s.chosen);
        for neg in &s.negatives {
            let margin = pos - scorer.score_features(&s.op, s.position, neg);
            total += (1.0 + (-margin).exp()).ln();
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

/// Fits per-operation weights so chosen arguments outrank negatives.
/// Deterministic for a fixed `cfg.seed`.
pub fn train_scorer(
    data: &TraceDataset,
    init: Option<&LinearScorer>,
    cfg: &TrainConfig,
) -> (LinearScorer, TrainReport) {
    let mut scorer = init.cloned().unwrap_or_default();
    let mut report = TrainReport::default();
    for s in &data.steps {
        *report.steps_per_op.entry(s.op.clone()).or_default() += 1;
    }
    report.untrained_ops = report
        .steps_per_op
        .iter()
        .filter(|(_, n)| **n < cfg.min_op_steps)
        .map(|(op, _)| op.clone())
        .collect();
    let eligible: Vec<usize> = (0..data.steps.len())
        .filter(|&i| {
            let s = &data.steps[i];
            !s.negatives.is_empty() && report.steps_per_op[&s.op] >= cfg.min_op_steps
        })
        .collect();
    for &i in &eligible {
        let op = &data.steps[i].op;
        if scorer.op_params_mut(op).is_none() {
            scorer.set_params(op, LinearScorer::neutral());
        }
    }
    report.loss_before = mean_loss(&scorer, data);
    if !eligible.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.max_steps {
            let s = &data.steps[eligible[rng.gen_range(0..eligible.len())]];
            let neg = &s.negatives[rng.gen_range(0..s.negatives.len())];
            let p = s.position.min(POSITIONS - 1) * VALUE_FEATURES;
            let w = scorer.op_params_mut(&s.op).expect("initialized above");
            let block = &mut w[p..p + VALUE_FEATURES];
            let margin: f64 = block
                .iter()
                .zip(s.chosen.iter().zip(neg))
                .map(|(w, (a, b))| w * (a - b))
                .sum();
            let g = sigmoid(-margin);
            for (k, wk) in block.iter_mut().enumerate() {
                *wk += cfg.learning_rate * (g * (s.chosen[k] - neg[k]) - cfg.l2 * *wk);
            }
            report.updates += 1;
        }
    }
    report.loss_after = mean_loss(&scorer, data);
    (scorer, report)
}
