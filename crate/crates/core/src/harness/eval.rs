//! Repeated test-set evaluation and its summary statistics.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{ci95, mean, t_test, TTest};
use super::wake::{run_wake, TaskRecord};
use crate::dsl::DSLibrary;
use crate::guidance::Scorer;
use crate::synthesis::{SearchConfig, Task};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub solved: usize,
    pub rate: f64,
    pub records: Vec<TaskRecord>,
}

/// Solutions of one program length, pooled over trials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthRow {
    pub length: usize,
    pub solved: usize,
    pub with_abstraction: usize,
}

impl LengthRow {
    pub fn abstraction_fraction(&self) -> f64 {
        if self.solved == 0 {
            0.0
        } else {
            self.with_abstraction as f64 / self.solved as f64
        }
    }
}

/// Mean number of tasks solved within `x` seconds or candidates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub solved: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub baseline_mean: f64,
    pub test: TTest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub system: String,
    pub tasks: usize,
    pub trials: Vec<TrialResult>,
    pub rates: Vec<f64>,
    pub mean: f64,
    /// Half-width; absent with a single trial.
    pub ci95: Option<f64>,
    pub per_length: Vec<LengthRow>,
    pub time_curve: Vec<CurvePoint>,
    pub candidate_curve: Vec<CurvePoint>,
    pub comparison: Option<Comparison>,
}

impl ExperimentSummary {
    pub fn total_solved(&self) -> usize {
        self.trials.iter().map(|t| t.solved).sum()
    }

    /// Pooled-variance t-test of this system's trial rates against `baseline`.
    pub fn compare_with(&mut self, baseline: &ExperimentSummary) -> Option<&Comparison> {
        let test = t_test(&self.rates, &baseline.rates).ok()?;
        self.comparison = Some(Comparison {
            baseline: baseline.system.clone(),
            baseline_mean: baseline.mean,
            test,
        });
        self.comparison.as_ref()
    }
}

fn curve(mut xs: Vec<f64>, trials: usize) -> Vec<CurvePoint> {
    xs.sort_by(f64::total_cmp);
    let mut points: Vec<CurvePoint> = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let solved = (i + 1) as f64 / trials as f64;
        match points.last_mut() {
            Some(p) if p.x == *x => p.solved = solved,
            _ => points.push(CurvePoint { x: *x, solved }),
        }
    }
    points
}

/// Aggregates finished trials into a summary.
pub fn summarize(system: &str, tasks: usize, trials: Vec<TrialResult>) -> ExperimentSummary {
    let rates: Vec<f64> = trials.iter().map(|t| t.rate).collect();
    let mut lengths: BTreeMap<usize, LengthRow> = BTreeMap::new();
    let mut times = Vec::new();
    let mut candidates = Vec::new();
    for r in trials.iter().flat_map(|t| &t.records).filter(|r| r.solved) {
        let length = r.size.unwrap_or(0);
        let row = lengths.entry(length).or_insert(LengthRow {
            length,
            solved: 0,
            with_abstraction: 0,
        });
        row.solved += 1;
        row.with_abstraction += usize::from(r.uses_abstraction);
        times.push(r.elapsed);
        candidates.push(r.candidates as f64);
    }
    let n = trials.len().max(1);
    ExperimentSummary {
        system: system.to_string(),
        tasks,
        mean: mean(&rates),
        ci95: ci95(&rates).ok(),
        rates,
        trials,
        per_length: lengths.into_values().collect(),
        time_curve: curve(times, n),
        candidate_curve: curve(candidates, n),
        comparison: None,
    }
}

/// Solves `tasks` once per trial with trial-indexed seeds `seed + trial`.
pub fn evaluate_tasks(
    system: &str,
    tasks: &[Task],
    lib: &DSLibrary,
    scorer: &dyn Scorer,
    trials: usize,
    search: &SearchConfig,
    seed: u64,
    workers: usize,
) -> ExperimentSummary {
    let mut results = Vec::with_capacity(trials);
    for trial in 0..trials {
        let trial_seed = seed.wrapping_add(trial as u64);
        let cfg = SearchConfig {
            seed: trial_seed,
            ..search.clone()
        };
        let wake = run_wake(tasks, lib, scorer, &cfg, workers);
        let solved = wake.solved();
        results.push(TrialResult {
            trial,
            seed: trial_seed,
            solved,
            rate: if tasks.is_empty() {
                0.0
            } else {
                solved as f64 / tasks.len() as f64
            },
            records: wake.records(lib),
        });
    }
    summarize(system, tasks.len(), results)
}

/// Splits `tasks` into `(train, test)` pairs after a stable shuffle under
/// `seed`. One fold trains and tests on the whole set; two folds swap the
/// halves.
pub fn make_folds(tasks: &[Task], folds: usize, seed: u64) -> Vec<(Vec<Task>, Vec<Task>)> {
    if folds <= 1 {
        return vec![(tasks.to_vec(), tasks.to_vec())];
    }
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let half = tasks.len() / 2;
    let pick = |idx: &[usize]| -> Vec<Task> {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.iter().map(|&i| tasks[i].clone()).collect()
    };
    let (a, b) = (pick(&order[..half]), pick(&order[half..]));
    vec![(a.clone(), b.clone()), (b, a)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(solved: bool, size: usize, elapsed: f64, uses: bool) -> TaskRecord {
        TaskRecord {
            task: "t".into(),
            solved,
            program: None,
            size: solved.then_some(size),
            elapsed,
            candidates: (elapsed * 10.0) as u64,
            restarts: 0,
            uses_abstraction: uses,
        }
    }

    fn trial(records: Vec<TaskRecord>) -> TrialResult {
        let solved = records.iter().filter(|r| r.solved).count();
        TrialResult {
            trial: 0,
            seed: 0,
            solved,
            rate: solved as f64 / records.len() as f64,
            records,
        }
    }

    #[test]
    fn identical_trials_have_zero_width() {
        let t = || {
            trial(vec![
                record(true, 3, 1.0, false),
                record(false, 0, 5.0, false),
            ])
        };
        let s = summarize("x", 2, vec![t(), t(), t()]);
        assert_eq!(s.ci95, Some(0.0));
        assert_eq!(s.mean, 0.5);
    }

    #[test]
    fn breakdown_and_curves() {
        let a = trial(vec![
            record(true, 5, 2.0, true),
            record(true, 3, 1.0, true),
            record(false, 0, 9.0, true),
        ]);
        let b = trial(vec![
            record(true, 5, 2.0, true),
            record(false, 0, 9.0, false),
            record(false, 0, 9.0, false),
        ]);
        let s = summarize("x", 3, vec![a, b]);
        assert_eq!(
            s.per_length.iter().map(|r| r.solved).sum::<usize>(),
            s.total_solved()
        );
        assert!(s.per_length.iter().all(|r| r.abstraction_fraction() == 1.0));
        assert_eq!(
            s.time_curve,
            vec![
                CurvePoint {
                    x: 1.0,
                    solved: 0.5
                },
                CurvePoint {
                    x: 2.0,
                    solved: 1.5
                }
            ]
        );
        for c in [&s.time_curve, &s.candidate_curve] {
            assert!(c
                .windows(2)
                .all(|w| w[0].x < w[1].x && w[0].solved <= w[1].solved));
        }
    }

    #[test]
    fn folds_partition_the_tasks() {
        let text: String = ["a", "b", "c", "d", "e"]
            .iter()
            .map(|n| format!("name: {n}\ninputs: x:Int\noutput: Int\nexample: x=1 -> 1\n---\n"))
            .collect();
        let tasks = crate::synthesis::parse_tasks(&text).unwrap();
        let folds = make_folds(&tasks, 2, 7);
        assert_eq!(folds.len(), 2);
        assert_eq!(folds[0].0.len() + folds[0].1.len(), tasks.len());
        assert_eq!(folds[0].0, folds[1].1);
    }
}
