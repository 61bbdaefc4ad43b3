//! Sleep phase: mine abstractions, extend the language, regenerate traces
//! and retrain the scorer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::dsl::DSLibrary;
use crate::guidance::{
    generate_traces, train_scorer, warm_start_new_op, LinearScorer, TraceDataset, TrainConfig,
    TrainReport, WarmStart,
};
use crate::lang::{evaluate, print, EvalLimits};
use crate::librarian::{mine, MineOutcome, Solution};
use crate::synthesis::Task;

/// Rewritten programs that still produce every example's original result.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteCheck {
    pub programs: usize,
    pub preserved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbstractionRecord {
    pub name: String,
    pub arity: usize,
    pub body: String,
    pub signature: String,
    pub tasks: Vec<String>,
    pub matches: usize,
    pub value: i64,
    pub warm_start: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub regenerated: bool,
    pub library_version: u64,
    pub effective_timeout: f64,
    pub episodes: usize,
    pub targets: usize,
    pub steps: usize,
}

impl TraceStats {
    pub fn of(data: &TraceDataset, regenerated: bool) -> Self {
        TraceStats {
            regenerated,
            library_version: data.library_version,
            effective_timeout: data.effective_timeout,
            episodes: data.episodes.len(),
            targets: data.targets.len(),
            steps: data.steps.len(),
        }
    }
}

pub struct SleepOutcome {
    pub library: DSLibrary,
    pub scorer: LinearScorer,
    pub mined: Option<MineOutcome>,
    pub abstractions: Vec<AbstractionRecord>,
    pub rewrite_check: RewriteCheck,
    pub traces: TraceDataset,
    pub trace_stats: TraceStats,
    pub training: TrainReport,
}

/// Seed for a phase of one iteration.
pub fn phase_seed(seed: u64, iteration: usize, phase: u64) -> u64 {
    seed ^ (iteration as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ phase.wrapping_mul(0xbf58_476d_1ce4_e5b9)
}

/// Compares every rewritten program with its original on the task examples.
pub fn check_rewrites(
    originals: &[Solution],
    rewritten: &[(usize, Solution)],
    tasks: &[Task],
    old: &DSLibrary,
    new: &DSLibrary,
    limits: EvalLimits,
) -> RewriteCheck {
    let by_name: BTreeMap<&str, &Task> = tasks.iter().map(|t| (t.name.as_str(), t)).collect();
    let mut check = RewriteCheck::default();
    for (i, r) in rewritten {
        let o = &originals[*i];
        let Some(task) = by_name.get(o.task.as_str()) else {
            continue;
        };
        check.programs += 1;
        let same = task.examples.iter().all(|ex| {
            evaluate(&o.program, &ex.inputs, old, limits)
                == evaluate(&r.program, &ex.inputs, new, limits)
        });
        if same {
            check.preserved += 1;
        }
    }
    check
}

/// Trains a scorer from base-language traces.
pub fn pretrain(lib: &DSLibrary, cfg: &RunConfig) -> (LinearScorer, TraceDataset, TrainReport) {
    let mut tc = cfg.traces.clone();
    tc.seed = phase_seed(cfg.seed, 0, 1);
    let traces = generate_traces(lib, &tc);
    let train = TrainConfig {
        seed: phase_seed(cfg.seed, 0, 2),
        ..cfg.training.clone()
    };
    let (scorer, report) = train_scorer(&traces, None, &train);
    (scorer, traces, report)
}

/// One sleep phase. `previous` traces are reused in baseline mode when the
/// library has not changed since they were generated.
pub fn run_sleep(
    corpus: &[Solution],
    tasks: &[Task],
    lib: &DSLibrary,
    scorer: &LinearScorer,
    previous: Option<&TraceDataset>,
    cfg: &RunConfig,
    iteration: usize,
) -> SleepOutcome {
    let mut library = lib.clone();
    let mut warm = scorer.clone();
    let mut abstractions = Vec::new();
    let mut rewrite_check = RewriteCheck::default();
    let mined =
        (!cfg.baseline && !corpus.is_empty()).then(|| mine(corpus, lib, &cfg.mining, iteration));
    if let Some(m) = &mined {
        for a in m.abstractions() {
            let (next, how) = warm_start_new_op(&warm, a);
            warm = next;
            abstractions.push(AbstractionRecord {
                name: a.name.clone(),
                arity: a.arity,
                body: print(&a.body),
                signature: a.signature.to_string(),
                tasks: a.found_in_tasks.iter().cloned().collect(),
                matches: a.utility.matches,
                value: a.utility.value,
                warm_start: match how {
                    WarmStart::Copied { from } => format!("copied from {from}"),
                    WarmStart::Neutral { reason } => format!("neutral: {reason}"),
                    WarmStart::Constant => "constant".into(),
                },
            });
        }
        library = m.library.clone();
        let pairs: Vec<(usize, Solution)> = m
            .kept
            .iter()
            .copied()
            .zip(m.corpus.iter().cloned())
            .collect();
        rewrite_check =
            check_rewrites(corpus, &pairs, tasks, lib, &library, cfg.search.eval_limits);
    }
    let reuse = previous.filter(|p| cfg.baseline && p.library_version == library.version());
    let (traces, regenerated) = match reuse {
        Some(p) => (p.clone(), false),
        None => {
            let mut tc = cfg.traces.clone();
            tc.seed = phase_seed(cfg.seed, iteration, 1);
            (generate_traces(&library, &tc), true)
        }
    };
    let train = TrainConfig {
        seed: phase_seed(cfg.seed, iteration, 2),
        ..cfg.training.clone()
    };
    let (scorer, training) = train_scorer(&traces, Some(&warm), &train);
    let trace_stats = TraceStats::of(&traces, regenerated);
    SleepOutcome {
        library,
        scorer,
        mined,
        abstractions,
        rewrite_check,
        traces,
        trace_stats,
        training,
    }
}
