//! The wake-sleep loop and its on-disk layout.
//!
//! ```text
//! <out_dir>/
//!   config.txt               effective configuration
//!   iter_000/                pretraining (when enabled)
//!     next_scorer.txt  traces.tsv  training.json
//!   iter_001/
//!     library.txt  scorer.txt            language and scorer used by the wake
//!     corpus.txt                         latest solution of every solved task
//!     mined.txt                          mined-library report
//!     traces.tsv                         sleep traces
//!     next_library.txt  next_scorer.txt  sleep outputs
//!     report.json                        written last; marks the iteration done
//!   loop.json                per-iteration solve counts and the best iteration
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::sleep::{pretrain, run_sleep, AbstractionRecord, RewriteCheck, TraceStats};
use super::wake::{run_wake, TaskRecord};
use super::HarnessError;
use crate::dsl::{load_library, save_library, DSLibrary};
use crate::guidance::{LinearScorer, TraceDataset, TrainReport};
use crate::librarian::{parse_corpus, render_corpus, render_report, Solution};
use crate::synthesis::{SearchConfig, Task};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    /// Version of the language the wake phase searched with.
    pub library_version: u64,
    pub learned_operations: Vec<String>,
    pub tasks: usize,
    pub solved: usize,
    pub records: Vec<TaskRecord>,
    pub abstractions: Vec<AbstractionRecord>,
    pub rewrite_check: RewriteCheck,
    pub traces: TraceStats,
    pub training: TrainReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopSummary {
    pub solved_per_iteration: Vec<usize>,
    pub library_versions: Vec<u64>,
    /// Iteration with the most solved training tasks, earliest on ties.
    pub best_iteration: usize,
}

pub struct LoopOutcome {
    pub reports: Vec<IterationReport>,
    pub summary: LoopSummary,
    pub library: DSLibrary,
    pub scorer: LinearScorer,
    pub resumed_from: Option<usize>,
}

pub fn iteration_dir(out: &Path, iteration: usize) -> PathBuf {
    out.join(format!("iter_{iteration:03}"))
}

/// Writes through a temporary file so readers never see partial content.
pub(crate) fn write_atomic(path: &Path, text: &str) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn best_iteration(solved: &[usize]) -> usize {
    let mut best = 0;
    for (i, s) in solved.iter().enumerate() {
        if *s > solved[best] {
            best = i;
        }
    }
    best + 1
}

fn learned_ops(lib: &DSLibrary) -> Vec<String> {
    let mut names: Vec<String> = lib
        .ops()
        .iter()
        .filter(|o| o.is_learned())
        .map(|o| o.name.clone())
        .collect();
    names.extend(lib.constants().iter().filter_map(|c| c.name.clone()));
    names
}

struct State {
    library: DSLibrary,
    scorer: LinearScorer,
    corpus: BTreeMap<String, Solution>,
    traces: Option<TraceDataset>,
}

fn load_state(
    out: &Path,
    iteration: usize,
    tasks: &[Task],
    base: &DSLibrary,
) -> Result<State, HarnessError> {
    let dir = iteration_dir(out, iteration);
    let library = if iteration == 0 {
        base.clone()
    } else {
        load_library(&dir.join("next_library.txt"))?
    };
    let scorer = LinearScorer::load(&dir.join("next_scorer.txt"))?;
    let traces = Some(TraceDataset::load(&dir.join("traces.tsv"))?);
    let mut corpus = BTreeMap::new();
    if iteration > 0 {
        let text = fs::read_to_string(dir.join("corpus.txt"))?;
        for s in parse_corpus(&text, tasks, &library)? {
            corpus.insert(s.task.clone(), s);
        }
    }
    Ok(State {
        library,
        scorer,
        corpus,
        traces,
    })
}

fn completed(out: &Path, iteration: usize) -> bool {
    let dir = iteration_dir(out, iteration);
    if iteration == 0 {
        dir.join("next_scorer.txt").exists() && dir.join("training.json").exists()
    } else {
        dir.join("report.json").exists()
    }
}

/// Runs `cfg.iterations` wake-sleep iterations on `tasks`, persisting every
/// artifact under `cfg.out_dir` and resuming after the last completed one.
pub fn wake_sleep_loop(tasks: &[Task], cfg: &RunConfig) -> Result<LoopOutcome, HarnessError> {
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    fs::create_dir_all(&out)?;
    write_atomic(&out.join("config.txt"), &cfg.render())?;
    let base = cfg.dsl.load()?;

    let mut reports = Vec::new();
    let mut resumed_from = None;
    let mut state = None;
    for k in (0..=cfg.iterations).rev() {
        if completed(&out, k) {
            state = Some(load_state(&out, k, tasks, &base)?);
            for i in 1..=k {
                let text = fs::read_to_string(iteration_dir(&out, i).join("report.json"))?;
                reports.push(serde_json::from_str::<IterationReport>(&text)?);
            }
            resumed_from = Some(k);
            break;
        }
    }
    let mut state = match state {
        Some(s) => s,
        None => {
            let dir = iteration_dir(&out, 0);
            fs::create_dir_all(&dir)?;
            let (scorer, traces) = if cfg.pretrain {
                let (scorer, traces, report) = pretrain(&base, cfg);
                traces.save(&dir.join("traces.tsv"))?;
                write_atomic(&dir.join("next_scorer.txt"), &scorer.render())?;
                write_atomic(
                    &dir.join("training.json"),
                    &serde_json::to_string_pretty(&report)?,
                )?;
                (scorer, Some(traces))
            } else {
                (LinearScorer::new(), None)
            };
            State {
                library: base.clone(),
                scorer,
                corpus: BTreeMap::new(),
                traces,
            }
        }
    };

    let start = resumed_from.map_or(1, |k| k + 1);
    for iteration in start..=cfg.iterations {
        let dir = iteration_dir(&out, iteration);
        fs::create_dir_all(&dir)?;
        save_library(&state.library, &dir.join("library.txt"))?;
        write_atomic(&dir.join("scorer.txt"), &state.scorer.render())?;

        let search = SearchConfig {
            seed: super::sleep::phase_seed(cfg.seed, iteration, 0),
            ..cfg.search.clone()
        };
        let wake = run_wake(tasks, &state.library, &state.scorer, &search, cfg.workers);
        for s in wake.solutions(tasks) {
            state.corpus.insert(s.task.clone(), s);
        }
        let corpus: Vec<Solution> = state.corpus.values().cloned().collect();
        write_atomic(&dir.join("corpus.txt"), &render_corpus(&corpus))?;

        let sleep = run_sleep(
            &corpus,
            tasks,
            &state.library,
            &state.scorer,
            state.traces.as_ref(),
            cfg,
            iteration,
        );
        if let Some(m) = &sleep.mined {
            write_atomic(&dir.join("mined.txt"), &render_report(m))?;
        }
        sleep.traces.save(&dir.join("traces.tsv"))?;
        save_library(&sleep.library, &dir.join("next_library.txt"))?;
        write_atomic(&dir.join("next_scorer.txt"), &sleep.scorer.render())?;

        let report = IterationReport {
            iteration,
            library_version: state.library.version(),
            learned_operations: learned_ops(&state.library),
            tasks: tasks.len(),
            solved: wake.solved(),
            records: wake.records(&state.library),
            abstractions: sleep.abstractions.clone(),
            rewrite_check: sleep.rewrite_check.clone(),
            traces: sleep.trace_stats.clone(),
            training: sleep.training.clone(),
        };
        write_atomic(
            &dir.join("report.json"),
            &serde_json::to_string_pretty(&report)?,
        )?;
        reports.push(report);

        if let Some(m) = &sleep.mined {
            for (i, s) in m.kept.iter().zip(&m.corpus) {
                state.corpus.insert(corpus[*i].task.clone(), s.clone());
            }
        }
        state.library = sleep.library;
        state.scorer = sleep.scorer;
        state.traces = Some(sleep.traces);
    }

    let solved: Vec<usize> = reports.iter().map(|r| r.solved).collect();
    let summary = LoopSummary {
        best_iteration: best_iteration(&solved),
        solved_per_iteration: solved,
        library_versions: reports.iter().map(|r| r.library_version).collect(),
    };
    write_atomic(
        &out.join("loop.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(LoopOutcome {
        reports,
        summary,
        library: state.library,
        scorer: state.scorer,
        resumed_from,
    })
}

/// Re-verifies every solved program in a persisted report against `tasks`
/// using the language stored next to it. Returns the tasks that fail.
pub fn verify_report(
    dir: &Path,
    tasks: &[Task],
    limits: crate::lang::EvalLimits,
) -> Result<Vec<String>, HarnessError> {
    let report: IterationReport =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json"))?)?;
    let lib = load_library(&dir.join("library.txt"))?;
    let by_name: BTreeMap<&str, &Task> = tasks.iter().map(|t| (t.name.as_str(), t)).collect();
    let mut failed = Vec::new();
    for r in &report.records {
        let Some(text) = &r.program else { continue };
        let ok = by_name.get(r.task.as_str()).is_some_and(|t| {
            let names = t.input_names();
            let scope = crate::lang::WithInputs {
                inner: &lib,
                inputs: &names,
            };
            crate::lang::parse(text, &scope).is_ok_and(|p| t.is_solved_by(&p, &lib, limits))
        });
        if !ok {
            failed.push(r.task.clone());
        }
    }
    Ok(failed)
}
