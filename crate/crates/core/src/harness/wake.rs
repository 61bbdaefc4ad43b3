//! Wake phase: solve every task with the current language and scorer.

use serde::{Deserialize, Serialize};

use crate::dsl::DSLibrary;
use crate::guidance::Scorer;
use crate::lang::print;
use crate::librarian::Solution;
use crate::synthesis::{search, SearchConfig, SolveResult, Task};

/// Seed for one task's search, stable under task reordering.
pub fn task_seed(seed: u64, task: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in task.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Per-task search record as it appears in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task: String,
    pub solved: bool,
    pub program: Option<String>,
    pub size: Option<usize>,
    pub elapsed: f64,
    pub candidates: u64,
    pub restarts: u32,
    pub uses_abstraction: bool,
}

pub struct WakeOutcome {
    /// One result per task, in task order.
    pub results: Vec<(String, SolveResult)>,
}

impl WakeOutcome {
    pub fn solved(&self) -> usize {
        self.results.iter().filter(|(_, r)| r.solved).count()
    }

    pub fn solutions(&self, tasks: &[Task]) -> Vec<Solution> {
        tasks
            .iter()
            .zip(&self.results)
            .filter_map(|(t, (_, r))| r.program.clone().map(|p| Solution::for_task(t, p)))
            .collect()
    }

    pub fn records(&self, lib: &DSLibrary) -> Vec<TaskRecord> {
        self.results
            .iter()
            .map(|(name, r)| TaskRecord {
                task: name.clone(),
                solved: r.solved,
                program: r.program.as_ref().map(print),
                size: r.program.as_ref().map(|p| p.size()),
                elapsed: r.elapsed,
                candidates: r.candidates_evaluated,
                restarts: r.restarts,
                uses_abstraction: r.program.as_ref().is_some_and(|p| lib.uses_learned(p)),
            })
            .collect()
    }
}

/// Searches every task, up to `workers` at a time. Solutions that fail to
/// re-verify against their examples are discarded.
pub fn run_wake(
    tasks: &[Task],
    lib: &DSLibrary,
    scorer: &dyn Scorer,
    cfg: &SearchConfig,
    workers: usize,
) -> WakeOutcome {
    let results = crate::par::map_indexed(tasks.len(), workers, |i| {
        let task = &tasks[i];
        let mut c = cfg.clone();
        c.seed = task_seed(cfg.seed, &task.name);
        let mut r = search(task, lib, scorer, &c);
        if let Some(p) = &r.program {
            if !task.is_solved_by(p, lib, c.eval_limits) {
                r.solved = false;
                r.program = None;
            }
        }
        (task.name.clone(), r)
    });
    WakeOutcome { results }
}
