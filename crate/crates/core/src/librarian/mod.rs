//! Library learning: mining reusable abstractions from solved programs.
//!
//! Corpus file format, one solution per line:
//!
//! ```text
//! # comment
//! task_name<TAB>(s-expression over the task's inputs)
//! ```

mod miner;
mod pattern;
mod rewrite;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::dsl::DSLibrary;
use crate::lang::{parse, print, Term, Ty, WithInputs};
use crate::synthesis::Task;
pub use miner::{Finalized, SearchStats};
pub use pattern::{count_matches, HoleTerm, Match};
pub use rewrite::{application, corpus_size, rewrite_with, Applied, Rewritten};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtilityScore {
    /// Occurrences replaced by the rewrite, nested ones included.
    pub matches: usize,
    /// Body size with each hole occurrence counted as one leaf.
    pub body_size: usize,
    pub arity: usize,
    /// Exact reduction in total corpus size.
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Abstraction {
    pub name: String,
    pub arity: usize,
    pub body: Term,
    pub signature: Ty,
    pub found_in_tasks: BTreeSet<String>,
    pub utility: UtilityScore,
}

impl Abstraction {
    pub fn pattern(&self) -> HoleTerm {
        HoleTerm::from_body(&self.body, self.arity)
    }
}

/// One solution program with the input types it was written against.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub task: String,
    pub inputs: Vec<(String, Ty)>,
    pub program: Term,
}

impl Solution {
    pub fn for_task(task: &Task, program: Term) -> Solution {
        Solution {
            task: task.name.clone(),
            inputs: task.inputs.clone(),
            program,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiningConfig {
    pub max_arity: usize,
    pub max_rounds: usize,
    pub min_distinct_tasks: usize,
    pub min_non_variable: usize,
    /// Largest number of open partial patterns kept; the lowest bounds are
    /// dropped beyond it.
    pub max_frontier: usize,
    /// Cap on partial patterns expanded per round.
    pub max_expansions: usize,
    /// Branch-and-bound pruning; disabling it changes speed, not results.
    pub pruning: bool,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            max_arity: 3,
            max_rounds: 5,
            min_distinct_tasks: 2,
            min_non_variable: 2,
            max_frontier: 200_000,
            max_expansions: 200_000,
            pruning: true,
        }
    }
}

/// Why a candidate pattern was not accepted.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Rejection {
    #[error("trivial: only {non_variable} non-variable expressions")]
    Trivial { non_variable: usize },
    #[error("occurs in {tasks} distinct tasks")]
    TooFewTasks { tasks: usize },
    #[error("no compression")]
    NoCompression,
    #[error("inconsistent binding types for {}", param_name(*.param))]
    InconsistentTypes { param: Option<usize> },
    #[error("ill-typed: {0}")]
    IllTyped(String),
}

fn param_name(p: Option<usize>) -> String {
    p.map_or("the result".into(), |j| format!("parameter {j}"))
}

impl Rejection {
    pub fn kind(&self) -> &'static str {
        match self {
            Rejection::Trivial { .. } => "trivial",
            Rejection::TooFewTasks { .. } => "single-task",
            Rejection::NoCompression => "no-compression",
            Rejection::InconsistentTypes { .. } => "inconsistent-types",
            Rejection::IllTyped(_) => "ill-typed",
        }
    }
}

/// Utility of `h` on `corpus`, computed by rewriting.
pub fn utility(h: &HoleTerm, corpus: &[Solution]) -> UtilityScore {
    let r = rewrite_with(corpus, h, "fn_probe");
    UtilityScore {
        matches: r.applied.len(),
        body_size: h.body_size(),
        arity: h.arity(),
        value: (corpus_size(corpus) as i64 - corpus_size(&r.corpus) as i64).max(0),
    }
}

/// Rewrites `corpus` with an installed abstraction.
pub fn rewrite(corpus: &[Solution], a: &Abstraction) -> Vec<Solution> {
    rewrite_with(corpus, &a.pattern(), &a.name).corpus
}

/// Checks `h` against the filters and, if accepted, installs it.
pub fn finalize(
    h: &HoleTerm,
    corpus: &[Solution],
    lib: &DSLibrary,
    cfg: &MiningConfig,
    iteration: usize,
) -> Result<Finalized, Rejection> {
    let round = miner::Round::new(corpus, lib, cfg, iteration)
        .map_err(|i| Rejection::IllTyped(format!("corpus program {i} does not typecheck")))?;
    round.finalize(h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    pub round: usize,
    pub stats: SearchStats,
    pub accepted: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Mined {
    pub round: usize,
    pub abstraction: Abstraction,
}

#[derive(Clone, Debug)]
pub struct MineOutcome {
    /// Accepted abstractions in discovery order.
    pub mined: Vec<Mined>,
    pub rounds: Vec<RoundReport>,
    pub library: DSLibrary,
    /// The corpus rewritten with every accepted abstraction.
    pub corpus: Vec<Solution>,
    /// Indices of the input programs that typechecked; `corpus[i]` is the
    /// rewrite of input `kept[i]`.
    pub kept: Vec<usize>,
}

impl MineOutcome {
    pub fn abstractions(&self) -> impl Iterator<Item = &Abstraction> {
        self.mined.iter().map(|m| &m.abstraction)
    }
}

/// Mines up to `cfg.max_rounds` abstractions, one per round, rewriting the
/// corpus after each. `iteration` is recorded on the new operations.
pub fn mine(
    corpus: &[Solution],
    lib: &DSLibrary,
    cfg: &MiningConfig,
    iteration: usize,
) -> MineOutcome {
    let mut kept = Vec::new();
    let mut current: Vec<Solution> = Vec::new();
    for (i, s) in corpus.iter().enumerate() {
        let inputs = s.inputs.iter().cloned().collect();
        if crate::lang::infer_type(&s.program, &inputs, lib).is_ok() {
            current.push(s.clone());
            kept.push(i);
        }
    }
    let mut library = lib.clone();
    let mut mined = Vec::new();
    let mut rounds = Vec::new();
    for round in 0..cfg.max_rounds {
        let Ok(r) = miner::Round::new(&current, &library, cfg, iteration) else {
            break;
        };
        let (best, stats) = r.search();
        let Some(f) = best else {
            rounds.push(RoundReport {
                round,
                stats,
                accepted: None,
            });
            break;
        };
        rounds.push(RoundReport {
            round,
            stats,
            accepted: Some(f.abstraction.name.clone()),
        });
        mined.push(Mined {
            round,
            abstraction: f.abstraction,
        });
        library = f.library;
        current = f.corpus;
    }
    MineOutcome {
        mined,
        rounds,
        library,
        corpus: current,
        kept,
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses a corpus file; each task's input names and types come from `tasks`.
pub fn parse_corpus(
    text: &str,
    tasks: &[Task],
    lib: &DSLibrary,
) -> Result<Vec<Solution>, CorpusError> {
    let by_name: BTreeMap<&str, &Task> = tasks.iter().map(|t| (t.name.as_str(), t)).collect();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| CorpusError::Format {
            line: i + 1,
            message,
        };
        let (name, program) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected `task<TAB>program`".into()))?;
        let task = by_name
            .get(name.trim())
            .ok_or_else(|| bad(format!("unknown task `{}`", name.trim())))?;
        let names = task.input_names();
        let scope = WithInputs {
            inner: lib,
            inputs: &names,
        };
        let program = parse(program.trim(), &scope).map_err(|e| bad(e.to_string()))?;
        out.push(Solution::for_task(task, program));
    }
    Ok(out)
}

pub fn render_corpus(corpus: &[Solution]) -> String {
    let mut out = String::new();
    for s in corpus {
        let _ = writeln!(out, "{}\t{}", s.task, print(&s.program));
    }
    out
}

/// Mined-library report: one tab-separated line per abstraction.
pub fn render_report(outcome: &MineOutcome) -> String {
    let mut out =
        String::from("# round\tname\tarity\tmatches\tbody_size\tvalue\ttasks\tsignature\tbody\n");
    for m in &outcome.mined {
        let a = &m.abstraction;
        let tasks: Vec<&str> = a.found_in_tasks.iter().map(String::as_str).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            m.round,
            a.name,
            a.arity,
            a.utility.matches,
            a.utility.body_size,
            a.utility.value,
            tasks.join(","),
            a.signature,
            print(&a.body)
        );
    }
    for r in &outcome.rounds {
        let rej: Vec<String> = r
            .stats
            .rejections
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let _ = writeln!(
            out,
            "# round {} expanded={} evaluated={} pruned={} completed={} accepted={} rejected[{}]",
            r.round,
            r.stats.expanded,
            r.stats.evaluated,
            r.stats.pruned,
            r.stats.completed,
            r.accepted.as_deref().unwrap_or("-"),
            rej.join(" ")
        );
    }
    out
}
