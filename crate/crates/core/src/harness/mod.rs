//! Wake-sleep driver, evaluation, statistics, persistence and plot data.

pub mod config;
pub mod driver;
pub mod eval;
pub mod plots;
pub mod sleep;
pub mod stats;
pub mod wake;

use thiserror::Error;

use crate::dsl::LibraryFileError;
use crate::guidance::linear::ScorerFileError;
use crate::guidance::traces::TraceFileError;
use crate::librarian::CorpusError;
use crate::synthesis::TaskError;

pub use config::{ConfigError, DslChoice, RunConfig, OUT_DIR_ENV};
pub use driver::{wake_sleep_loop, IterationReport, LoopOutcome, LoopSummary};
pub use eval::{evaluate_tasks, make_folds, ExperimentSummary};
pub use plots::emit_plot_data;
pub use stats::{ci95, mean, t_test, StatsError, TTest};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("tasks: {0}")]
    Tasks(#[from] TaskError),
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("library file: {0}")]
    Library(#[from] LibraryFileError),
    #[error("scorer file: {0}")]
    Scorer(#[from] ScorerFileError),
    #[error("trace file: {0}")]
    Traces(#[from] TraceFileError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("statistics: {0}")]
    Stats(#[from] StatsError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl HarnessError {
    /// Process exit status: 2 for configuration problems, 3 for malformed
    /// task or corpus input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Usage(_) => 2,
            HarnessError::Tasks(_) | HarnessError::Corpus(_) => 3,
            _ => 1,
        }
    }
}
