//! Argument scoring: the scorer contract, a trainable linear scorer, trace
//! generation and warm starting.

pub mod features;
pub mod linear;
pub mod traces;
pub mod train;

use crate::dsl::Operation;
use crate::lang::Ty;
use crate::synthesis::store::ValueEntry;

pub use linear::{warm_start_new_op, LinearScorer, ScorerFileError, WarmStart};
pub use traces::{generate_traces, TraceDataset, TraceGenConfig, TraceStep};
pub use train::{train_scorer, TrainConfig, TrainReport};

/// What a scorer may condition on besides the candidate itself.
#[derive(Clone, Debug)]
pub struct ScoreContext<'a> {
    pub task_features: &'a [f64],
    /// Number of store entries per type.
    pub type_counts: &'a [(Ty, usize)],
    /// Number of store entries per weight.
    pub weight_histogram: &'a [usize],
    pub op: &'a str,
    pub position: usize,
}

/// Scores a candidate argument for position `prefix.len()` of `op`.
/// Higher is better; callers normalize with a softmax per position.
pub trait Scorer: Send + Sync {
    fn score(
        &self,
        op: &Operation,
        prefix: &[&ValueEntry],
        candidate: &ValueEntry,
        ctx: &ScoreContext<'_>,
    ) -> f64;

    /// False when scores ignore `prefix`, which lets callers score each
    /// position once.
    fn prefix_sensitive(&self) -> bool {
        true
    }

    /// True when a score depends only on the operation, the position and the
    /// candidate, so it never changes while the candidate is stored.
    fn is_static(&self) -> bool {
        false
    }

    /// Parameter vector of `op`, if the scorer has one.
    fn op_params(&self, _op: &str) -> Option<&[f64]> {
        None
    }
}

/// Gives every candidate the same score.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformScorer;

impl Scorer for UniformScorer {
    fn score(&self, _: &Operation, _: &[&ValueEntry], _: &ValueEntry, _: &ScoreContext<'_>) -> f64 {
        0.0
    }

    fn prefix_sensitive(&self) -> bool {
        false
    }

    fn is_static(&self) -> bool {
        true
    }
}
