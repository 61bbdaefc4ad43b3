//! Execution-guided bottom-up synthesis.

pub mod beam;
pub mod clock;
pub mod exhaustive;
pub mod frontier;
pub mod sampler;
pub mod search;
pub mod signature;
pub mod space;
pub mod store;
pub mod task;

pub use beam::{beam_select_args, UNBOUNDED};
pub use clock::{Clock, ClockKind};
pub use exhaustive::{enumerate_space, exhaustive_search, ExhaustiveResult};
pub use sampler::UniqueSampler;
pub use search::{run_search, search, SearchConfig, SearchConfigError, SolveResult};
pub use signature::{compute_signature, SigValue, Signature};
pub use space::{init_store, SearchSpace, CONCRETE};
pub use store::{ArgRef, Insert, ValueEntry, ValueStore};
pub use task::{load_tasks, parse_tasks, render_tasks, Example, Task, TaskError};
