//! Run configuration and its `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! iterations = 10
//! seed = 7
//! clock = virtual:50000      # or `wall`
//! search.timeout = 100
//! trace.episodes = 300
//! mine.max_arity = 3
//! ```
//!
//! Unknown keys and malformed values are errors. The `ABSYNTH_OUT_DIR`
//! environment variable overrides `out_dir`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dsl::{default_list_dsl, load_library, loop_dsl, DSLibrary};
use crate::guidance::{TraceGenConfig, TrainConfig};
use crate::librarian::MiningConfig;
use crate::synthesis::{ClockKind, SearchConfig};

pub const OUT_DIR_ENV: &str = "ABSYNTH_OUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {message}")]
    BadValue {
        key: String,
        value: String,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

/// Base language for a run.
#[derive(Clone, Debug, PartialEq)]
pub enum DslChoice {
    List,
    Loop,
    File(PathBuf),
}

impl DslChoice {
    pub fn load(&self) -> Result<DSLibrary, ConfigError> {
        match self {
            DslChoice::List => Ok(default_list_dsl()),
            DslChoice::Loop => Ok(loop_dsl()),
            DslChoice::File(p) => {
                load_library(p).map_err(|e| ConfigError::Invalid(format!("{}: {e}", p.display())))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub iterations: usize,
    pub search: SearchConfig,
    pub traces: TraceGenConfig,
    pub mining: MiningConfig,
    pub training: TrainConfig,
    pub trials: usize,
    pub folds: usize,
    /// Concurrent wake searches; 0 uses every core.
    pub workers: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub dsl: DslChoice,
    /// Disables abstraction mining; traces are then generated once.
    pub baseline: bool,
    /// Trains the scorer on base-language traces before the first wake.
    pub pretrain: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let clock = ClockKind::Virtual {
            candidates_per_second: 50_000.0,
        };
        RunConfig {
            iterations: 10,
            search: SearchConfig {
                clock,
                ..SearchConfig::default()
            },
            traces: TraceGenConfig {
                clock,
                ..TraceGenConfig::default()
            },
            mining: MiningConfig::default(),
            training: TrainConfig::default(),
            trials: 5,
            folds: 2,
            workers: 0,
            out_dir: PathBuf::from("runs"),
            seed: 0,
            dsl: DslChoice::List,
            baseline: false,
            pretrain: true,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        message: e.to_string(),
    })
}

fn parse_clock(key: &str, value: &str) -> Result<ClockKind, ConfigError> {
    if value == "wall" {
        return Ok(ClockKind::Wall);
    }
    match value.strip_prefix("virtual:") {
        Some(n) => Ok(ClockKind::Virtual {
            candidates_per_second: parse_num(key, n)?,
        }),
        None => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            message: "expected `wall` or `virtual:<candidates per second>`".into(),
        }),
    }
}

fn render_clock(c: ClockKind) -> String {
    match c {
        ClockKind::Wall => "wall".into(),
        ClockKind::Virtual {
            candidates_per_second,
        } => format!("virtual:{candidates_per_second}"),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let k = key;
        let v = value;
        match k {
            "iterations" => self.iterations = parse_num(k, v)?,
            "trials" => self.trials = parse_num(k, v)?,
            "folds" => self.folds = parse_num(k, v)?,
            "workers" => self.workers = parse_num(k, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "seed" => self.seed = parse_num(k, v)?,
            "baseline" => self.baseline = parse_num(k, v)?,
            "pretrain" => self.pretrain = parse_num(k, v)?,
            "dsl" => {
                self.dsl = match v {
                    "list" => DslChoice::List,
                    "loop" => DslChoice::Loop,
                    path => DslChoice::File(PathBuf::from(path)),
                }
            }
            "clock" => {
                let c = parse_clock(k, v)?;
                self.search.clock = c;
                self.traces.clock = c;
            }
            "search.timeout" => self.search.timeout = parse_num(k, v)?,
            "search.restart_interval" => {
                self.search.restart_interval = match v {
                    "none" => None,
                    _ => Some(parse_num(k, v)?),
                }
            }
            "search.beam_size" => self.search.beam_size = parse_num(k, v)?,
            "search.max_weight" => self.search.max_weight = parse_num(k, v)?,
            "search.unique_sampling" => self.search.unique_sampling = parse_num(k, v)?,
            "search.sample_budget" => self.search.sample_budget = parse_num(k, v)?,
            "search.weight_share" => self.search.weight_share = parse_num(k, v)?,
            "eval.max_steps" => {
                self.search.eval_limits.max_steps = parse_num(k, v)?;
                self.traces.eval_limits.max_steps = self.search.eval_limits.max_steps;
            }
            "trace.episodes" => self.traces.episodes = parse_num(k, v)?,
            "trace.episode_timeout" => self.traces.episode_timeout = parse_num(k, v)?,
            "trace.abstraction_bonus" => self.traces.abstraction_bonus = parse_num(k, v)?,
            "trace.max_weight" => self.traces.max_weight = parse_num(k, v)?,
            "trace.parallel_searches" => self.traces.parallel_searches = parse_num(k, v)?,
            "trace.examples_per_task" => self.traces.examples_per_task = parse_num(k, v)?,
            "trace.targets_per_episode" => self.traces.targets_per_episode = parse_num(k, v)?,
            "trace.negatives" => self.traces.negatives = parse_num(k, v)?,
            "mine.max_arity" => self.mining.max_arity = parse_num(k, v)?,
            "mine.max_rounds" => self.mining.max_rounds = parse_num(k, v)?,
            "mine.max_expansions" => self.mining.max_expansions = parse_num(k, v)?,
            "mine.max_frontier" => self.mining.max_frontier = parse_num(k, v)?,
            "mine.pruning" => self.mining.pruning = parse_num(k, v)?,
            "train.max_steps" => self.training.max_steps = parse_num(k, v)?,
            "train.learning_rate" => self.training.learning_rate = parse_num(k, v)?,
            "train.l2" => self.training.l2 = parse_num(k, v)?,
            "train.min_op_steps" => self.training.min_op_steps = parse_num(k, v)?,
            _ => return Err(ConfigError::UnknownKey(k.to_string())),
        }
        Ok(())
    }

    /// Applies every setting in a config file's text.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Applies a config file. A relative `dsl` path is taken relative to
    /// the file's directory.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let before = self.dsl.clone();
        self.apply_text(&std::fs::read_to_string(path)?)?;
        if let DslChoice::File(p) = &self.dsl {
            if self.dsl != before && p.is_relative() {
                let base = path.parent().unwrap_or(Path::new(""));
                self.dsl = DslChoice::File(base.join(p));
            }
        }
        Ok(())
    }

    /// Applies the output-directory environment override, if set.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
            if !dir.is_empty() {
                self.out_dir = PathBuf::from(dir);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.iterations < 1 {
            return bad("iterations must be at least 1");
        }
        if self.trials < 1 {
            return bad("trials must be at least 1");
        }
        if !(1..=2).contains(&self.folds) {
            return bad("folds must be 1 or 2");
        }
        if self.mining.min_distinct_tasks < 2 || self.mining.min_non_variable < 2 {
            return bad("mining filters must require at least 2 tasks and 2 expressions");
        }
        if self.traces.episode_timeout <= 0.0 || self.traces.max_weight == 0 {
            return bad("trace episodes need a positive timeout and weight");
        }
        self.search
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The configuration in the file format, one key per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("iterations", self.iterations.to_string());
        kv("trials", self.trials.to_string());
        kv("folds", self.folds.to_string());
        kv("workers", self.workers.to_string());
        kv("out_dir", self.out_dir.display().to_string());
        kv("seed", self.seed.to_string());
        kv("baseline", self.baseline.to_string());
        kv("pretrain", self.pretrain.to_string());
        kv(
            "dsl",
            match &self.dsl {
                DslChoice::List => "list".into(),
                DslChoice::Loop => "loop".into(),
                DslChoice::File(p) => p.display().to_string(),
            },
        );
        kv("clock", render_clock(self.search.clock));
        kv("search.timeout", self.search.timeout.to_string());
        kv(
            "search.restart_interval",
            self.search
                .restart_interval
                .map_or("none".into(), |r| r.to_string()),
        );
        kv("search.beam_size", self.search.beam_size.to_string());
        kv("search.max_weight", self.search.max_weight.to_string());
        kv(
            "search.unique_sampling",
            self.search.unique_sampling.to_string(),
        );
        kv(
            "search.sample_budget",
            self.search.sample_budget.to_string(),
        );
        kv("search.weight_share", self.search.weight_share.to_string());
        kv(
            "eval.max_steps",
            self.search.eval_limits.max_steps.to_string(),
        );
        kv("trace.episodes", self.traces.episodes.to_string());
        kv(
            "trace.episode_timeout",
            self.traces.episode_timeout.to_string(),
        );
        kv(
            "trace.abstraction_bonus",
            self.traces.abstraction_bonus.to_string(),
        );
        kv("trace.max_weight", self.traces.max_weight.to_string());
        kv(
            "trace.parallel_searches",
            self.traces.parallel_searches.to_string(),
        );
        kv(
            "trace.examples_per_task",
            self.traces.examples_per_task.to_string(),
        );
        kv(
            "trace.targets_per_episode",
            self.traces.targets_per_episode.to_string(),
        );
        kv("trace.negatives", self.traces.negatives.to_string());
        kv("mine.max_arity", self.mining.max_arity.to_string());
        kv("mine.max_rounds", self.mining.max_rounds.to_string());
        kv(
            "mine.max_expansions",
            self.mining.max_expansions.to_string(),
        );
        kv("mine.max_frontier", self.mining.max_frontier.to_string());
        kv("mine.pruning", self.mining.pruning.to_string());
        kv("train.max_steps", self.training.max_steps.to_string());
        kv(
            "train.learning_rate",
            self.training.learning_rate.to_string(),
        );
        kv("train.l2", self.training.l2.to_string());
        kv("train.min_op_steps", self.training.min_op_steps.to_string());
        out
    }
}
