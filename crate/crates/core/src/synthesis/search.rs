//! Scorer-guided bottom-up search with unique sampling and restarts.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::beam::{beam_select_args, candidate_lists, position_log_probs, UNBOUNDED};
use super::clock::{Clock, ClockKind};
use super::frontier::TupleFrontier;
use super::sampler::UniqueSampler;
use super::space::{SearchSpace, CONCRETE};
use super::store::ArgRef;
use super::task::Task;
use crate::dsl::DSLibrary;
use crate::guidance::features::task_features;
use crate::guidance::{ScoreContext, Scorer, UniformScorer};
use crate::lang::{EvalLimits, Term, Ty};

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Seconds; `f64::INFINITY` disables the timeout.
    pub timeout: f64,
    /// Seconds between restarts; `None` disables restarts.
    pub restart_interval: Option<f64>,
    /// Tuples per operation per round; [`UNBOUNDED`] keeps all of them.
    pub beam_size: usize,
    pub max_weight: u32,
    pub eval_limits: EvalLimits,
    pub seed: u64,
    pub clock: ClockKind,
    /// Switch to unique sampling for a round when a beam round adds nothing.
    pub unique_sampling: bool,
    /// Draws per operation in a sampling round.
    pub sample_budget: usize,
    /// Return at the first solution instead of running to exhaustion.
    pub stop_on_solution: bool,
    /// Fraction of each round's tuples taken in weight order rather than
    /// score order. Applies to static scorers with a bounded beam.
    pub weight_share: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            timeout: 100.0,
            restart_interval: Some(10.0),
            beam_size: 10,
            max_weight: 15,
            eval_limits: EvalLimits::default(),
            seed: 0,
            clock: ClockKind::Wall,
            unique_sampling: true,
            sample_budget: 10,
            stop_on_solution: true,
            weight_share: 0.5,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SearchConfigError {
    #[error("restart interval {restart} exceeds the timeout {timeout}")]
    RestartAfterTimeout { restart: f64, timeout: f64 },
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{0} must lie in [0, 1]")]
    OutOfRange(&'static str),
}

impl SearchConfig {
    /// Exhaustive settings: uniform-equivalent beam, no restarts, no timeout.
    pub fn unbounded(max_weight: u32) -> Self {
        SearchConfig {
            timeout: f64::INFINITY,
            restart_interval: None,
            beam_size: UNBOUNDED,
            max_weight,
            unique_sampling: false,
            stop_on_solution: false,
            ..SearchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SearchConfigError> {
        if self.timeout.is_nan() || self.timeout <= 0.0 {
            return Err(SearchConfigError::NotPositive("timeout"));
        }
        if let Some(r) = self.restart_interval {
            if r.is_nan() || r <= 0.0 {
                return Err(SearchConfigError::NotPositive("restart interval"));
            }
            if r > self.timeout {
                return Err(SearchConfigError::RestartAfterTimeout {
                    restart: r,
                    timeout: self.timeout,
                });
            }
        }
        if self.max_weight == 0 {
            return Err(SearchConfigError::NotPositive("max weight"));
        }
        if self.beam_size == 0 {
            return Err(SearchConfigError::NotPositive("beam size"));
        }
        if !(0.0..=1.0).contains(&self.weight_share) {
            return Err(SearchConfigError::OutOfRange("weight share"));
        }
        if let ClockKind::Virtual {
            candidates_per_second,
        } = self.clock
        {
            if candidates_per_second.is_nan() || candidates_per_second <= 0.0 {
                return Err(SearchConfigError::NotPositive("candidates per second"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub solved: bool,
    pub program: Option<Term>,
    pub elapsed: f64,
    /// Executed argument tuples, counted across restarts.
    pub candidates_evaluated: u64,
    pub restarts: u32,
    /// True when every tuple within the weight bound was executed.
    pub exhausted: bool,
}

const MAX_PARAMS: usize = 6;

/// Tuples a frontier may examine per selected tuple in one round.
const POPS_PER_TUPLE: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct TupleKey {
    ctx: u16,
    op: u16,
    ids: [u32; MAX_PARAMS],
}

fn key(c: usize, op: usize, args: &[ArgRef]) -> TupleKey {
    let mut ids = [u32::MAX; MAX_PARAMS];
    for (slot, a) in ids.iter_mut().zip(args) {
        *slot = a.id;
    }
    TupleKey {
        ctx: c as u16,
        op: op as u16,
        ids,
    }
}

/// Tuples already executed, with the tuple weight at execution time. A tuple
/// is run again only if its arguments have since become lighter.
#[derive(Default)]
struct Tried(HashMap<TupleKey, u32>);

impl Tried {
    fn covers(&self, c: usize, op: usize, args: &[ArgRef], weight: u32) -> bool {
        self.0.get(&key(c, op, args)).is_some_and(|w| *w <= weight)
    }

    fn record(&mut self, c: usize, op: usize, args: &[ArgRef], weight: u32) {
        self.0.insert(key(c, op, args), weight);
    }
}

enum Stop {
    Solved(Term),
    Timeout,
    Restart,
    Exhausted,
}

struct Run<'r, 'a> {
    cfg: &'r SearchConfig,
    scorer: &'r dyn Scorer,
    clock: &'r mut Clock,
    candidates: &'r mut u64,
    restarts: u32,
    space: SearchSpace<'a>,
    solution: Option<Term>,
}

impl Run<'_, '_> {
    fn time_check(&self) -> Option<Stop> {
        let t = self.clock.elapsed();
        if t >= self.cfg.timeout {
            return Some(Stop::Timeout);
        }
        match self.cfg.restart_interval {
            Some(r) if t >= r * (self.restarts + 1) as f64 => Some(Stop::Restart),
            _ => None,
        }
    }

    fn run(&mut self) -> Stop {
        if let Some(id) = (0..self.space.contexts[CONCRETE].store.len() as u32)
            .find(|id| self.space.is_solution(*id))
        {
            let t = self.space.contexts[CONCRETE].store.get(id).term.clone();
            if self.cfg.stop_on_solution {
                return Stop::Solved(t);
            }
            self.solution = Some(t);
        }
        let n_ops = self.space.lib.ops().len();
        assert!(
            self.space
                .lib
                .ops()
                .iter()
                .all(|o| o.params.len() <= MAX_PARAMS),
            "operations take at most {MAX_PARAMS} parameters"
        );
        let ctx_order: Vec<usize> = (1..self.space.contexts.len()).chain([CONCRETE]).collect();
        let task_feats = task_features(&self.space);
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_add(self.restarts as u64));
        let mut tried = Tried::default();
        let mut samplers: HashMap<(usize, usize), (UniqueSampler, Vec<Vec<ArgRef>>)> =
            HashMap::new();
        let mut sampling = false;
        let incremental = self.scorer.is_static() && self.cfg.beam_size != UNBOUNDED;
        let mut frontiers: HashMap<(usize, usize, bool), TupleFrontier> = HashMap::new();
        let by_weight = ((self.cfg.beam_size as f64) * self.cfg.weight_share).round() as usize;
        let shares = [(false, self.cfg.beam_size - by_weight), (true, by_weight)];
        loop {
            let mut changed = false;
            let mut all_exhausted = true;
            for op in 0..n_ops {
                for &c in &ctx_order {
                    if let Some(stop) = self.time_check() {
                        return stop;
                    }
                    let type_counts: Vec<(Ty, usize)> = self.space.contexts[c]
                        .store
                        .type_counts()
                        .map(|(t, n)| (t.clone(), n))
                        .collect();
                    let sctx = ScoreContext {
                        task_features: &task_feats,
                        type_counts: &type_counts,
                        weight_histogram: self.space.contexts[c].store.weight_histogram(),
                        op: &self.space.lib.ops()[op].name,
                        position: 0,
                    };
                    let tuples: Vec<Vec<ArgRef>> = if !sampling && incremental {
                        let space = &self.space;
                        let mut out: Vec<Vec<ArgRef>> = Vec::new();
                        for (weighted, n) in shares {
                            if n == 0 {
                                continue;
                            }
                            let scorer: &dyn Scorer = if weighted {
                                &UniformScorer
                            } else {
                                self.scorer
                            };
                            let batch = frontiers
                                .entry((op, c, weighted))
                                .or_insert_with(|| TupleFrontier::new(space, c, op))
                                .next_batch(
                                    space,
                                    scorer,
                                    &sctx,
                                    n,
                                    self.cfg.max_weight,
                                    n.saturating_mul(POPS_PER_TUPLE),
                                    &mut |args, w| {
                                        tried.covers(c, op, args, w)
                                            || out.iter().any(|o| o == args)
                                    },
                                );
                            out.extend(batch);
                        }
                        out
                    } else if !sampling {
                        beam_select_args(
                            &self.space,
                            c,
                            op,
                            self.scorer,
                            &sctx,
                            self.cfg.beam_size,
                            self.cfg.max_weight,
                            &mut |args, w| tried.covers(c, op, args, w),
                        )
                    } else {
                        let entry = match samplers.entry((op, c)) {
                            std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                            std::collections::hash_map::Entry::Vacant(v) => {
                                let Some(lists) = candidate_lists(&self.space, c, op) else {
                                    continue;
                                };
                                let probs: Vec<Vec<f64>> =
                                    position_log_probs(&self.space, op, &lists, self.scorer, &sctx)
                                        .into_iter()
                                        .map(|row| row.into_iter().map(f64::exp).collect())
                                        .collect();
                                v.insert((UniqueSampler::new(&probs), lists))
                            }
                        };
                        let (sampler, lists) = entry;
                        let draws = sampler.sample_many(self.cfg.sample_budget, &mut rng);
                        if !sampler.is_exhausted() {
                            all_exhausted = false;
                        }
                        draws
                            .into_iter()
                            .map(|d| d.iter().enumerate().map(|(i, k)| lists[i][*k]).collect())
                            .collect()
                    };
                    for args in tuples {
                        let w = self.space.tuple_weight(&args);
                        if w > self.cfg.max_weight || tried.covers(c, op, &args, w) {
                            continue;
                        }
                        if let Some(stop) = self.time_check() {
                            return stop;
                        }
                        let outcome = self.space.execute(c, op, &args);
                        *self.candidates += 1;
                        self.clock.tick();
                        tried.record(c, op, &args, w);
                        let Some(ins) = self.space.commit(c, op, &args, outcome) else {
                            continue;
                        };
                        if !ins.changed() {
                            continue;
                        }
                        changed = true;
                        if c == CONCRETE && self.space.is_solution(ins.id()) {
                            let t = self.space.contexts[CONCRETE]
                                .store
                                .get(ins.id())
                                .term
                                .clone();
                            if self.cfg.stop_on_solution {
                                return Stop::Solved(t);
                            }
                            if self.solution.is_none() {
                                self.solution = Some(t);
                            }
                        }
                    }
                }
            }
            if !sampling {
                if !changed {
                    if self.cfg.beam_size == UNBOUNDED || !self.cfg.unique_sampling {
                        return Stop::Exhausted;
                    }
                    sampling = true;
                    samplers.clear();
                }
            } else if changed {
                sampling = false;
                samplers.clear();
            } else if all_exhausted {
                return Stop::Exhausted;
            }
        }
    }
}

/// Searches for a program solving `task`.
pub fn search(
    task: &Task,
    lib: &DSLibrary,
    scorer: &dyn Scorer,
    cfg: &SearchConfig,
) -> SolveResult {
    run_search(task, lib, scorer, cfg).0
}

/// Like [`search`], also returning the final search state.
pub fn run_search<'a>(
    task: &Task,
    lib: &'a DSLibrary,
    scorer: &dyn Scorer,
    cfg: &SearchConfig,
) -> (SolveResult, SearchSpace<'a>) {
    let mut clock = Clock::start(cfg.clock);
    let mut candidates = 0u64;
    let mut restarts = 0u32;
    loop {
        let mut run = Run {
            cfg,
            scorer,
            clock: &mut clock,
            candidates: &mut candidates,
            restarts,
            space: SearchSpace::for_task(task, lib, cfg.eval_limits),
            solution: None,
        };
        let stop = run.run();
        let Run {
            space, solution, ..
        } = run;
        let (program, exhausted) = match stop {
            Stop::Restart => {
                restarts += 1;
                continue;
            }
            Stop::Solved(t) => (Some(t), false),
            Stop::Timeout => (solution, false),
            Stop::Exhausted => (solution, true),
        };
        let result = SolveResult {
            solved: program.is_some(),
            program,
            elapsed: clock.elapsed(),
            candidates_evaluated: candidates,
            restarts,
            exhausted,
        };
        return (result, space);
    }
}
