//! Weight-ordered exhaustive enumeration.

use std::collections::BTreeMap;

use super::beam::candidate_lists;
use super::clock::{Clock, ClockKind};
use super::space::{SearchSpace, CONCRETE};
use super::store::ArgRef;
use super::task::Task;
use crate::dsl::DSLibrary;
use crate::lang::{EvalLimits, Term};

pub struct ExhaustiveResult<'a> {
    pub space: SearchSpace<'a>,
    pub solution: Option<Term>,
    pub candidates_evaluated: u64,
    /// False when the timeout cut enumeration short.
    pub completed: bool,
    pub elapsed: f64,
}

/// Outcome of [`enumerate_space`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub candidates: u64,
    pub completed: bool,
    /// Concrete entry that first matched the target, if any.
    pub solution: Option<u32>,
}

/// Calls `f` with every way of choosing one argument per position such that
/// the argument weights sum to `total`.
fn for_each_tuple(
    buckets: &[BTreeMap<u32, Vec<ArgRef>>],
    total: u32,
    f: &mut dyn FnMut(&[ArgRef]) -> bool,
) -> bool {
    fn go(
        buckets: &[BTreeMap<u32, Vec<ArgRef>>],
        i: usize,
        left: u32,
        min_rest: &[u32],
        acc: &mut Vec<ArgRef>,
        f: &mut dyn FnMut(&[ArgRef]) -> bool,
    ) -> bool {
        if i == buckets.len() {
            return left != 0 || f(acc);
        }
        for (&w, ids) in buckets[i].range(..=left) {
            if w + min_rest[i + 1] > left {
                break;
            }
            if i + 1 == buckets.len() && w != left {
                continue;
            }
            for a in ids {
                acc.push(*a);
                let go_on = go(buckets, i + 1, left - w, min_rest, acc, f);
                acc.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
    let mut min_rest = vec![0u32; buckets.len() + 1];
    for i in (0..buckets.len()).rev() {
        min_rest[i] = min_rest[i + 1] + buckets[i].keys().next().copied().unwrap_or(0);
    }
    go(buckets, 0, total, &min_rest, &mut Vec::new(), f)
}

/// Enumerates every value of weight up to `max_weight` in nondecreasing
/// weight, lambda contexts before the concrete one at each weight.
pub fn enumerate_space(
    space: &mut SearchSpace<'_>,
    max_weight: u32,
    clock: &mut Clock,
    timeout: f64,
    stop_on_solution: bool,
) -> Enumeration {
    let mut out = Enumeration {
        candidates: 0,
        completed: true,
        solution: (0..space.contexts[CONCRETE].store.len() as u32)
            .find(|id| space.is_solution(*id)),
    };
    if out.solution.is_some() && stop_on_solution {
        return out;
    }
    let ctx_order: Vec<usize> = (1..space.contexts.len()).chain([CONCRETE]).collect();
    for w in 1..=max_weight {
        for &c in &ctx_order {
            for op in 0..space.lib.ops().len() {
                let Some(lists) = candidate_lists(space, c, op) else {
                    continue;
                };
                let buckets: Vec<BTreeMap<u32, Vec<ArgRef>>> = lists
                    .iter()
                    .map(|l| {
                        let mut b: BTreeMap<u32, Vec<ArgRef>> = BTreeMap::new();
                        for a in l {
                            let aw = space.entry(*a).weight;
                            if aw < w {
                                b.entry(aw).or_default().push(*a);
                            }
                        }
                        b
                    })
                    .collect();
                if buckets.iter().any(BTreeMap::is_empty) {
                    continue;
                }
                let mut stop = false;
                for_each_tuple(&buckets, w - 1, &mut |args| {
                    if clock.elapsed() >= timeout {
                        out.completed = false;
                        stop = true;
                        return false;
                    }
                    let outcome = space.execute(c, op, args);
                    out.candidates += 1;
                    clock.tick();
                    if let Some(ins) = space.commit(c, op, args, outcome) {
                        if c == CONCRETE
                            && ins.changed()
                            && out.solution.is_none()
                            && space.is_solution(ins.id())
                        {
                            out.solution = Some(ins.id());
                            stop = stop_on_solution;
                        }
                    }
                    !stop
                });
                if stop {
                    return out;
                }
            }
        }
    }
    out
}

/// Enumerates all values of `task` up to `max_weight`, without stopping at
/// a solution.
pub fn exhaustive_search<'a>(
    task: &Task,
    lib: &'a DSLibrary,
    max_weight: u32,
    timeout: f64,
    clock: ClockKind,
    limits: EvalLimits,
) -> ExhaustiveResult<'a> {
    let mut space = SearchSpace::for_task(task, lib, limits);
    let mut clock = Clock::start(clock);
    let e = enumerate_space(&mut space, max_weight, &mut clock, timeout, false);
    let solution = e
        .solution
        .map(|id| space.contexts[CONCRETE].store.get(id).term.clone());
    ExhaustiveResult {
        space,
        solution,
        candidates_evaluated: e.candidates,
        completed: e.completed,
        elapsed: clock.elapsed(),
    }
}
