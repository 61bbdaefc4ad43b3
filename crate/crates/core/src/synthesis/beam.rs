//! Beam search over argument positions.

use std::cmp::Ordering;

use super::space::SearchSpace;
use super::store::{ArgRef, ValueEntry};
use crate::guidance::{ScoreContext, Scorer};

/// Beam size meaning "keep everything".
pub const UNBOUNDED: usize = usize::MAX;

/// Log-softmax of raw scores.
pub fn log_softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let uniform = -(scores.len() as f64).ln();
        return vec![uniform; scores.len()];
    }
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    scores.iter().map(|s| s - lse).collect()
}

/// Candidate entries for each parameter of `op` in context `c`, or `None`
/// when some position has no type-compatible entry.
pub fn candidate_lists(space: &SearchSpace<'_>, c: usize, op: usize) -> Option<Vec<Vec<ArgRef>>> {
    let lists: Vec<Vec<ArgRef>> = space.lib.ops()[op]
        .params
        .iter()
        .map(|p| space.candidates(c, p))
        .collect();
    lists.iter().all(|l| !l.is_empty()).then_some(lists)
}

/// Log-probabilities of every candidate per position, scored with an empty prefix.
pub fn position_log_probs(
    space: &SearchSpace<'_>,
    op: usize,
    lists: &[Vec<ArgRef>],
    scorer: &dyn Scorer,
    ctx: &ScoreContext<'_>,
) -> Vec<Vec<f64>> {
    let operation = &space.lib.ops()[op];
    lists
        .iter()
        .enumerate()
        .map(|(i, list)| {
            let pctx = ScoreContext {
                position: i,
                ..ctx.clone()
            };
            let scores: Vec<f64> = list
                .iter()
                .map(|a| scorer.score(operation, &[], space.entry(*a), &pctx))
                .collect();
            log_softmax(&scores)
        })
        .collect()
}

#[derive(Clone, Debug)]
struct Partial {
    args: Vec<ArgRef>,
    logp: f64,
    weight: u32,
}

fn order(a: &Partial, b: &Partial) -> Ordering {
    b.logp
        .total_cmp(&a.logp)
        .then(a.weight.cmp(&b.weight))
        .then_with(|| a.args.cmp(&b.args))
}

/// Up to `beam_size` argument tuples for `op` in context `c`, best first by
/// cumulative log-probability, then lower weight, then entry order. Tuples
/// whose application would exceed `max_weight`, or for which `skip` holds,
/// are left out.
#[allow(clippy::too_many_arguments)]
pub fn beam_select_args(
    space: &SearchSpace<'_>,
    c: usize,
    op: usize,
    scorer: &dyn Scorer,
    ctx: &ScoreContext<'_>,
    beam_size: usize,
    max_weight: u32,
    skip: &mut dyn FnMut(&[ArgRef], u32) -> bool,
) -> Vec<Vec<ArgRef>> {
    let Some(lists) = candidate_lists(space, c, op) else {
        return Vec::new();
    };
    let n = lists.len();
    let operation = &space.lib.ops()[op];
    let fixed =
        (!scorer.prefix_sensitive()).then(|| position_log_probs(space, op, &lists, scorer, ctx));
    let min_weight: Vec<u32> = lists
        .iter()
        .map(|l| l.iter().map(|a| space.entry(*a).weight).min().unwrap_or(0))
        .collect();
    let mut suffix_min = vec![0u32; n + 1];
    for i in (0..n).rev() {
        suffix_min[i] = suffix_min[i + 1] + min_weight[i];
    }
    let budget = max_weight.saturating_sub(1);
    let mut beams = vec![Partial {
        args: Vec::new(),
        logp: 0.0,
        weight: 0,
    }];
    for i in 0..n {
        let last = i + 1 == n;
        let mut next = Vec::new();
        let mut cached: Option<(Vec<f64>, Vec<usize>)> = None;
        for b in &beams {
            if cached.is_none() || fixed.is_none() {
                let logps = match &fixed {
                    Some(f) => f[i].clone(),
                    None => {
                        let prefix: Vec<&ValueEntry> =
                            b.args.iter().map(|a| space.entry(*a)).collect();
                        let pctx = ScoreContext {
                            position: i,
                            ..ctx.clone()
                        };
                        let scores: Vec<f64> = lists[i]
                            .iter()
                            .map(|a| scorer.score(operation, &prefix, space.entry(*a), &pctx))
                            .collect();
                        log_softmax(&scores)
                    }
                };
                let mut order_i: Vec<usize> = (0..lists[i].len()).collect();
                order_i.sort_by(|&x, &y| {
                    logps[y]
                        .total_cmp(&logps[x])
                        .then(
                            space
                                .entry(lists[i][x])
                                .weight
                                .cmp(&space.entry(lists[i][y]).weight),
                        )
                        .then(lists[i][x].cmp(&lists[i][y]))
                });
                cached = Some((logps, order_i));
            }
            let (logps, order_i) = cached.as_ref().expect("computed above");
            let mut taken = 0;
            for &k in order_i {
                if taken >= beam_size {
                    break;
                }
                let a = lists[i][k];
                let weight = b.weight + space.entry(a).weight;
                if weight + suffix_min[i + 1] > budget {
                    continue;
                }
                let mut args = b.args.clone();
                args.push(a);
                if last && skip(&args, weight + 1) {
                    continue;
                }
                next.push(Partial {
                    args,
                    logp: b.logp + logps[k],
                    weight,
                });
                taken += 1;
            }
        }
        next.sort_by(order);
        next.truncate(beam_size);
        beams = next;
        if beams.is_empty() {
            break;
        }
    }
    beams.into_iter().map(|p| p.args).collect()
}
