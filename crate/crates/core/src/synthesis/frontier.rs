//! Incremental best-first enumeration of argument tuples for static scorers.
//!
//! Tuples of one operation in one context are produced in the order used by
//! the beam: highest summed score first, then lower weight, then entry
//! order. The frontier persists across rounds, so tuples that were already
//! produced are never revisited. Entries that appear later open new
//! partitions: a partition `(g, i)` holds the tuples whose newest entry
//! belongs to generation `g` and first sits at position `i`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::ops::Bound;

use super::space::SearchSpace;
use super::store::ArgRef;
use crate::guidance::{ScoreContext, Scorer};
use crate::lang::Ty;

#[derive(Clone, Copy, Debug)]
struct Key {
    /// Negated score.
    cost: f64,
    weight: u32,
    arg: ArgRef,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.weight.cmp(&other.weight))
            .then(self.arg.cmp(&other.arg))
    }
}

struct Position {
    source: usize,
    ty: Ty,
    lambda: bool,
    cursor: usize,
    sorted: BTreeSet<Key>,
    current: HashMap<u32, (Key, u32)>,
    min_weight: u32,
}

struct Partition {
    generation: u32,
    pivot: usize,
    pivot_keys: Vec<Key>,
}

struct State {
    cost: f64,
    weight: u32,
    keys: Vec<Key>,
    pivot_index: usize,
    last: usize,
    partition: usize,
}

impl State {
    fn order(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.weight.cmp(&other.weight))
            .then_with(|| {
                let a = self.keys.iter().map(|k| k.arg);
                a.cmp(other.keys.iter().map(|k| k.arg))
            })
    }
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.order(other) == Ordering::Equal
    }
}

impl Eq for State {}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    /// Reversed so that `BinaryHeap` pops the best tuple.
    fn cmp(&self, other: &Self) -> Ordering {
        other.order(self)
    }
}

pub struct TupleFrontier {
    op: usize,
    positions: Vec<Position>,
    partitions: Vec<Partition>,
    heap: BinaryHeap<State>,
    generation: u32,
    /// `None` when some parameter has no lambda context.
    valid: bool,
}

impl TupleFrontier {
    pub fn new(space: &SearchSpace<'_>, c: usize, op: usize) -> Self {
        let mut valid = true;
        let positions = space.lib.ops()[op]
            .params
            .iter()
            .map(|p| {
                let (source, ty, lambda) = match p {
                    Ty::Arrow(params, ret) => match space.lambda_context(params) {
                        Some(l) => (l, (**ret).clone(), true),
                        None => {
                            valid = false;
                            (c, (**ret).clone(), true)
                        }
                    },
                    ty => (c, ty.clone(), false),
                };
                Position {
                    source,
                    ty,
                    lambda,
                    cursor: 0,
                    sorted: BTreeSet::new(),
                    current: HashMap::new(),
                    min_weight: u32::MAX,
                }
            })
            .collect();
        TupleFrontier {
            op,
            positions,
            partitions: Vec::new(),
            heap: BinaryHeap::new(),
            generation: 0,
            valid,
        }
    }

    fn passes(&self, part: &Partition, j: usize, key: &Key) -> bool {
        let Some((k, g)) = self.positions[j].current.get(&key.arg.id) else {
            return false;
        };
        if k != key {
            return false;
        }
        match j.cmp(&part.pivot) {
            Ordering::Less => *g < part.generation,
            Ordering::Equal => *g == part.generation,
            Ordering::Greater => *g <= part.generation,
        }
    }

    fn next_key(&self, part: &Partition, j: usize, after: Option<&Key>) -> Option<Key> {
        let lower = match after {
            Some(k) => Bound::Excluded(*k),
            None => Bound::Unbounded,
        };
        self.positions[j]
            .sorted
            .range((lower, Bound::Unbounded))
            .find(|k| self.passes(part, j, k))
            .copied()
    }

    /// Queues a tuple unless neither it nor any tuple reachable from it by
    /// advancing positions `last..` fits within `max_weight`.
    fn push(
        &mut self,
        keys: Vec<Key>,
        pivot_index: usize,
        last: usize,
        partition: usize,
        max_weight: u32,
    ) {
        let cost = keys.iter().map(|k| k.cost).sum();
        let weight: u32 = keys.iter().map(|k| k.weight).sum();
        if weight + 1 > max_weight {
            let floor: u32 = keys[..last].iter().map(|k| k.weight).sum::<u32>()
                + self.positions[last..]
                    .iter()
                    .map(|p| p.min_weight)
                    .sum::<u32>();
            if floor + 1 > max_weight {
                return;
            }
        }
        self.heap.push(State {
            cost,
            weight,
            keys,
            pivot_index,
            last,
            partition,
        });
    }

    /// Takes in entries added or improved since the last call.
    fn sync(
        &mut self,
        space: &SearchSpace<'_>,
        scorer: &dyn Scorer,
        ctx: &ScoreContext<'_>,
        max_weight: u32,
    ) {
        let g = self.generation;
        self.generation += 1;
        let operation = &space.lib.ops()[self.op];
        let mut fresh: Vec<Vec<Key>> = Vec::with_capacity(self.positions.len());
        for (i, pos) in self.positions.iter_mut().enumerate() {
            let store = &space.contexts[pos.source].store;
            let mut added = Vec::new();
            let pctx = ScoreContext {
                position: i,
                ..ctx.clone()
            };
            for &id in store.changes_since(pos.cursor) {
                let e = store.get(id);
                if e.ty != pos.ty || (pos.lambda && e.weight < 1) {
                    continue;
                }
                let key = Key {
                    cost: -scorer.score(operation, &[], e, &pctx),
                    weight: e.weight,
                    arg: ArgRef {
                        ctx: pos.source as u32,
                        id,
                    },
                };
                if let Some((old, _)) = pos.current.insert(id, (key, g)) {
                    pos.sorted.remove(&old);
                }
                pos.sorted.insert(key);
                pos.min_weight = pos.min_weight.min(key.weight);
                added.push(key);
            }
            pos.cursor = store.change_count();
            added.sort();
            added.dedup_by_key(|k| k.arg);
            added.retain(|k| pos.current.get(&k.arg.id).is_some_and(|(cur, _)| cur == k));
            fresh.push(added);
        }
        for (i, pivot_keys) in fresh.into_iter().enumerate() {
            if pivot_keys.is_empty() {
                continue;
            }
            let part = Partition {
                generation: g,
                pivot: i,
                pivot_keys,
            };
            let mut keys = Vec::with_capacity(self.positions.len());
            for j in 0..self.positions.len() {
                let k = if j == i {
                    Some(part.pivot_keys[0])
                } else {
                    self.next_key(&part, j, None)
                };
                match k {
                    Some(k) => keys.push(k),
                    None => break,
                }
            }
            let complete = keys.len() == self.positions.len();
            self.partitions.push(part);
            if complete {
                let p = self.partitions.len() - 1;
                self.push(keys, 0, 0, p, max_weight);
            }
        }
    }

    fn is_current(&self, s: &State) -> bool {
        s.keys
            .iter()
            .zip(&self.positions)
            .all(|(k, pos)| pos.current.get(&k.arg.id).is_some_and(|(cur, _)| cur == k))
    }

    /// Up to `count` untried tuples whose application weighs at most
    /// `max_weight`, examining at most `max_pops` tuples.
    #[allow(clippy::too_many_arguments)]
    pub fn next_batch(
        &mut self,
        space: &SearchSpace<'_>,
        scorer: &dyn Scorer,
        ctx: &ScoreContext<'_>,
        count: usize,
        max_weight: u32,
        max_pops: usize,
        skip: &mut dyn FnMut(&[ArgRef], u32) -> bool,
    ) -> Vec<Vec<ArgRef>> {
        if !self.valid {
            return Vec::new();
        }
        self.sync(space, scorer, ctx, max_weight);
        let mut out = Vec::new();
        let mut pops = 0;
        while out.len() < count && pops < max_pops {
            let Some(s) = self.heap.pop() else { break };
            pops += 1;
            let part = &self.partitions[s.partition];
            let mut successors = Vec::new();
            for j in s.last..self.positions.len() {
                let (next, pivot_index) = if j == part.pivot {
                    (
                        part.pivot_keys.get(s.pivot_index + 1).copied(),
                        s.pivot_index + 1,
                    )
                } else {
                    (self.next_key(part, j, Some(&s.keys[j])), s.pivot_index)
                };
                if let Some(k) = next {
                    let mut keys = s.keys.clone();
                    keys[j] = k;
                    successors.push((keys, pivot_index, j));
                }
            }
            let partition = s.partition;
            for (keys, pivot_index, j) in successors {
                self.push(keys, pivot_index, j, partition, max_weight);
            }
            if !self.is_current(&s) {
                continue;
            }
            let args: Vec<ArgRef> = s.keys.iter().map(|k| k.arg).collect();
            let w = space.tuple_weight(&args);
            if w > max_weight || skip(&args, w) {
                continue;
            }
            out.push(args);
        }
        out
    }
}
