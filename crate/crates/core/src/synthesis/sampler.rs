//! Sampling argument tuples without replacement.
//!
//! Each position has an independent categorical distribution. Sampled
//! prefixes are kept in a trie; after a tuple is drawn its probability mass
//! is subtracted along its path, so later draws follow the original
//! distribution conditioned on not repeating an earlier tuple. Exhaustion is
//! tracked exactly with remaining-leaf counts rather than floating mass.

use rand::Rng;

#[derive(Clone, Debug)]
struct Node {
    /// Unsampled probability mass below this node.
    mass: f64,
    /// Number of unsampled complete tuples below this node.
    remaining: u128,
    children: Vec<Option<usize>>,
}

#[derive(Clone, Debug)]
pub struct UniqueSampler {
    /// Per position: the choices with non-zero probability and their probabilities.
    support: Vec<Vec<(usize, f64)>>,
    /// Number of complete tuples below a node at each depth.
    leaves_below: Vec<u128>,
    nodes: Vec<Node>,
}

impl UniqueSampler {
    /// `dists[i][c]` is the probability of choice `c` at position `i`; each
    /// row is normalized here. Zero-probability choices are never drawn.
    pub fn new(dists: &[Vec<f64>]) -> Self {
        let support: Vec<Vec<(usize, f64)>> = dists
            .iter()
            .map(|row| {
                let total: f64 = row.iter().filter(|p| **p > 0.0).sum();
                row.iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(i, p)| (i, p / total))
                    .collect()
            })
            .collect();
        let mut leaves_below = vec![1u128; support.len() + 1];
        for d in (0..support.len()).rev() {
            leaves_below[d] = leaves_below[d + 1].saturating_mul(support[d].len() as u128);
        }
        let root = Node {
            mass: 1.0,
            remaining: leaves_below[0],
            children: Vec::new(),
        };
        UniqueSampler {
            support,
            leaves_below,
            nodes: vec![root],
        }
    }

    /// Total number of distinct tuples.
    pub fn support_size(&self) -> u128 {
        self.leaves_below[0]
    }

    pub fn is_exhausted(&self) -> bool {
        self.nodes[0].remaining == 0
    }

    /// Draws one unseen tuple of choice indices, or `None` once exhausted.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Vec<usize>> {
        if self.is_exhausted() {
            return None;
        }
        let depth = self.support.len();
        let mut path = vec![0usize];
        let mut choice = Vec::with_capacity(depth);
        let mut prefix_p = 1.0;
        for d in 0..depth {
            let node = path[d];
            if self.nodes[node].children.is_empty() {
                self.nodes[node].children = vec![None; self.support[d].len()];
            }
            // unsampled mass and remaining leaves of every child
            let stats: Vec<(f64, u128)> = (0..self.support[d].len())
                .map(|i| match self.nodes[node].children[i] {
                    Some(ch) => (self.nodes[ch].mass.max(0.0), self.nodes[ch].remaining),
                    None => (prefix_p * self.support[d][i].1, self.leaves_below[d + 1]),
                })
                .collect();
            let total: f64 = stats.iter().filter(|s| s.1 > 0).map(|s| s.0).sum();
            let pick = if total > 0.0 {
                let mut r = rng.gen::<f64>() * total;
                let mut pick = None;
                for (i, (m, rem)) in stats.iter().enumerate() {
                    if *rem == 0 {
                        continue;
                    }
                    pick = Some(i);
                    if r < *m {
                        break;
                    }
                    r -= m;
                }
                pick.expect("some child has remaining leaves")
            } else {
                // float cancellation left no mass; fall back to uniform over live children
                let live: Vec<usize> = (0..stats.len()).filter(|i| stats[*i].1 > 0).collect();
                live[rng.gen_range(0..live.len())]
            };
            let child = match self.nodes[node].children[pick] {
                Some(ch) => ch,
                None => {
                    self.nodes.push(Node {
                        mass: prefix_p * self.support[d][pick].1,
                        remaining: self.leaves_below[d + 1],
                        children: Vec::new(),
                    });
                    let id = self.nodes.len() - 1;
                    self.nodes[node].children[pick] = Some(id);
                    id
                }
            };
            prefix_p *= self.support[d][pick].1;
            choice.push(self.support[d][pick].0);
            path.push(child);
        }
        for &n in &path {
            let node = &mut self.nodes[n];
            node.remaining -= 1;
            node.mass = if node.remaining == 0 {
                0.0
            } else {
                node.mass - prefix_p
            };
        }
        Some(choice)
    }

    /// Draws up to `budget` unseen tuples.
    pub fn sample_many<R: Rng + ?Sized>(&mut self, budget: usize, rng: &mut R) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        while out.len() < budget {
            match self.sample(rng) {
                Some(t) => out.push(t),
                None => break,
            }
        }
        out
    }
}
