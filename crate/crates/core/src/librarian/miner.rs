//! Best-first search over partial abstractions with branch-and-bound.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::pattern::HoleTerm;
use super::rewrite::{corpus_size, rewrite_with};
use super::{Abstraction, MiningConfig, Rejection, Solution, UtilityScore};
use crate::dsl::DSLibrary;
use crate::lang::{annotate, infer_type, Term, Ty};

/// One pre-order step of a partial pattern.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Label {
    Hole(usize),
    Var(usize),
    Int(i64),
    Bool(bool),
    List(Vec<i64>),
    Prim(String),
    /// Application of a named operation to `n` arguments.
    Call(String, usize),
    /// Application of any other head to `n` arguments.
    App(usize),
    Lam(usize),
}

fn label_of(t: &Term, depth: usize) -> Option<Label> {
    Some(match t {
        Term::Var(i) if *i < depth => Label::Var(*i),
        Term::Var(_) | Term::Input(_) => return None,
        Term::Int(v) => Label::Int(*v),
        Term::Bool(v) => Label::Bool(*v),
        Term::List(v) => Label::List(v.clone()),
        Term::Prim(p) => Label::Prim(p.clone()),
        Term::App(head, args) => match head.as_ref() {
            Term::Prim(p) => Label::Call(p.clone(), args.len()),
            _ => Label::App(args.len()),
        },
        Term::Lam(k, _) => Label::Lam(*k),
    })
}

/// Children of `t` in the order their labels follow it, with the binder
/// depth increment.
fn label_children(t: &Term) -> (Vec<&Term>, usize) {
    match t {
        Term::App(head, args) if matches!(head.as_ref(), Term::Prim(_)) => {
            (args.iter().collect(), 0)
        }
        Term::App(..) => (t.children(), 0),
        Term::Lam(k, body) => (vec![body.as_ref()], *k),
        _ => (Vec::new(), 0),
    }
}

fn build(labels: &[Label], pos: &mut usize) -> HoleTerm {
    let l = &labels[*pos];
    *pos += 1;
    match l {
        Label::Hole(j) => HoleTerm::Hole(*j),
        Label::Var(i) => HoleTerm::Var(*i),
        Label::Int(v) => HoleTerm::Int(*v),
        Label::Bool(v) => HoleTerm::Bool(*v),
        Label::List(v) => HoleTerm::List(v.clone()),
        Label::Prim(p) => HoleTerm::Prim(p.clone()),
        Label::Call(f, n) => {
            let args = (0..*n).map(|_| build(labels, pos)).collect();
            HoleTerm::App(Box::new(HoleTerm::Prim(f.clone())), args)
        }
        Label::App(n) => {
            let head = build(labels, pos);
            let args = (0..*n).map(|_| build(labels, pos)).collect();
            HoleTerm::App(Box::new(head), args)
        }
        Label::Lam(k) => HoleTerm::Lam(*k, Box::new(build(labels, pos))),
    }
}

#[derive(Clone)]
struct Cursor<'c> {
    program: u32,
    root_size: i64,
    /// Unexpanded subtrees, next one last.
    pending: Vec<&'c Term>,
    bindings: Vec<Term>,
    bound_size: i64,
}

impl Cursor<'_> {
    fn gain_bound(&self) -> i64 {
        (self.root_size - 1 - self.bound_size).max(0)
    }
}

struct State<'c> {
    labels: Vec<Label>,
    /// Binder depth of each unexpanded hole, next one last.
    pending: Vec<usize>,
    arity: usize,
    cursors: Vec<Cursor<'c>>,
    bound: i64,
}

/// Search statistics for one mining round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: usize,
    pub evaluated: usize,
    pub pruned: usize,
    /// False when the expansion cap stopped the search early.
    pub completed: bool,
    pub rejections: BTreeMap<String, usize>,
}

/// An accepted candidate with everything needed to install it.
#[derive(Clone, Debug)]
pub struct Finalized {
    pub pattern: HoleTerm,
    pub abstraction: Abstraction,
    pub library: DSLibrary,
    pub corpus: Vec<Solution>,
}

type Key = (i64, Reverse<usize>, Reverse<String>);

fn key(value: i64, h: &HoleTerm) -> Key {
    (value, Reverse(h.arity()), Reverse(h.to_string()))
}

/// Per-round view of a corpus: node types and task ids.
pub(crate) struct Round<'c> {
    corpus: &'c [Solution],
    lib: &'c DSLibrary,
    cfg: &'c MiningConfig,
    iteration: usize,
    types: HashMap<*const Term, Ty>,
    task_of: Vec<usize>,
    size: usize,
}

impl<'c> Round<'c> {
    /// Fails with the index of the first program that does not typecheck.
    pub(crate) fn new(
        corpus: &'c [Solution],
        lib: &'c DSLibrary,
        cfg: &'c MiningConfig,
        iteration: usize,
    ) -> Result<Self, usize> {
        let mut types = HashMap::new();
        for (i, s) in corpus.iter().enumerate() {
            let inputs = s.inputs.iter().cloned().collect();
            let (_, tys) = annotate(&s.program, &inputs, lib).map_err(|_| i)?;
            let mut nodes = Vec::new();
            s.program.walk(&mut |n| nodes.push(n as *const Term));
            types.extend(nodes.into_iter().zip(tys));
        }
        let mut ids = BTreeMap::new();
        let task_of = corpus
            .iter()
            .map(|s| {
                let n = ids.len();
                *ids.entry(s.task.as_str()).or_insert(n)
            })
            .collect();
        Ok(Round {
            corpus,
            lib,
            cfg,
            iteration,
            types,
            task_of,
            size: corpus_size(corpus),
        })
    }

    fn type_of(&self, t: &Term) -> Option<&Ty> {
        self.types.get(&(t as *const Term))
    }

    fn distinct_tasks(&self, programs: impl Iterator<Item = usize>) -> usize {
        programs
            .map(|p| self.task_of[p])
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Exact compression of `h`, or why it cannot be accepted.
    fn measure(&self, h: &HoleTerm) -> Result<(i64, usize), Rejection> {
        let nv = h.non_variable_count();
        if nv < self.cfg.min_non_variable {
            return Err(Rejection::Trivial { non_variable: nv });
        }
        let name = self.lib.next_abstraction_name();
        let r = rewrite_with(self.corpus, h, &name);
        let tasks = self.distinct_tasks(r.applied.iter().map(|a| a.program));
        if tasks < self.cfg.min_distinct_tasks {
            return Err(Rejection::TooFewTasks { tasks });
        }
        let value = self.size as i64 - corpus_size(&r.corpus) as i64;
        if value <= 0 {
            return Err(Rejection::NoCompression);
        }
        Ok((value, r.applied.len()))
    }

    /// Turns `h` into an abstraction, extends the library and rewrites the corpus.
    pub(crate) fn finalize(&self, h: &HoleTerm) -> Result<Finalized, Rejection> {
        let (value, matches) = self.measure(h)?;
        let name = self.lib.next_abstraction_name();
        let r = rewrite_with(self.corpus, h, &name);
        let arity = h.arity();
        let mut params: Vec<Option<Ty>> = vec![None; arity];
        let mut ret: Option<Ty> = None;
        let mut tasks = BTreeSet::new();
        for a in &r.applied {
            tasks.insert(self.corpus[a.program].task.clone());
            let rt = self
                .type_of(a.root)
                .ok_or(Rejection::InconsistentTypes { param: None })?;
            if ret.get_or_insert_with(|| rt.clone()) != rt {
                return Err(Rejection::InconsistentTypes { param: None });
            }
            for (j, b) in a.bindings.iter().enumerate() {
                let bt = self
                    .type_of(b)
                    .ok_or(Rejection::InconsistentTypes { param: Some(j) })?;
                if params[j].get_or_insert_with(|| bt.clone()) != bt {
                    return Err(Rejection::InconsistentTypes { param: Some(j) });
                }
            }
        }
        let ret = ret.expect("measure guarantees a match");
        if ret.is_arrow() {
            return Err(Rejection::IllTyped(
                "abstraction would return a function".into(),
            ));
        }
        let params: Vec<Ty> = params.into_iter().map(|p| p.expect("bound")).collect();
        let signature = if arity == 0 {
            ret
        } else {
            Ty::arrow(params, ret)
        };
        let abstraction = Abstraction {
            name,
            arity,
            body: h.to_body(),
            signature,
            found_in_tasks: tasks,
            utility: UtilityScore {
                matches,
                body_size: h.body_size(),
                arity,
                value,
            },
        };
        let library = self
            .lib
            .extend_with_abstraction(&abstraction, self.iteration)
            .map_err(|e| Rejection::IllTyped(e.to_string()))?;
        for s in &r.corpus {
            let inputs = s.inputs.iter().cloned().collect();
            infer_type(&s.program, &inputs, &library)
                .map_err(|e| Rejection::IllTyped(e.to_string()))?;
        }
        Ok(Finalized {
            pattern: h.clone(),
            abstraction,
            library,
            corpus: r.corpus,
        })
    }

    fn initial(&self) -> State<'c> {
        let mut cursors = Vec::new();
        for (i, s) in self.corpus.iter().enumerate() {
            s.program.walk(&mut |n| {
                let first_order = self.type_of(n).is_some_and(|t| !t.is_arrow());
                let expandable = matches!(
                    label_of(n, 0),
                    Some(l) if !matches!(l, Label::Lam(_))
                );
                if first_order && expandable {
                    cursors.push(Cursor {
                        program: i as u32,
                        root_size: n.size() as i64,
                        pending: vec![n],
                        bindings: Vec::new(),
                        bound_size: 0,
                    });
                }
            });
        }
        let bound = cursors.iter().map(Cursor::gain_bound).sum();
        State {
            labels: Vec::new(),
            pending: vec![0],
            arity: 0,
            cursors,
            bound,
        }
    }

    fn children(&self, s: &State<'c>) -> Vec<State<'c>> {
        let depth = *s.pending.last().expect("incomplete state");
        let mut out = Vec::new();
        let mut groups: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        for (i, c) in s.cursors.iter().enumerate() {
            if let Some(l) = label_of(c.pending.last().expect("aligned"), depth) {
                groups.entry(l).or_default().push(i);
            }
        }
        for (label, idxs) in groups {
            let mut pending = s.pending.clone();
            pending.pop();
            let sample = *s.cursors[idxs[0]].pending.last().expect("aligned");
            let (kids, inc) = label_children(sample);
            pending.extend(std::iter::repeat_n(depth + inc, kids.len()));
            let cursors = idxs
                .iter()
                .map(|&i| {
                    let mut c = s.cursors[i].clone();
                    let node = c.pending.pop().expect("aligned");
                    c.pending.extend(label_children(node).0.into_iter().rev());
                    c
                })
                .collect();
            let mut labels = s.labels.clone();
            labels.push(label);
            out.push(self.state(labels, pending, s.arity, cursors));
        }
        if s.labels.is_empty() {
            return out;
        }
        let bind = |c: &Cursor<'c>| -> Option<Term> {
            let node = *c.pending.last().expect("aligned");
            if node.min_free_var().is_some_and(|m| m < depth) {
                None
            } else {
                Some(node.shift(-(depth as isize), 0))
            }
        };
        let mut pending = s.pending.clone();
        pending.pop();
        if s.arity < self.cfg.max_arity {
            let cursors = s
                .cursors
                .iter()
                .filter_map(|c| {
                    let b = bind(c)?;
                    let mut c = c.clone();
                    c.pending.pop();
                    c.bound_size += b.size() as i64;
                    c.bindings.push(b);
                    Some(c)
                })
                .collect();
            let mut labels = s.labels.clone();
            labels.push(Label::Hole(s.arity));
            out.push(self.state(labels, pending.clone(), s.arity + 1, cursors));
        }
        for j in 0..s.arity {
            let cursors = s
                .cursors
                .iter()
                .filter(|c| bind(c).is_some_and(|b| b == c.bindings[j]))
                .map(|c| {
                    let mut c = c.clone();
                    c.pending.pop();
                    c
                })
                .collect();
            let mut labels = s.labels.clone();
            labels.push(Label::Hole(j));
            out.push(self.state(labels, pending.clone(), s.arity, cursors));
        }
        out
    }

    fn state(
        &self,
        labels: Vec<Label>,
        pending: Vec<usize>,
        arity: usize,
        cursors: Vec<Cursor<'c>>,
    ) -> State<'c> {
        let bound = cursors.iter().map(Cursor::gain_bound).sum();
        State {
            labels,
            pending,
            arity,
            cursors,
            bound,
        }
    }

    /// Highest-utility pattern that passes every filter.
    pub(crate) fn search(&self) -> (Option<Finalized>, SearchStats) {
        let cfg = self.cfg;
        let mut stats = SearchStats {
            completed: true,
            ..SearchStats::default()
        };
        let mut best: Option<(Key, Finalized)> = None;
        let mut frontier: BTreeMap<(i64, Reverse<u64>), State<'c>> = BTreeMap::new();
        let mut seq = 0u64;
        let root = self.initial();
        frontier.insert((root.bound, Reverse(seq)), root);
        while let Some(((bound, _), s)) = frontier.pop_last() {
            let floor = best.as_ref().map_or(1, |(k, _)| k.0);
            if cfg.pruning && bound < floor {
                stats.pruned += 1 + frontier.len();
                break;
            }
            if stats.expanded >= cfg.max_expansions {
                stats.completed = false;
                break;
            }
            stats.expanded += 1;
            for child in self.children(&s) {
                if child.cursors.is_empty() {
                    continue;
                }
                let floor = best.as_ref().map_or(1, |(k, _)| k.0);
                if cfg.pruning
                    && (child.bound < floor
                        || self.distinct_tasks(child.cursors.iter().map(|c| c.program as usize))
                            < cfg.min_distinct_tasks)
                {
                    stats.pruned += 1;
                    continue;
                }
                if !child.pending.is_empty() {
                    seq += 1;
                    frontier.insert((child.bound, Reverse(seq)), child);
                    if frontier.len() > cfg.max_frontier {
                        frontier.pop_first();
                        stats.completed = false;
                    }
                    continue;
                }
                stats.evaluated += 1;
                let h = build(&child.labels, &mut 0);
                let value = match self.measure(&h) {
                    Ok((v, _)) => v,
                    Err(r) => {
                        *stats.rejections.entry(r.kind().to_string()).or_default() += 1;
                        continue;
                    }
                };
                debug_assert!(
                    value <= child.bound,
                    "utility {value} exceeds bound {}",
                    child.bound
                );
                let k = key(value, &h);
                if best.as_ref().is_some_and(|(bk, _)| *bk >= k) {
                    continue;
                }
                match self.finalize(&h) {
                    Ok(f) => best = Some((k, f)),
                    Err(r) => *stats.rejections.entry(r.kind().to_string()).or_default() += 1,
                }
            }
        }
        (best.map(|(_, f)| f), stats)
    }
}
