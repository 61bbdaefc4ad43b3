//! Task traces: argument choices that rebuild programs found by exhaustive
//! enumeration on random inputs.
//!
//! Trace files are tab-separated, one record per line, after a `#` header:
//!
//! ```text
//! # absynth-traces 1
//! # library_version=2 episodes=4 episode_timeout=5 abstraction_bonus=1 effective_timeout=7 ...
//! E <episode> <inputs> <examples> <candidates> <completed>
//! T <target> <episode> <type> <program> <outputs>
//! S <step> <target> <op> <position> <argument> <context> <chosen> <negatives>
//! ```
//!
//! `inputs` is `name:Type,...`; `examples` separates examples with `|` and
//! bindings with `;`. Feature columns are comma-separated numbers and
//! `negatives` separates vectors with `;`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::features::{task_features_from, value_features};
use crate::dsl::DSLibrary;
use crate::lang::{
    parse, parse_open, Bindings, EvalLimits, OpenScope, Term, Ty, Value, WithInputs,
};
use crate::synthesis::clock::{Clock, ClockKind};
use crate::synthesis::exhaustive::enumerate_space;
use crate::synthesis::signature::Signature;
use crate::synthesis::space::{SearchSpace, CONCRETE};
use crate::synthesis::store::ArgRef;
use crate::synthesis::task::parse_literal;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceGenConfig {
    pub episodes: usize,
    /// Seconds per episode before abstraction bonuses.
    pub episode_timeout: f64,
    /// Extra seconds per learned abstraction in the library.
    pub abstraction_bonus: f64,
    pub max_weight: u32,
    /// Upper bound on concurrently running episodes.
    pub parallel_searches: usize,
    pub seed: u64,
    pub examples_per_task: usize,
    pub targets_per_episode: usize,
    pub negatives: usize,
    #[serde(skip)]
    pub clock: ClockKind,
    #[serde(skip)]
    pub eval_limits: EvalLimits,
}

impl Default for TraceGenConfig {
    fn default() -> Self {
        TraceGenConfig {
            episodes: 300,
            episode_timeout: 1000.0,
            abstraction_bonus: 100.0,
            max_weight: 15,
            parallel_searches: 300,
            seed: 0,
            examples_per_task: 3,
            targets_per_episode: 16,
            negatives: 32,
            clock: ClockKind::Wall,
            eval_limits: EvalLimits::default(),
        }
    }
}

impl TraceGenConfig {
    pub fn effective_timeout(&self, lib: &DSLibrary) -> f64 {
        self.episode_timeout + self.abstraction_bonus * lib.learned_count() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEpisode {
    pub inputs: Vec<(String, Ty)>,
    pub examples: Vec<Bindings>,
    pub candidates: u64,
    pub completed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceTarget {
    pub episode: usize,
    pub ty: Ty,
    pub program: Term,
    pub outputs: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub target: usize,
    pub op: String,
    pub position: usize,
    /// The chosen argument as it appears in the target program.
    pub argument: Term,
    pub context: Vec<f64>,
    pub chosen: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceDataset {
    pub library_version: u64,
    pub effective_timeout: f64,
    pub header: String,
    pub episodes: Vec<TraceEpisode>,
    pub targets: Vec<TraceTarget>,
    pub steps: Vec<TraceStep>,
}

/// Arguments inside lambda bodies refer to their parameters freely.
const MAX_FREE: usize = 8;

const TEMPLATES: [&[(&str, Ty)]; 3] = [
    &[("l", Ty::IntList)],
    &[("l", Ty::IntList), ("n", Ty::Int)],
    &[("a", Ty::IntList), ("b", Ty::IntList)],
];

fn random_value<R: Rng>(ty: &Ty, rng: &mut R) -> Value {
    match ty {
        Ty::Int => Value::Int(rng.gen_range(-5..=9)),
        Ty::Bool => Value::Bool(rng.gen()),
        _ => {
            let len = rng.gen_range(3..=8);
            Value::list(
                (0..len)
                    .map(|_| rng.gen_range(-5..=9))
                    .collect::<Vec<i64>>(),
            )
        }
    }
}

struct EpisodeOutput {
    episode: TraceEpisode,
    targets: Vec<(TraceTarget, Vec<TraceStep>)>,
}

fn arg_term(space: &SearchSpace<'_>, a: ArgRef, lambda: bool) -> Term {
    let t = space.entry(a).term.clone();
    if lambda {
        Term::lam(space.contexts[a.ctx as usize].params.len(), t)
    } else {
        t
    }
}

#[allow(clippy::too_many_arguments)]
fn decompose<R: Rng>(
    space: &SearchSpace<'_>,
    at: ArgRef,
    target: usize,
    target_sig: &Signature,
    context: &[f64],
    negatives: usize,
    rng: &mut R,
    out: &mut Vec<TraceStep>,
) {
    let Some(origin) = space.entry(at).origin.clone() else {
        return;
    };
    let op = &space.lib.ops()[origin.op];
    let c = at.ctx as usize;
    for (i, a) in origin.args.iter().enumerate() {
        let pool: Vec<ArgRef> = space
            .candidates(c, &op.params[i])
            .into_iter()
            .filter(|x| x != a)
            .collect();
        let picks = sample(rng, pool.len(), negatives.min(pool.len())).into_vec();
        let feats = |r: ArgRef| value_features(space, r.ctx as usize, space.entry(r), target_sig);
        out.push(TraceStep {
            target,
            op: op.name.clone(),
            position: i,
            argument: arg_term(space, *a, op.params[i].is_arrow()),
            context: context.to_vec(),
            chosen: feats(*a),
            negatives: picks.into_iter().map(|k| feats(pool[k])).collect(),
        });
        decompose(space, *a, target, target_sig, context, negatives, rng, out);
    }
}

/// Draws up to `k` distinct indices: a weight level uniformly among those
/// with values left, then a value uniformly within it.
fn stratified_sample<R: Rng>(rng: &mut R, weights: &[u32], k: usize) -> Vec<usize> {
    let mut levels: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, w) in weights.iter().enumerate() {
        levels.entry(*w).or_default().push(i);
    }
    let mut levels: Vec<Vec<usize>> = levels.into_values().collect();
    let mut out = Vec::new();
    while out.len() < k && !levels.is_empty() {
        let l = rng.gen_range(0..levels.len());
        let j = rng.gen_range(0..levels[l].len());
        out.push(levels[l].swap_remove(j));
        if levels[l].is_empty() {
            levels.remove(l);
        }
    }
    out
}

fn run_episode(lib: &DSLibrary, cfg: &TraceGenConfig, timeout: f64, index: usize) -> EpisodeOutput {
    let mut rng =
        ChaCha8Rng::seed_from_u64(cfg.seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let template = TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
    let inputs: Vec<(String, Ty)> = template
        .iter()
        .map(|(n, t)| (n.to_string(), t.clone()))
        .collect();
    let examples: Vec<Bindings> = (0..cfg.examples_per_task)
        .map(|_| {
            inputs
                .iter()
                .map(|(n, t)| (n.clone(), random_value(t, &mut rng)))
                .collect()
        })
        .collect();
    let mut space = SearchSpace::new(
        lib,
        cfg.eval_limits,
        inputs.clone(),
        examples.iter().cloned().map(Arc::new).collect(),
        None,
    );
    let mut clock = Clock::start(cfg.clock);
    let e = enumerate_space(&mut space, cfg.max_weight, &mut clock, timeout, false);
    let store = &space.contexts[CONCRETE].store;
    let pool: Vec<u32> = (0..store.len() as u32)
        .filter(|id| store.get(*id).origin.is_some())
        .collect();
    let weights: Vec<u32> = pool.iter().map(|id| store.get(*id).weight).collect();
    let mut chosen = stratified_sample(&mut rng, &weights, cfg.targets_per_episode);
    chosen.sort_unstable();
    let mut targets = Vec::new();
    for k in chosen {
        let id = pool[k];
        let entry = store.get(id);
        let outputs: Vec<Value> = entry
            .signature
            .iter()
            .map(|v| v.to_value().expect("concrete entries never error"))
            .collect();
        let target = TraceTarget {
            episode: index,
            ty: entry.ty.clone(),
            program: entry.term.clone(),
            outputs,
        };
        let context = task_features_from(
            inputs.len(),
            examples.len(),
            Some((&entry.ty, &entry.signature)),
        );
        let mut steps = Vec::new();
        decompose(
            &space,
            ArgRef {
                ctx: CONCRETE as u32,
                id,
            },
            0,
            &entry.signature,
            &context,
            cfg.negatives,
            &mut rng,
            &mut steps,
        );
        targets.push((target, steps));
    }
    EpisodeOutput {
        episode: TraceEpisode {
            inputs,
            examples,
            candidates: e.candidates,
            completed: e.completed,
        },
        targets,
    }
}

/// Runs `cfg.episodes` exhaustive enumerations on random inputs and records
/// how sampled programs were assembled. Episodes may run concurrently;
/// results are merged in episode order.
pub fn generate_traces(lib: &DSLibrary, cfg: &TraceGenConfig) -> TraceDataset {
    let timeout = cfg.effective_timeout(lib);
    let outputs = run_episodes(lib, cfg, timeout);
    let mut data = TraceDataset {
        library_version: lib.version(),
        effective_timeout: timeout,
        header: format!(
            "episodes={} episode_timeout={} abstraction_bonus={} effective_timeout={} max_weight={} seed={} examples={} targets_per_episode={} negatives={}",
            cfg.episodes,
            cfg.episode_timeout,
            cfg.abstraction_bonus,
            timeout,
            cfg.max_weight,
            cfg.seed,
            cfg.examples_per_task,
            cfg.targets_per_episode,
            cfg.negatives
        ),
        episodes: Vec::new(),
        targets: Vec::new(),
        steps: Vec::new(),
    };
    for out in outputs {
        data.episodes.push(out.episode);
        for (target, steps) in out.targets {
            let t = data.targets.len();
            data.targets.push(target);
            data.steps
                .extend(steps.into_iter().map(|s| TraceStep { target: t, ..s }));
        }
    }
    data
}

fn run_episodes(lib: &DSLibrary, cfg: &TraceGenConfig, timeout: f64) -> Vec<EpisodeOutput> {
    crate::par::map_indexed(cfg.episodes, cfg.parallel_searches.max(1), |i| {
        run_episode(lib, cfg, timeout, i)
    })
}

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn csv(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_csv(s: &str) -> Option<Vec<f64>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|x| x.parse().ok()).collect()
}

impl TraceDataset {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# absynth-traces 1");
        let _ = writeln!(
            out,
            "# library_version={} {}",
            self.library_version, self.header
        );
        for (i, e) in self.episodes.iter().enumerate() {
            let decl: Vec<String> = e.inputs.iter().map(|(n, t)| format!("{n}:{t}")).collect();
            let examples: Vec<String> = e
                .examples
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|(n, v)| format!("{n}={v}"))
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .collect();
            let _ = writeln!(
                out,
                "E\t{i}\t{}\t{}\t{}\t{}",
                decl.join(","),
                examples.join("|"),
                e.candidates,
                e.completed
            );
        }
        for (i, t) in self.targets.iter().enumerate() {
            let outs: Vec<String> = t.outputs.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "T\t{i}\t{}\t{}\t{}\t{}",
                t.episode,
                t.ty,
                t.program,
                outs.join("|")
            );
        }
        for (i, s) in self.steps.iter().enumerate() {
            let negs: Vec<String> = s.negatives.iter().map(|n| csv(n)).collect();
            let _ = writeln!(
                out,
                "S\t{i}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                s.target,
                s.op,
                s.position,
                s.argument,
                csv(&s.context),
                csv(&s.chosen),
                negs.join(";")
            );
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), TraceFileError> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TraceFileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, TraceFileError> {
        let bad = |line: usize, m: &str| TraceFileError::Malformed {
            line,
            message: m.to_string(),
        };
        let mut data = TraceDataset {
            library_version: 0,
            effective_timeout: 0.0,
            header: String::new(),
            episodes: Vec::new(),
            targets: Vec::new(),
            steps: Vec::new(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        if lines.next().map(|(_, l)| l.trim()) != Some("# absynth-traces 1") {
            return Err(bad(1, "missing `# absynth-traces 1` header"));
        }
        for (no, line) in lines {
            if let Some(h) = line.strip_prefix("# ") {
                let (first, rest) = h.split_once(' ').unwrap_or((h, ""));
                let v = first
                    .strip_prefix("library_version=")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad(no, "bad library version"))?;
                data.library_version = v;
                data.header = rest.to_string();
                data.effective_timeout = rest
                    .split(' ')
                    .find_map(|kv| kv.strip_prefix("effective_timeout="))
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0.0);
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            match cols[0] {
                "E" if cols.len() == 6 => {
                    let mut inputs = Vec::new();
                    for d in cols[2].split(',').filter(|d| !d.is_empty()) {
                        let (n, t) = d.split_once(':').ok_or_else(|| bad(no, "bad input"))?;
                        inputs.push((
                            n.to_string(),
                            t.parse::<Ty>().map_err(|_| bad(no, "bad type"))?,
                        ));
                    }
                    let mut examples = Vec::new();
                    for ex in cols[3].split('|') {
                        let mut b = Bindings::new();
                        for kv in ex.split(';').filter(|kv| !kv.is_empty()) {
                            let (n, v) =
                                kv.split_once('=').ok_or_else(|| bad(no, "bad binding"))?;
                            let v = parse_literal(v).ok_or_else(|| bad(no, "bad value"))?;
                            b.insert(n.to_string(), v);
                        }
                        examples.push(b);
                    }
                    data.episodes.push(TraceEpisode {
                        inputs,
                        examples,
                        candidates: cols[4].parse().map_err(|_| bad(no, "bad count"))?,
                        completed: cols[5].parse().map_err(|_| bad(no, "bad flag"))?,
                    });
                }
                "T" if cols.len() == 6 => {
                    let episode: usize = cols[2].parse().map_err(|_| bad(no, "bad episode"))?;
                    let names: Vec<String> = data
                        .episodes
                        .get(episode)
                        .ok_or_else(|| bad(no, "unknown episode"))?
                        .inputs
                        .iter()
                        .map(|(n, _)| n.clone())
                        .collect();
                    let scope = WithInputs {
                        inner: &OpenScope,
                        inputs: &names,
                    };
                    let program = parse(cols[4], &scope).map_err(|e| bad(no, &e.to_string()))?;
                    let outputs = cols[5]
                        .split('|')
                        .map(parse_literal)
                        .collect::<Option<Vec<Value>>>()
                        .ok_or_else(|| bad(no, "bad outputs"))?;
                    data.targets.push(TraceTarget {
                        episode,
                        ty: cols[3].parse().map_err(|_| bad(no, "bad type"))?,
                        program,
                        outputs,
                    });
                }
                "S" if cols.len() == 9 => {
                    let target: usize = cols[2].parse().map_err(|_| bad(no, "bad target"))?;
                    let t = data
                        .targets
                        .get(target)
                        .ok_or_else(|| bad(no, "unknown target"))?;
                    let names: Vec<String> = data.episodes[t.episode]
                        .inputs
                        .iter()
                        .map(|(n, _)| n.clone())
                        .collect();
                    let scope = WithInputs {
                        inner: &OpenScope,
                        inputs: &names,
                    };
                    let negatives = if cols[8].is_empty() {
                        Vec::new()
                    } else {
                        cols[8]
                            .split(';')
                            .map(parse_csv)
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(|| bad(no, "bad negatives"))?
                    };
                    data.steps.push(TraceStep {
                        target,
                        op: cols[3].to_string(),
                        position: cols[4].parse().map_err(|_| bad(no, "bad position"))?,
                        argument: parse_open(cols[5], &scope, MAX_FREE)
                            .map_err(|e| bad(no, &e.to_string()))?,
                        context: parse_csv(cols[6]).ok_or_else(|| bad(no, "bad context"))?,
                        chosen: parse_csv(cols[7]).ok_or_else(|| bad(no, "bad features"))?,
                        negatives,
                    });
                }
                _ => return Err(bad(no, "unknown or truncated record")),
            }
        }
        Ok(data)
    }

    /// Evaluates every target program on its episode's examples and checks
    /// the recorded outputs; returns the indices of targets that disagree.
    pub fn replay_failures(&self, lib: &DSLibrary, limits: EvalLimits) -> Vec<usize> {
        (0..self.targets.len())
            .filter(|&i| {
                let t = &self.targets[i];
                let ep = &self.episodes[t.episode];
                ep.examples.iter().zip(&t.outputs).any(|(ex, want)| {
                    crate::lang::evaluate(&t.program, ex, lib, limits).as_ref() != Ok(want)
                })
            })
            .collect()
    }
}
