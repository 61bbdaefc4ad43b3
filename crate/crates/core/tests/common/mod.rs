#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use absynth::dsl::DSLibrary;
use absynth::lang::{Term, Ty};
use absynth::librarian::{finalize, HoleTerm, MiningConfig, Solution};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random well-typed terms over a subset of a library.
pub struct TermGen<'a> {
    pub lib: &'a DSLibrary,
    pub ops: Vec<String>,
    pub inputs: Vec<(String, Ty)>,
    pub leaf_bias: f64,
}

impl<'a> TermGen<'a> {
    pub fn new(lib: &'a DSLibrary, ops: &[&str], inputs: &[(&str, Ty)]) -> Self {
        TermGen {
            lib,
            ops: ops.iter().map(|s| s.to_string()).collect(),
            inputs: inputs
                .iter()
                .map(|(n, t)| (n.to_string(), t.clone()))
                .collect(),
            leaf_bias: 0.15,
        }
    }

    fn leaves(&self, ty: &Ty, env: &[Ty]) -> Vec<Term> {
        let mut out: Vec<Term> = self
            .inputs
            .iter()
            .filter(|(_, t)| t == ty)
            .map(|(n, _)| Term::input(n.clone()))
            .collect();
        out.extend(
            self.lib
                .constants()
                .iter()
                .filter(|c| &c.ty == ty)
                .map(|c| c.reference()),
        );
        out.extend(
            env.iter()
                .rev()
                .enumerate()
                .filter(|(_, t)| *t == ty)
                .map(|(i, _)| Term::Var(i)),
        );
        out
    }

    /// A term of type `ty` with at most `budget` nodes, if one is found.
    pub fn term(&self, rng: &mut impl Rng, ty: &Ty, budget: usize, env: &[Ty]) -> Option<Term> {
        if let Ty::Arrow(params, ret) = ty {
            let mut inner = env.to_vec();
            inner.extend(params.iter().cloned());
            return Some(Term::lam(
                params.len(),
                self.term(rng, ret, budget, &inner)?,
            ));
        }
        let leaves = self.leaves(ty, env);
        let ops: Vec<_> = self
            .ops
            .iter()
            .filter_map(|n| self.lib.op(n))
            .filter(|o| &o.ret == ty && o.arity() < budget)
            .collect();
        if ops.is_empty() || (!leaves.is_empty() && (budget <= 1 || rng.gen_bool(self.leaf_bias))) {
            return leaves.choose(rng).cloned();
        }
        let op = *ops.choose(rng).unwrap();
        let mut left = budget - 1 - op.arity();
        let mut args = Vec::new();
        for p in &op.params {
            let extra = if left > 0 { rng.gen_range(0..=left) } else { 0 };
            left -= extra;
            match self.term(rng, p, 1 + extra, env) {
                Some(a) => args.push(a),
                None => return leaves.choose(rng).cloned(),
            }
        }
        Some(Term::call(op.name.clone(), args))
    }
}

/// Program length counted independently of [`Term::size`].
pub fn naive_size(t: &Term) -> usize {
    let mut n = 0;
    t.walk(&mut |x| match x {
        Term::Var(_) | Term::Lam(..) => {}
        Term::App(head, _) if matches!(head.as_ref(), Term::Prim(_)) => {}
        _ => n += 1,
    });
    n
}

fn subterm<'t>(t: &'t Term, path: &[usize]) -> Option<&'t Term> {
    match path.split_first() {
        None => Some(t),
        Some((i, rest)) => subterm(*t.children().get(*i)?, rest),
    }
}

/// Path and binder depth of every hole occurrence, in pre-order.
fn hole_sites(h: &HoleTerm) -> Vec<(usize, Vec<usize>, usize)> {
    fn go(
        h: &HoleTerm,
        path: &mut Vec<usize>,
        depth: usize,
        out: &mut Vec<(usize, Vec<usize>, usize)>,
    ) {
        match h {
            HoleTerm::Hole(j) => out.push((*j, path.clone(), depth)),
            HoleTerm::App(head, args) => {
                for (i, c) in std::iter::once(head.as_ref())
                    .chain(args.iter())
                    .enumerate()
                {
                    path.push(i);
                    go(c, path, depth, out);
                    path.pop();
                }
            }
            HoleTerm::Lam(k, body) => {
                path.push(0);
                go(body, path, depth + k, out);
                path.pop();
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(h, &mut Vec::new(), 0, &mut out);
    out
}

/// Matches by reading bindings off hole paths and re-instantiating.
pub fn naive_match(h: &HoleTerm, t: &Term) -> Option<Vec<Term>> {
    let mut binds: Vec<Option<Term>> = vec![None; h.arity()];
    for (j, path, depth) in hole_sites(h) {
        let s = subterm(t, &path)?;
        if s.min_free_var().is_some_and(|m| m < depth) {
            return None;
        }
        if binds[j].is_none() {
            binds[j] = Some(s.shift(-(depth as isize), 0));
        }
    }
    let binds: Vec<Term> = binds.into_iter().map(Option::unwrap).collect();
    (h.instantiate(&binds) == *t).then_some(binds)
}

/// Number of subtrees of `t` that `h` matches, by direct enumeration.
pub fn naive_count(h: &HoleTerm, corpus: &[Solution]) -> usize {
    let mut n = 0;
    for s in corpus {
        s.program.walk(&mut |x| {
            if naive_match(h, x).is_some() {
                n += 1;
            }
        });
    }
    n
}

fn naive_rewrite(h: &HoleTerm, t: &Term, applied: &mut usize, tasks: &mut bool) -> Term {
    if let Some(b) = naive_match(h, t) {
        *applied += 1;
        *tasks = true;
        let args: Vec<Term> = b
            .iter()
            .map(|x| naive_rewrite(h, x, applied, tasks))
            .collect();
        return if args.is_empty() {
            Term::prim("fn_oracle")
        } else {
            Term::call("fn_oracle", args)
        };
    }
    match t {
        Term::App(head, args) => Term::App(
            Box::new(naive_rewrite(h, head, applied, tasks)),
            args.iter()
                .map(|a| naive_rewrite(h, a, applied, tasks))
                .collect(),
        ),
        Term::Lam(k, body) => Term::lam(*k, naive_rewrite(h, body, applied, tasks)),
        other => other.clone(),
    }
}

/// Size reduction and distinct matched tasks for `h`, computed independently.
pub fn naive_utility(h: &HoleTerm, corpus: &[Solution]) -> (i64, usize) {
    let mut before = 0i64;
    let mut after = 0i64;
    let mut tasks = BTreeSet::new();
    for s in corpus {
        let mut applied = 0;
        let mut hit = false;
        let r = naive_rewrite(h, &s.program, &mut applied, &mut hit);
        before += naive_size(&s.program) as i64;
        after += naive_size(&r) as i64;
        if hit {
            tasks.insert(s.task.clone());
        }
    }
    (before - after, tasks.len())
}

pub fn non_variable(h: &HoleTerm) -> usize {
    match h {
        HoleTerm::Hole(_) | HoleTerm::Var(_) => 0,
        HoleTerm::Lam(_, b) => non_variable(b),
        HoleTerm::App(head, args) => {
            non_variable(head) + args.iter().map(non_variable).sum::<usize>()
        }
        _ => 1,
    }
}

/// A pattern node under construction: either kept structure or a cut.
enum Shape {
    Cut(Term),
    Node(Term, Vec<Shape>),
}

fn shapes(t: &Term, depth: usize, root: bool) -> Vec<Shape> {
    let mut out = Vec::new();
    if !root && !t.min_free_var().is_some_and(|m| m < depth) {
        out.push(Shape::Cut(t.shift(-(depth as isize), 0)));
    }
    let keepable = match t {
        Term::Input(_) => false,
        Term::Var(i) => *i < depth,
        Term::Lam(..) => !root,
        _ => true,
    };
    if !keepable {
        return out;
    }
    let (kids, inc): (Vec<&Term>, usize) = match t {
        Term::App(head, args) if matches!(head.as_ref(), Term::Prim(_)) => {
            (args.iter().collect(), 0)
        }
        Term::Lam(k, b) => (vec![b.as_ref()], *k),
        _ => (t.children(), 0),
    };
    let mut combos: Vec<Vec<Shape>> = vec![Vec::new()];
    for k in kids {
        let opts = shapes(k, depth + inc, false);
        let mut next = Vec::new();
        for c in &combos {
            for o in &opts {
                let mut c2: Vec<Shape> = c.iter().map(clone_shape).collect();
                c2.push(clone_shape(o));
                next.push(c2);
            }
        }
        combos = next;
    }
    for c in combos {
        out.push(Shape::Node(t.clone(), c));
    }
    out
}

fn clone_shape(s: &Shape) -> Shape {
    match s {
        Shape::Cut(t) => Shape::Cut(t.clone()),
        Shape::Node(t, c) => Shape::Node(t.clone(), c.iter().map(clone_shape).collect()),
    }
}

fn cuts(s: &Shape, out: &mut Vec<Term>) {
    match s {
        Shape::Cut(t) => out.push(t.clone()),
        Shape::Node(_, c) => c.iter().for_each(|x| cuts(x, out)),
    }
}

fn to_hole_term(s: &Shape, ids: &[usize], next: &mut usize) -> HoleTerm {
    match s {
        Shape::Cut(_) => {
            let j = ids[*next];
            *next += 1;
            HoleTerm::Hole(j)
        }
        Shape::Node(t, kids) => {
            let mut k = kids.iter().map(|c| to_hole_term(c, ids, next));
            match t {
                Term::Var(i) => HoleTerm::Var(*i),
                Term::Int(v) => HoleTerm::Int(*v),
                Term::Bool(v) => HoleTerm::Bool(*v),
                Term::List(v) => HoleTerm::List(v.clone()),
                Term::Prim(p) => HoleTerm::Prim(p.clone()),
                Term::Lam(n, _) => HoleTerm::Lam(*n, Box::new(k.next().unwrap())),
                Term::App(head, _) => match head.as_ref() {
                    Term::Prim(p) => {
                        HoleTerm::App(Box::new(HoleTerm::Prim(p.clone())), k.collect())
                    }
                    _ => {
                        let h = k.next().unwrap();
                        HoleTerm::App(Box::new(h), k.collect())
                    }
                },
                Term::Input(_) => unreachable!(),
            }
        }
    }
}

/// Every pattern rooted at a subtree of the corpus with arity ≤ `max_arity`,
/// including every way of identifying holes with equal bindings.
pub fn all_patterns(corpus: &[Solution], max_arity: usize) -> BTreeSet<HoleTerm> {
    let mut out = BTreeSet::new();
    for s in corpus {
        let mut roots = Vec::new();
        s.program.walk(&mut |t| roots.push(t.clone()));
        for r in roots {
            if matches!(r, Term::Var(_) | Term::Input(_) | Term::Lam(..)) {
                continue;
            }
            for sh in shapes(&r, 0, true) {
                let mut cs = Vec::new();
                cuts(&sh, &mut cs);
                let mut assignments: Vec<Vec<usize>> = vec![Vec::new()];
                for c in &cs {
                    let mut next = Vec::new();
                    for a in &assignments {
                        let used = a.iter().max().map_or(0, |m| m + 1);
                        for j in 0..used {
                            let first = a.iter().position(|x| *x == j).unwrap();
                            if cs[first] == *c {
                                let mut b = a.clone();
                                b.push(j);
                                next.push(b);
                            }
                        }
                        if used < max_arity {
                            let mut b = a.clone();
                            b.push(used);
                            next.push(b);
                        }
                    }
                    assignments = next;
                }
                for a in assignments {
                    out.insert(to_hole_term(&sh, &a, &mut 0));
                }
            }
        }
    }
    out
}

/// Highest utility over all accepted patterns, by exhaustive enumeration.
pub fn brute_force_best(corpus: &[Solution], lib: &DSLibrary, cfg: &MiningConfig) -> i64 {
    let mut best = 0;
    for h in all_patterns(corpus, cfg.max_arity) {
        if non_variable(&h) < cfg.min_non_variable {
            continue;
        }
        let (value, tasks) = naive_utility(&h, corpus);
        if value <= best || tasks < cfg.min_distinct_tasks {
            continue;
        }
        if let Ok(f) = finalize(&h, corpus, lib, cfg, 1) {
            assert_eq!(f.abstraction.utility.value, value, "utility of {h}");
            best = value;
        }
    }
    best
}

/// Random small corpus: two or three programs over `inputs` with sizes in
/// `4..=max_size`, later programs often mutating earlier ones so that
/// structure recurs.
pub fn random_corpus(
    rng: &mut impl Rng,
    gen: &TermGen<'_>,
    out_types: &[Ty],
    max_size: usize,
) -> Vec<Solution> {
    let n = rng.gen_range(2..=3);
    let mut progs: Vec<Term> = Vec::new();
    while progs.len() < n {
        let candidate = if !progs.is_empty() && rng.gen_bool(0.6) {
            let base = progs.choose(rng).unwrap().clone();
            mutate(rng, gen, &base, max_size)
        } else {
            let ty = out_types.choose(rng).unwrap();
            gen.term(rng, ty, max_size, &[])
        };
        if let Some(t) = candidate {
            if (4..=max_size).contains(&t.size()) && !matches!(t, Term::Lam(..)) {
                progs.push(t);
            }
        }
    }
    let tasks = ["A", "B", "C"];
    progs
        .into_iter()
        .map(|p| Solution {
            task: tasks[rng.gen_range(0..tasks.len())].to_string(),
            inputs: gen.inputs.clone(),
            program: p,
        })
        .collect()
}

fn mutate(rng: &mut impl Rng, gen: &TermGen<'_>, t: &Term, max_size: usize) -> Option<Term> {
    let inputs: BTreeMap<String, Ty> = gen.inputs.iter().cloned().collect();
    let (_, types) = absynth::lang::annotate(t, &inputs, gen.lib).ok()?;
    let mut nodes: Vec<&Term> = Vec::new();
    t.walk(&mut |x| nodes.push(x));
    let sites: Vec<usize> = (0..nodes.len())
        .filter(|&i| nodes[i].is_closed() && !types[i].is_arrow())
        .collect();
    let &site = sites.choose(rng)?;
    let ty = types[site].clone();
    let target = nodes[site];
    let budget = rng.gen_range(1..=3);
    let fresh = gen.term(rng, &ty, budget, &[])?;
    let out = replace(t, target, &fresh);
    (out.size() <= max_size).then_some(out)
}

fn replace(t: &Term, target: &Term, with: &Term) -> Term {
    if std::ptr::eq(t, target) {
        return with.clone();
    }
    match t {
        Term::App(head, args) => Term::App(
            Box::new(replace(head, target, with)),
            args.iter().map(|a| replace(a, target, with)).collect(),
        ),
        Term::Lam(k, body) => Term::lam(*k, replace(body, target, with)),
        other => other.clone(),
    }
}

/// The six-operation sub-language used for oracle comparisons.
pub fn six_op_dsl() -> DSLibrary {
    DSLibrary::from_primitives(
        &["Add", "Map", "Filter", "IsEven", "Sum", "Reverse"],
        vec![Term::Int(0), Term::Int(1), Term::Int(2)],
    )
}

/// Random tasks over `l: IntList` whose outputs come from random programs of
/// size up to `max_size` in `lib`, so that some are solvable at small weights.
pub fn random_tasks(
    lib: &DSLibrary,
    ops: &[&str],
    n: usize,
    max_size: usize,
    seed: u64,
) -> Vec<absynth::synthesis::Task> {
    use absynth::lang::{evaluate, EvalLimits, Value};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let gen = TermGen::new(lib, ops, &[("l", Ty::IntList)]);
    let mut text = String::new();
    let mut made = 0;
    while made < n {
        let ty = if rng.gen_bool(0.5) {
            Ty::Int
        } else {
            Ty::IntList
        };
        let Some(prog) = gen.term(&mut rng, &ty, max_size, &[]) else {
            continue;
        };
        let mut lines = Vec::new();
        for _ in 0..3 {
            let len = rng.gen_range(1..=5);
            let l: Vec<i64> = (0..len).map(|_| rng.gen_range(-3..=6)).collect();
            let b: BTreeMap<String, Value> = [("l".to_string(), Value::list(l.clone()))].into();
            match evaluate(&prog, &b, lib, EvalLimits::default()) {
                Ok(v) => lines.push(format!("example: l={} -> {}", Value::list(l), v)),
                Err(_) => break,
            }
        }
        if lines.len() < 3 {
            continue;
        }
        if made > 0 {
            text.push_str("---\n");
        }
        text.push_str(&format!(
            "name: t{made}\ninputs: l:IntList\noutput: {ty}\n{}\n",
            lines.join("\n")
        ));
        made += 1;
    }
    absynth::synthesis::parse_tasks(&text).expect("generated tasks parse")
}

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// The loop micro-domain with budgets small enough for a test.
pub fn quick_loop_config(
    out: &std::path::Path,
    tasks: usize,
) -> (Vec<absynth::synthesis::Task>, absynth::harness::RunConfig) {
    let dir = data_dir().join("loop_domain");
    let mut tasks_all = absynth::synthesis::load_tasks(&dir.join("tasks.txt")).unwrap();
    tasks_all.truncate(tasks);
    let mut cfg = absynth::harness::RunConfig::default();
    cfg.apply_file(&dir.join("run.conf")).unwrap();
    for (k, v) in [
        ("search.timeout", "0.4"),
        ("search.restart_interval", "0.2"),
        ("trace.episodes", "6"),
        ("trace.episode_timeout", "0.2"),
        ("trace.abstraction_bonus", "0.1"),
        ("trace.max_weight", "7"),
        ("train.max_steps", "2000"),
        ("trials", "2"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg.out_dir = out.to_path_buf();
    (tasks_all, cfg)
}

/// Loop runs with and without abstraction learning on one fold, evaluation
/// of each run's best iteration on the other, and plot data for both.
pub fn quick_experiment(out: &std::path::Path, tasks: usize) {
    use absynth::harness::driver::iteration_dir;
    use absynth::harness::{emit_plot_data, evaluate_tasks, make_folds, wake_sleep_loop};
    let (tasks, cfg) = quick_loop_config(out, tasks);
    let folds = make_folds(&tasks, 2, cfg.seed);
    let (train, test) = &folds[0];
    let mut summaries = Vec::new();
    for (system, baseline) in [("absynth", false), ("baseline", true)] {
        let mut c = cfg.clone();
        c.baseline = baseline;
        c.out_dir = out.join(system);
        let run = wake_sleep_loop(train, &c).unwrap();
        let best = iteration_dir(&c.out_dir, run.summary.best_iteration);
        let lib = absynth::dsl::load_library(&best.join("library.txt")).unwrap();
        let scorer = absynth::guidance::LinearScorer::load(&best.join("scorer.txt")).unwrap();
        summaries.push(evaluate_tasks(
            system, test, &lib, &scorer, c.trials, &c.search, c.seed, c.workers,
        ));
    }
    let base = summaries[1].clone();
    summaries[0].compare_with(&base);
    for s in &summaries {
        std::fs::write(
            out.join(format!("summary_{}.json", s.system)),
            serde_json::to_string_pretty(s).unwrap(),
        )
        .unwrap();
    }
    let refs: Vec<_> = summaries.iter().collect();
    emit_plot_data(&refs, &out.join("plots")).unwrap();
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &std::path::Path, d: &std::path::Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
