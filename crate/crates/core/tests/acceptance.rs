//! Acceptance run: one pass/fail line per criterion.
//!
//! cargo test -p absynth --test acceptance

mod common;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use absynth::dsl::{loop_dsl, syntactic_combinations, DSLibrary};
use absynth::guidance::UniformScorer;
use absynth::harness::{ci95, t_test, wake_sleep_loop};
use absynth::lang::{parse, Term, Ty, WithInputs};
use absynth::librarian::{mine, rewrite, MiningConfig, Solution};
use absynth::synthesis::{
    exhaustive_search, parse_tasks, run_search, search, ClockKind, SearchConfig, UniqueSampler,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn within(start: Instant, limit: f64, out: Outcome) -> Outcome {
    let secs = start.elapsed().as_secs_f64();
    match out {
        Ok(m) if secs <= limit => Ok(format!("{m}; {secs:.1}s")),
        Ok(m) => Err(format!("{m}; took {secs:.1}s, limit {limit}s")),
        Err(m) => Err(format!("{m}; {secs:.1}s")),
    }
}

fn virtual_clock() -> ClockKind {
    ClockKind::Virtual {
        candidates_per_second: 50_000.0,
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let lib = common::six_op_dsl();
    let tasks = common::random_tasks(
        &lib,
        &["Add", "Map", "Filter", "IsEven", "Sum", "Reverse"],
        50,
        7,
        2024,
    );
    let cfg = SearchConfig {
        clock: virtual_clock(),
        ..SearchConfig::unbounded(5)
    };
    let mut solved = (BTreeSet::new(), BTreeSet::new());
    let mut mismatched = Vec::new();
    for t in &tasks {
        let (r, space) = run_search(t, &lib, &UniformScorer, &cfg);
        let ex = exhaustive_search(t, &lib, 5, f64::INFINITY, virtual_clock(), cfg.eval_limits);
        if r.solved {
            solved.0.insert(t.name.clone());
        }
        if ex.solution.is_some() {
            solved.1.insert(t.name.clone());
        }
        if space.signature_sets() != ex.space.signature_sets() || !r.exhausted || !ex.completed {
            mismatched.push(t.name.clone());
        }
    }
    within(
        start,
        60.0,
        check(
            solved.0 == solved.1 && mismatched.is_empty(),
            format!(
                "{} of 50 solved by both, signature sets identical",
                solved.0.len()
            ),
            format!(
                "search solved {:?}, exhaustive solved {:?}, signature mismatch {:?}",
                solved.0, solved.1, mismatched
            ),
        ),
    )
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let lib = loop_dsl();
    let symbols = (lib.ops().len() + lib.constants().len()) as u64;
    let combos = syntactic_combinations(symbols, 8);
    let names = vec!["l".to_string()];
    let scope = WithInputs {
        inner: &lib,
        inputs: &names,
    };
    let corpus: Vec<Solution> = [
        (
            "double_evens",
            "(Loop l 0 (Len l) (lam (IfKeep (IsEven $0) (Double $0))))",
        ),
        (
            "keep_evens",
            "(Loop l 0 (Len l) (lam (IfKeep (IsEven $0) $0)))",
        ),
    ]
    .iter()
    .map(|(task, text)| Solution {
        task: task.to_string(),
        inputs: vec![("l".into(), Ty::IntList)],
        program: parse(text, &scope).unwrap(),
    })
    .collect();
    let mined = mine(&corpus, &lib, &MiningConfig::default(), 1);
    let Some(first) = mined.mined.first() else {
        return Err("no abstraction mined".into());
    };
    let a = &first.abstraction;
    let rewritten = rewrite(&corpus[..1], a)[0].program.size();

    let task = &parse_tasks(
        "name: double_evens\ninputs: l:IntList\noutput: IntList\n\
         example: l=[1,2,3,4,5,6] -> [4,8,12]\nexample: l=[2,2,7] -> [4,4]\nexample: l=[9,0,3,8] -> [0,16]\n",
    )
    .unwrap()[0];
    let without = exhaustive_search(
        task,
        &lib,
        7,
        f64::INFINITY,
        virtual_clock(),
        Default::default(),
    );
    let at_eight = exhaustive_search(
        task,
        &lib,
        8,
        f64::INFINITY,
        virtual_clock(),
        Default::default(),
    );
    let size_without = at_eight.solution.as_ref().map(Term::size);
    let extended: DSLibrary = mined.library.clone();
    let cfg = SearchConfig {
        clock: virtual_clock(),
        ..SearchConfig::unbounded(5)
    };
    let with = search(
        task,
        &extended,
        &UniformScorer,
        &SearchConfig {
            stop_on_solution: true,
            ..cfg
        },
    );
    let size_with = with.program.as_ref().map(Term::size);
    within(
        start,
        30.0,
        check(
            symbols == 9
                && combos == 43_046_721
                && a.arity == 2
                && rewritten == 5
                && without.completed
                && without.solution.is_none()
                && size_without == Some(8)
                && size_with == Some(5),
            format!(
                "9^8 = {combos}; {} = {}; target size 5 with it, 8 without",
                a.name,
                absynth::lang::print(&a.body)
            ),
            format!(
                "symbols {symbols}, combinations {combos}, arity {}, rewritten {rewritten}, none below 8: {}, without {size_without:?}, with {size_with:?}",
                a.arity,
                without.solution.is_none()
            ),
        ),
    )
}

const SMALL_OPS: &[&str] = &[
    "Add", "Multiply", "Map", "Filter", "IsEven", "Sum", "Length", "Reverse",
];

fn small_inputs() -> Vec<(&'static str, Ty)> {
    vec![("l", Ty::IntList), ("n", Ty::Int)]
}

fn miner_vs_brute_force() -> Outcome {
    let start = Instant::now();
    let lib = absynth::dsl::default_list_dsl();
    let inputs = small_inputs();
    let gen = common::TermGen::new(&lib, SMALL_OPS, &inputs);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cfg = MiningConfig {
        max_rounds: 1,
        ..MiningConfig::default()
    };
    let mut bad = Vec::new();
    let mut positive = 0;
    for i in 0..100 {
        let corpus = common::random_corpus(&mut rng, &gen, &[Ty::Int, Ty::IntList], 7);
        let expected = common::brute_force_best(&corpus, &lib, &cfg);
        let top = |c: &MiningConfig| {
            mine(&corpus, &lib, c, 1)
                .mined
                .first()
                .map_or(0, |m| m.abstraction.utility.value)
        };
        let on = top(&cfg);
        let off = top(&MiningConfig {
            pruning: false,
            ..cfg.clone()
        });
        if expected > 0 {
            positive += 1;
        }
        if on != expected || off != expected {
            bad.push((i, expected, on, off));
        }
    }
    within(
        start,
        120.0,
        check(
            bad.is_empty(),
            format!("100 corpora agree ({positive} with a positive optimum)"),
            format!("disagreements (corpus, brute force, pruned, unpruned): {bad:?}"),
        ),
    )
}

fn rewrite_preservation(reports: &[absynth::harness::IterationReport]) -> Outcome {
    let programs: usize = reports.iter().map(|r| r.rewrite_check.programs).sum();
    let preserved: usize = reports.iter().map(|r| r.rewrite_check.preserved).sum();
    let abstractions: usize = reports.iter().map(|r| r.abstractions.len()).sum();
    check(
        programs > 0 && programs == preserved,
        format!("{preserved}/{programs} rewritten solutions preserved across {abstractions} abstractions"),
        format!("{preserved}/{programs} rewritten solutions preserved"),
    )
}

/// True when every pattern shared by two tasks has fewer than two
/// non-variable expressions.
fn adversarial(corpus: &[Solution]) -> bool {
    common::all_patterns(corpus, 3)
        .iter()
        .all(|h| common::non_variable(h) < 2 || common::naive_utility(h, corpus).1 < 2)
}

fn filter_enforcement() -> Outcome {
    let start = Instant::now();
    let lib = absynth::dsl::default_list_dsl();
    let inputs = small_inputs();
    let gen = common::TermGen::new(&lib, SMALL_OPS, &inputs);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut corpora: Vec<Vec<Solution>> = Vec::new();
    let x = vec![("x".to_string(), Ty::Int), ("y".to_string(), Ty::Int)];
    let add = Term::call("Add", vec![Term::input("x"), Term::input("y")]);
    let mul = Term::call("Multiply", vec![Term::input("y"), Term::input("x")]);
    let sol = |task: &str, p: Term| Solution {
        task: task.into(),
        inputs: x.clone(),
        program: p,
    };
    corpora.push(vec![
        sol("a", add.clone()),
        sol("b", add.clone()),
        sol("c", add.clone()),
    ]);
    corpora.push(vec![
        sol("a", Term::call("Add", vec![add.clone(), mul.clone()])),
        sol("b", mul.clone()),
    ]);
    let big = Term::call("Multiply", vec![add.clone(), add.clone()]);
    corpora.push(vec![
        sol("only", big.clone()),
        sol("only", Term::call("Add", vec![big.clone(), big])),
    ]);
    let mut single = 0;
    let mut trivial = 0;
    while single < 40 || trivial < 40 {
        let mut c = common::random_corpus(&mut rng, &gen, &[Ty::Int, Ty::IntList], 7);
        if single < 40 {
            for s in &mut c {
                s.task = "only".into();
            }
            corpora.push(c);
            single += 1;
        } else {
            for (i, s) in c.iter_mut().enumerate() {
                s.task = format!("t{i}");
            }
            if adversarial(&c) {
                corpora.push(c);
                trivial += 1;
            }
        }
    }
    let accepted: Vec<usize> = corpora
        .iter()
        .enumerate()
        .filter(|(_, c)| !mine(c, &lib, &MiningConfig::default(), 1).mined.is_empty())
        .map(|(i, _)| i)
        .collect();
    within(
        start,
        f64::INFINITY,
        check(
            accepted.is_empty(),
            format!(
                "{} adversarial corpora, 0 abstractions accepted",
                corpora.len()
            ),
            format!("abstractions accepted on corpora {accepted:?}"),
        ),
    )
}

fn sampler_exhaustion() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut sizes = Vec::new();
    for _ in 0..40 {
        let positions = rng.gen_range(1..=3);
        let dists: Vec<Vec<f64>> = (0..positions)
            .map(|_| {
                let w = rng.gen_range(1..=10);
                let raw: Vec<f64> = (0..w)
                    .map(|_| {
                        if rng.gen_bool(0.15) {
                            0.0
                        } else {
                            rng.gen_range(0.01..1.0)
                        }
                    })
                    .collect();
                let total: f64 = raw.iter().sum();
                if total == 0.0 {
                    vec![1.0 / w as f64; w]
                } else {
                    raw.iter().map(|v| v / total).collect()
                }
            })
            .collect();
        let k: usize = dists
            .iter()
            .map(|d| d.iter().filter(|p| **p > 0.0).count())
            .product();
        assert!(k <= 1000);
        let mut s = UniqueSampler::new(&dists);
        let mut seen = BTreeSet::new();
        while let Some(t) = s.sample(&mut rng) {
            if !seen.insert(t) {
                return Err("a tuple was drawn twice".into());
            }
        }
        if seen.len() != k || !s.is_exhausted() {
            return Err(format!("support {k}, drew {}", seen.len()));
        }
        sizes.push(k);
    }
    let dists = vec![
        vec![0.45, 0.3, 0.15, 0.1],
        vec![0.2, 0.5, 0.3],
        vec![0.6, 0.4],
    ];
    let n = 10_000;
    let mut counts = std::collections::HashMap::<Vec<usize>, f64>::new();
    for _ in 0..n {
        let mut s = UniqueSampler::new(&dists);
        *counts.entry(s.sample(&mut rng).unwrap()).or_default() += 1.0;
    }
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (i, a) in dists[0].iter().enumerate() {
        for (j, b) in dists[1].iter().enumerate() {
            for (k, c) in dists[2].iter().enumerate() {
                let e = a * b * c * n as f64;
                let o = counts.get(&vec![i, j, k]).copied().unwrap_or(0.0);
                chi2 += (o - e).powi(2) / e;
                cells += 1;
            }
        }
    }
    let p = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(chi2);
    within(
        start,
        60.0,
        check(
            p > 0.01,
            format!(
                "40 supports up to {} exhausted exactly; chi2 {chi2:.2} over {cells} cells, p {p:.3}",
                sizes.iter().max().unwrap()
            ),
            format!("chi2 {chi2:.2}, p {p:.4}"),
        ),
    )
}

fn statistics() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let r = t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let r2 = t_test(&[3.1, 2.7, 4.4], &[1.0, 1.5, 0.7, 2.2]).unwrap();
    let ci = ci95(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let same = t_test(&[0.5, 0.5, 0.5], &[0.5, 0.5, 0.5]).unwrap();
    let same_ci = ci95(&[0.5, 0.5, 0.5]).unwrap();
    check(
        close(r.t, -1.0)
            && close(r.p, 0.34659350708733416)
            && close(r2.t, 3.5427419336106416)
            && close(r2.p, 0.016514362376427952)
            && close(ci, 1.9632431614775607)
            && same.t == 0.0
            && same.p == 1.0
            && same_ci == 0.0,
        format!(
            "t {:.6} p {:.6}, ci95 {ci:.6}; identical samples t 0 p 1 ci 0",
            r.t, r.p
        ),
        format!(
            "t {} p {} ci {ci}; identical t {} p {} ci {same_ci}",
            r.t, r.p, same.t, same.p
        ),
    )
}

fn micro_domain() -> (Outcome, Vec<absynth::harness::IterationReport>) {
    let start = Instant::now();
    let dir = common::data_dir().join("loop_domain");
    let tasks = absynth::synthesis::load_tasks(&dir.join("tasks.txt")).unwrap();
    let mut cfg = absynth::harness::RunConfig::default();
    cfg.apply_file(&dir.join("run.conf")).unwrap();
    let out = tempfile::tempdir().unwrap();
    cfg.out_dir = out.path().to_path_buf();
    let run = match wake_sleep_loop(&tasks, &cfg) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), Vec::new()),
    };
    let s = &run.summary.solved_per_iteration;
    let (one, two) = (s[0], s[1]);
    let outcome = within(
        start,
        900.0,
        check(
            two >= one + 3,
            format!("iteration 1 solved {one}/30, iteration 2 solved {two}/30"),
            format!("iteration 1 solved {one}/30, iteration 2 solved {two}/30, need +3"),
        ),
    );
    (outcome, run.reports)
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    common::quick_experiment(&out, 30);
    let first = common::snapshot(&out);
    std::fs::remove_dir_all(&out).unwrap();
    common::quick_experiment(&out, 30);
    let second = common::snapshot(&out);
    let differing: Vec<&String> = first
        .keys()
        .filter(|k| first.get(*k) != second.get(*k))
        .collect();
    let csvs = first.keys().filter(|k| k.ends_with(".csv")).count();
    let reports = first.keys().filter(|k| k.ends_with("report.json")).count();
    within(
        start,
        f64::INFINITY,
        check(
            differing.is_empty() && first.len() == second.len() && csvs == 5 && reports > 0,
            format!(
                "{} files byte-identical ({reports} reports, {csvs} CSVs)",
                first.len()
            ),
            format!("differing files: {differing:?}"),
        ),
    )
}

fn main() {
    let mut lines = String::new();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        let (tag, msg) = match o {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        let line = format!("criterion {n} [{tag}] {name}: {msg}");
        println!("{line}");
        let _ = writeln!(lines, "{line}");
    };
    report(
        1,
        "search matches exhaustive enumeration",
        oracle_equivalence(),
    );
    report(2, "loop abstraction worked example", worked_example());
    report(3, "miner matches brute force", miner_vs_brute_force());
    let (micro, reports) = micro_domain();
    report(
        4,
        "rewrites preserve outputs",
        rewrite_preservation(&reports),
    );
    report(
        5,
        "filters reject adversarial corpora",
        filter_enforcement(),
    );
    report(
        6,
        "unique sampler exhaustion and distribution",
        sampler_exhaustion(),
    );
    report(7, "wake-sleep improves on the micro-domain", micro);
    report(8, "statistics match reference values", statistics());
    report(9, "full runs are byte-identical", determinism());
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
