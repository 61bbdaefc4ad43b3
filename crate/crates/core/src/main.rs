use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use absynth::dsl::{load_library, save_library, DSLibrary};
use absynth::guidance::{generate_traces, train_scorer, LinearScorer, TraceDataset, TrainConfig};
use absynth::harness::driver::{iteration_dir, verify_report};
use absynth::harness::sleep::{phase_seed, run_sleep};
use absynth::harness::wake::{run_wake, task_seed};
use absynth::harness::{
    emit_plot_data, evaluate_tasks, wake_sleep_loop, ExperimentSummary, HarnessError, LoopSummary,
    RunConfig,
};
use absynth::lang::print;
use absynth::librarian::{mine, parse_corpus, render_corpus, render_report, Solution};
use absynth::synthesis::{load_tasks, search, Task};

#[derive(Parser)]
#[command(
    name = "absynth",
    version,
    about = "Bottom-up program synthesis with library learning"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra setting, applied after the config file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory; overrides the config file and the environment.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Sources {
    /// Library file; defaults to the configured `dsl`.
    #[arg(long)]
    library: Option<PathBuf>,
    /// Scorer file; defaults to an untrained scorer.
    #[arg(long)]
    scorer: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one task and print the program with search statistics.
    Solve {
        tasks: PathBuf,
        /// Task name; defaults to the first task in the file.
        #[arg(long)]
        task: Option<String>,
        #[command(flatten)]
        sources: Sources,
    },
    /// Run one wake phase and write `wake.json` and `corpus.txt`.
    Wake {
        tasks: PathBuf,
        #[command(flatten)]
        sources: Sources,
    },
    /// Run one sleep phase on a corpus and write the next library and scorer.
    Sleep {
        tasks: PathBuf,
        corpus: PathBuf,
        #[command(flatten)]
        sources: Sources,
        /// Iteration number recorded on new abstractions.
        #[arg(long, default_value_t = 1)]
        iteration: usize,
    },
    /// Run the full wake-sleep loop, resuming from persisted iterations.
    Loop { tasks: PathBuf },
    /// Generate training traces for a library.
    TraceGen {
        #[arg(long)]
        library: Option<PathBuf>,
    },
    /// Train a scorer on a trace file.
    Train {
        traces: PathBuf,
        /// Initial scorer.
        #[arg(long)]
        scorer: Option<PathBuf>,
    },
    /// Evaluate a library and scorer over repeated trials.
    Eval {
        tasks: PathBuf,
        #[command(flatten)]
        sources: Sources,
        /// Take the library and scorer of the best iteration of a loop run.
        #[arg(long, conflicts_with_all = ["library", "scorer"])]
        run: Option<PathBuf>,
        /// Name recorded in the summary.
        #[arg(long, default_value = "absynth")]
        system: String,
        /// Baseline summary to t-test against.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Mine abstractions from a corpus and print the mining report.
    Mine {
        tasks: PathBuf,
        corpus: PathBuf,
        #[arg(long)]
        library: Option<PathBuf>,
    },
    /// Write plot-data CSVs from evaluation summaries.
    Report {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, HarnessError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    for s in &common.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.apply_env();
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn library(cfg: &RunConfig, path: Option<&Path>) -> Result<DSLibrary, HarnessError> {
    match path {
        Some(p) => Ok(load_library(p)?),
        None => Ok(cfg.dsl.load()?),
    }
}

fn scorer(path: Option<&Path>) -> Result<LinearScorer, HarnessError> {
    match path {
        Some(p) => Ok(LinearScorer::load(p)?),
        None => Ok(LinearScorer::new()),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn read_corpus(
    path: &Path,
    tasks: &[Task],
    lib: &DSLibrary,
) -> Result<Vec<Solution>, HarnessError> {
    Ok(parse_corpus(&fs::read_to_string(path)?, tasks, lib)?)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let cfg = load_config(&cli.common)?;
    let out = cfg.out_dir.clone();
    match cli.command {
        Command::Solve {
            tasks,
            task,
            sources,
        } => {
            let tasks = load_tasks(&tasks)?;
            let t = match &task {
                Some(name) => tasks
                    .iter()
                    .find(|t| &t.name == name)
                    .ok_or_else(|| HarnessError::Usage(format!("no task named `{name}`")))?,
                None => tasks
                    .first()
                    .ok_or_else(|| HarnessError::Usage("task file is empty".into()))?,
            };
            let lib = library(&cfg, sources.library.as_deref())?;
            let sc = scorer(sources.scorer.as_deref())?;
            let mut search_cfg = cfg.search.clone();
            search_cfg.seed = task_seed(cfg.seed, &t.name);
            let r = search(t, &lib, &sc, &search_cfg);
            match &r.program {
                Some(p) => println!("{}", print(p)),
                None => println!("unsolved"),
            }
            println!(
                "elapsed {:.3}s candidates {} restarts {} exhausted {}",
                r.elapsed, r.candidates_evaluated, r.restarts, r.exhausted
            );
        }
        Command::Wake { tasks, sources } => {
            let tasks = load_tasks(&tasks)?;
            let lib = library(&cfg, sources.library.as_deref())?;
            let sc = scorer(sources.scorer.as_deref())?;
            let wake = run_wake(&tasks, &lib, &sc, &cfg.search, cfg.workers);
            fs::create_dir_all(&out)?;
            write_json(&out.join("wake.json"), &wake.records(&lib))?;
            fs::write(
                out.join("corpus.txt"),
                render_corpus(&wake.solutions(&tasks)),
            )?;
            println!("solved {}/{}", wake.solved(), tasks.len());
        }
        Command::Sleep {
            tasks,
            corpus,
            sources,
            iteration,
        } => {
            let tasks = load_tasks(&tasks)?;
            let lib = library(&cfg, sources.library.as_deref())?;
            let sc = scorer(sources.scorer.as_deref())?;
            let corpus = read_corpus(&corpus, &tasks, &lib)?;
            let sleep = run_sleep(&corpus, &tasks, &lib, &sc, None, &cfg, iteration);
            fs::create_dir_all(&out)?;
            if let Some(m) = &sleep.mined {
                fs::write(out.join("mined.txt"), render_report(m))?;
            }
            sleep.traces.save(&out.join("traces.tsv"))?;
            save_library(&sleep.library, &out.join("next_library.txt"))?;
            sleep.scorer.save(&out.join("next_scorer.txt"))?;
            write_json(&out.join("training.json"), &sleep.training)?;
            for a in &sleep.abstractions {
                println!("{} {} : {}", a.name, a.body, a.signature);
            }
            println!("library version {}", sleep.library.version());
        }
        Command::Loop { tasks } => {
            let tasks = load_tasks(&tasks)?;
            let outcome = wake_sleep_loop(&tasks, &cfg)?;
            if let Some(k) = outcome.resumed_from {
                println!("resumed after iteration {k}");
            }
            for r in &outcome.reports {
                let failed = verify_report(
                    &iteration_dir(&out, r.iteration),
                    &tasks,
                    cfg.search.eval_limits,
                )?;
                if !failed.is_empty() {
                    return Err(HarnessError::Usage(format!(
                        "iteration {} has programs that fail to re-verify: {failed:?}",
                        r.iteration
                    )));
                }
                println!(
                    "iteration {}: solved {}/{}, {} new abstractions",
                    r.iteration,
                    r.solved,
                    r.tasks,
                    r.abstractions.len()
                );
            }
            println!("best iteration {}", outcome.summary.best_iteration);
        }
        Command::TraceGen { library: path } => {
            let lib = library(&cfg, path.as_deref())?;
            let mut tc = cfg.traces.clone();
            tc.seed = phase_seed(cfg.seed, 0, 1);
            let data = generate_traces(&lib, &tc);
            fs::create_dir_all(&out)?;
            data.save(&out.join("traces.tsv"))?;
            println!(
                "{} episodes, {} targets, {} steps",
                data.episodes.len(),
                data.targets.len(),
                data.steps.len()
            );
        }
        Command::Train {
            traces,
            scorer: init,
        } => {
            let data = TraceDataset::load(&traces)?;
            let init = init.map(|p| LinearScorer::load(&p)).transpose()?;
            let train = TrainConfig {
                seed: phase_seed(cfg.seed, 0, 2),
                ..cfg.training.clone()
            };
            let (sc, report) = train_scorer(&data, init.as_ref(), &train);
            fs::create_dir_all(&out)?;
            sc.save(&out.join("scorer.txt"))?;
            write_json(&out.join("training.json"), &report)?;
            println!(
                "{} updates, loss {:.4} -> {:.4}",
                report.updates, report.loss_before, report.loss_after
            );
        }
        Command::Eval {
            tasks,
            sources,
            run,
            system,
            baseline,
        } => {
            let tasks = load_tasks(&tasks)?;
            let (lib, sc) = match &run {
                Some(dir) => {
                    let summary: LoopSummary =
                        serde_json::from_str(&fs::read_to_string(dir.join("loop.json"))?)?;
                    let it = iteration_dir(dir, summary.best_iteration);
                    (
                        load_library(&it.join("library.txt"))?,
                        LinearScorer::load(&it.join("scorer.txt"))?,
                    )
                }
                None => (
                    library(&cfg, sources.library.as_deref())?,
                    scorer(sources.scorer.as_deref())?,
                ),
            };
            let mut summary = evaluate_tasks(
                &system,
                &tasks,
                &lib,
                &sc,
                cfg.trials,
                &cfg.search,
                cfg.seed,
                cfg.workers,
            );
            if let Some(b) = &baseline {
                let base: ExperimentSummary = serde_json::from_str(&fs::read_to_string(b)?)?;
                if let Some(c) = summary.compare_with(&base) {
                    println!(
                        "vs {}: t {:.4} p {:.4}{}",
                        c.baseline,
                        c.test.t,
                        c.test.p,
                        if c.test.significant(0.05) {
                            " (significant)"
                        } else {
                            ""
                        }
                    );
                }
            }
            fs::create_dir_all(&out)?;
            let path = out.join(format!("summary_{system}.json"));
            write_json(&path, &summary)?;
            match summary.ci95 {
                Some(ci) => println!(
                    "{system}: {:.1}% ± {:.1}%",
                    100.0 * summary.mean,
                    100.0 * ci
                ),
                None => println!("{system}: {:.1}%", 100.0 * summary.mean),
            }
            println!("{}", path.display());
        }
        Command::Mine {
            tasks,
            corpus,
            library: path,
        } => {
            let tasks = load_tasks(&tasks)?;
            let lib = library(&cfg, path.as_deref())?;
            let corpus = read_corpus(&corpus, &tasks, &lib)?;
            let m = mine(&corpus, &lib, &cfg.mining, 1);
            print!("{}", render_report(&m));
            fs::create_dir_all(&out)?;
            save_library(&m.library, &out.join("next_library.txt"))?;
            fs::write(out.join("rewritten_corpus.txt"), render_corpus(&m.corpus))?;
        }
        Command::Report { summaries } => {
            let mut loaded: BTreeMap<String, ExperimentSummary> = BTreeMap::new();
            for p in &summaries {
                let s: ExperimentSummary = serde_json::from_str(&fs::read_to_string(p)?)?;
                loaded.insert(s.system.clone(), s);
            }
            let refs: Vec<&ExperimentSummary> = loaded.values().collect();
            let dir = out.join("plots");
            fs::create_dir_all(&dir)?;
            for f in emit_plot_data(&refs, &dir)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
