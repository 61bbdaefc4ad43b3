mod common;

use std::fs;
use std::process::Command;

use absynth::harness::driver::{best_iteration, iteration_dir, verify_report};
use absynth::harness::{ci95, t_test, wake_sleep_loop, ExperimentSummary, RunConfig, OUT_DIR_ENV};
use absynth::lang::EvalLimits;

fn close(a: f64, b: f64) {
    assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
}

#[test]
fn t_test_and_ci_match_reference_values() {
    // Reference values from scipy.stats.ttest_ind(equal_var=True) and
    // t.ppf(0.975, n-1) * s / sqrt(n).
    let cases: [(&[f64], &[f64], f64, f64); 3] = [
        (
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[2.0, 3.0, 4.0, 5.0, 6.0],
            -1.0,
            0.34659350708733416,
        ),
        (
            &[0.536, 0.52, 0.55, 0.54, 0.53],
            &[0.502, 0.49, 0.51, 0.5, 0.505],
            5.633333333333337,
            0.0004908274623539503,
        ),
        (
            &[3.1, 2.7, 4.4],
            &[1.0, 1.5, 0.7, 2.2],
            3.5427419336106416,
            0.016514362376427952,
        ),
    ];
    for (a, b, t, p) in cases {
        let r = t_test(a, b).unwrap();
        close(r.t, t);
        close(r.p, p);
        assert!(!r.degenerate);
    }
    close(
        ci95(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(),
        1.9632431614775607,
    );
    close(
        ci95(&[0.536, 0.52, 0.55, 0.54, 0.53]).unwrap(),
        0.013893326867647927,
    );
    close(ci95(&[3.1, 2.7, 4.4]).unwrap(), 2.207949894114879);
}

#[test]
fn config_files_apply_in_order_and_reject_mistakes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(
        &path,
        "# comment\niterations = 3\nsearch.timeout = 7.5 # trailing\ndsl = lib.txt\n",
    )
    .unwrap();
    let mut cfg = RunConfig::default();
    cfg.apply_file(&path).unwrap();
    assert_eq!(cfg.iterations, 3);
    assert_eq!(cfg.search.timeout, 7.5);
    assert_eq!(
        cfg.dsl,
        absynth::harness::DslChoice::File(dir.path().join("lib.txt"))
    );
    let mut again = RunConfig::default();
    again.apply_text(&cfg.render()).unwrap();
    assert_eq!(again, cfg);
    for bad in [
        "iterations 3",
        "nonsense = 1",
        "search.timeout = fast",
        "clock = sundial",
    ] {
        assert!(RunConfig::default().apply_text(bad).is_err(), "{bad}");
    }
    let mut zero = RunConfig::default();
    zero.set("search.timeout", "0").unwrap();
    assert!(zero.validate().is_err());
}

#[test]
fn best_iteration_prefers_the_earliest_maximum() {
    assert_eq!(best_iteration(&[3, 5, 5, 4]), 2);
    assert_eq!(best_iteration(&[2]), 1);
    assert_eq!(best_iteration(&[1, 1, 1]), 1);
}

#[test]
fn interrupted_loops_resume_to_the_same_artifacts() {
    let full = tempfile::tempdir().unwrap();
    let (tasks, cfg) = common::quick_loop_config(full.path(), 8);
    let done = wake_sleep_loop(&tasks, &cfg).unwrap();
    assert_eq!(done.reports.len(), 2);
    assert!(done.resumed_from.is_none());
    for r in &done.reports {
        assert!(verify_report(
            &iteration_dir(full.path(), r.iteration),
            &tasks,
            EvalLimits::default()
        )
        .unwrap()
        .is_empty());
    }

    let part = tempfile::tempdir().unwrap();
    let mut first = cfg.clone();
    first.out_dir = part.path().to_path_buf();
    first.iterations = 1;
    wake_sleep_loop(&tasks, &first).unwrap();
    let stale = iteration_dir(part.path(), 2);
    fs::create_dir_all(&stale).unwrap();
    fs::write(stale.join("library.txt"), "left over from a killed run").unwrap();
    let mut second = first.clone();
    second.iterations = 2;
    let resumed = wake_sleep_loop(&tasks, &second).unwrap();
    assert_eq!(resumed.resumed_from, Some(1));

    let mut a = common::snapshot(full.path());
    let mut b = common::snapshot(part.path());
    a.remove("config.txt");
    b.remove("config.txt");
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (k, v) in &a {
        assert!(v == &b[k], "{k} differs");
    }
}

#[test]
fn plot_data_re_sums_to_the_summaries() {
    let dir = tempfile::tempdir().unwrap();
    common::quick_experiment(dir.path(), 8);
    let mut summaries = Vec::new();
    for s in ["absynth", "baseline"] {
        let text = fs::read_to_string(dir.path().join(format!("summary_{s}.json"))).unwrap();
        summaries.push(serde_json::from_str::<ExperimentSummary>(&text).unwrap());
    }
    let csv = fs::read_to_string(dir.path().join("plots/success_per_length.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("system,length,solved,trials"));
    for s in &summaries {
        let total: usize = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .filter(|c| c[0] == s.system)
            .map(|c| c[2].parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, s.total_solved());
        for w in s.time_curve.windows(2) {
            assert!(w[0].x < w[1].x && w[0].solved <= w[1].solved);
        }
    }
    let sig = fs::read_to_string(dir.path().join("plots/significance.csv")).unwrap();
    assert_eq!(sig.lines().count(), 2);
    assert!(sig.lines().nth(1).unwrap().starts_with("absynth,baseline,"));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_absynth"))
}

#[test]
fn cli_exit_codes_and_output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = common::data_dir();
    let tasks = data.join("list_tasks/tasks.txt");

    let bad_key = cli()
        .args(["--set", "no.such.key=1", "solve"])
        .arg(&tasks)
        .output()
        .unwrap();
    assert_eq!(bad_key.status.code(), Some(2));

    let garbage = dir.path().join("garbage.txt");
    fs::write(&garbage, "this is not a task file\n").unwrap();
    let bad_tasks = cli().arg("wake").arg(&garbage).output().unwrap();
    assert_eq!(bad_tasks.status.code(), Some(3));

    let env_out = dir.path().join("from_env");
    let ok = cli()
        .env(OUT_DIR_ENV, &env_out)
        .args([
            "--set",
            "search.timeout=0.5",
            "--set",
            "search.restart_interval=none",
            "wake",
        ])
        .arg(&tasks)
        .output()
        .unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(env_out.join("wake.json").exists() && env_out.join("corpus.txt").exists());

    let flag_out = dir.path().join("from_flag");
    let solved = cli()
        .env(OUT_DIR_ENV, &env_out)
        .arg("--out")
        .arg(&flag_out)
        .args(["mine"])
        .arg(&tasks)
        .arg(env_out.join("corpus.txt"))
        .output()
        .unwrap();
    assert_eq!(
        solved.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&solved.stderr)
    );
    assert!(flag_out.join("next_library.txt").exists());

    let one = cli()
        .args(["solve", "--task", "sort_descending"])
        .arg(&tasks)
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&one.stdout).starts_with("(Reverse (Sort l))"));
}
