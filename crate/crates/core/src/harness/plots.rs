//! Plot-data CSV files. Every file starts with a header row; floats are
//! written in shortest round-trip form.
//!
//! | file | columns |
//! |---|---|
//! | `success_per_length.csv` | `system,length,solved,trials` |
//! | `abstraction_usage.csv` | `system,length,solved,with_abstraction,fraction` |
//! | `time_curve.csv` | `system,seconds,mean_solved` |
//! | `candidate_curve.csv` | `system,candidates,mean_solved` |
//! | `significance.csv` | `system,baseline,mean,baseline_mean,t,p,df,significant,degenerate` |

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use super::driver::write_atomic;
use super::eval::{CurvePoint, ExperimentSummary};
use super::HarnessError;

pub const PLOT_FILES: [&str; 5] = [
    "success_per_length.csv",
    "abstraction_usage.csv",
    "time_curve.csv",
    "candidate_curve.csv",
    "significance.csv",
];

pub const ALPHA: f64 = 0.05;

fn curve_rows(out: &mut String, system: &str, points: &[CurvePoint]) {
    for p in points {
        let _ = writeln!(out, "{system},{:?},{:?}", p.x, p.solved);
    }
}

/// Writes the five CSV files for `summaries` into `dir` and returns their paths.
pub fn emit_plot_data(
    summaries: &[&ExperimentSummary],
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir)?;
    let mut files = [
        "system,length,solved,trials\n".to_string(),
        "system,length,solved,with_abstraction,fraction\n".to_string(),
        "system,seconds,mean_solved\n".to_string(),
        "system,candidates,mean_solved\n".to_string(),
        "system,baseline,mean,baseline_mean,t,p,df,significant,degenerate\n".to_string(),
    ];
    for s in summaries {
        let sys = &s.system;
        for r in &s.per_length {
            let _ = writeln!(
                files[0],
                "{sys},{},{},{}",
                r.length,
                r.solved,
                s.trials.len()
            );
            let _ = writeln!(
                files[1],
                "{sys},{},{},{},{:?}",
                r.length,
                r.solved,
                r.with_abstraction,
                r.abstraction_fraction()
            );
        }
        curve_rows(&mut files[2], sys, &s.time_curve);
        curve_rows(&mut files[3], sys, &s.candidate_curve);
        if let Some(c) = &s.comparison {
            let t = &c.test;
            let _ = writeln!(
                files[4],
                "{sys},{},{:?},{:?},{:?},{:?},{:?},{},{}",
                c.baseline,
                s.mean,
                c.baseline_mean,
                t.t,
                t.p,
                t.df,
                t.significant(ALPHA),
                t.degenerate
            );
        }
    }
    let mut paths = Vec::new();
    for (name, text) in PLOT_FILES.iter().zip(files) {
        let path = dir.join(name);
        write_atomic(&path, &text)?;
        paths.push(path);
    }
    Ok(paths)
}
