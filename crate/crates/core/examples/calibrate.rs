//! Runs the wake-sleep loop on the loop-motif micro-domain and prints the
//! per-iteration solve counts used to freeze the acceptance threshold.
//!
//! cargo run --release -p absynth --example calibrate -- [iterations] [key=value ...]

use std::path::Path;

use absynth::harness::{wake_sleep_loop, RunConfig};
use absynth::synthesis::load_tasks;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/loop_domain");
    let tasks = load_tasks(&dir.join("tasks.txt")).expect("tasks");
    let mut cfg = RunConfig::default();
    cfg.apply_file(&dir.join("run.conf")).expect("run.conf");
    cfg.out_dir = std::env::temp_dir().join("absynth-calibrate");
    let _ = std::fs::remove_dir_all(&cfg.out_dir);
    for arg in std::env::args().skip(1) {
        match arg.split_once('=') {
            Some((k, v)) => cfg.set(k, v).expect("setting"),
            None => cfg.iterations = arg.parse().expect("iterations"),
        }
    }
    let start = std::time::Instant::now();
    let out = wake_sleep_loop(&tasks, &cfg).expect("loop");
    for r in &out.reports {
        let names: Vec<&str> = r
            .records
            .iter()
            .filter(|t| t.solved)
            .map(|t| t.task.as_str())
            .collect();
        println!(
            "iteration {}: solved {}/{} {:?}",
            r.iteration, r.solved, r.tasks, names
        );
        for a in &r.abstractions {
            println!(
                "  + {} {} : {} (value {}, tasks {})",
                a.name,
                a.body,
                a.signature,
                a.value,
                a.tasks.len()
            );
        }
    }
    println!("wall time {:.1}s", start.elapsed().as_secs_f64());
}
