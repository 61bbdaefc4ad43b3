//! wasm-bindgen entry points for the browser demo. Each takes plain text and
//! returns a JSON string.

use absynth::dsl::{default_list_dsl, parse_library, render_library, DSLibrary};
use absynth::guidance::UniformScorer;
use absynth::librarian::{mine as mine_corpus, parse_corpus, render_corpus, MiningConfig};
use absynth::synthesis::{parse_tasks, search, ClockKind, SearchConfig, UniqueSampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Solved {
    task: String,
    solved: bool,
    program: Option<String>,
    candidates: u64,
}

#[derive(Serialize)]
struct Mined {
    report: String,
    library: String,
    corpus: String,
}

fn library(text: &str) -> Result<DSLibrary, String> {
    if text.trim().is_empty() {
        Ok(default_list_dsl())
    } else {
        parse_library(text).map_err(|e| e.to_string())
    }
}

/// Solves every task in `tasks` with the uniform scorer. An empty `library`
/// selects the default list DSL; `budget` is in virtual seconds at 50,000
/// candidates per second.
pub fn synthesize_json(
    tasks: &str,
    library_text: &str,
    max_weight: u32,
    budget: f64,
) -> Result<String, String> {
    let lib = library(library_text)?;
    let tasks = parse_tasks(tasks).map_err(|e| e.to_string())?;
    let cfg = SearchConfig {
        max_weight,
        timeout: budget,
        restart_interval: Some(budget / 2.0),
        clock: ClockKind::Virtual {
            candidates_per_second: 50_000.0,
        },
        ..SearchConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let out: Vec<Solved> = tasks
        .iter()
        .map(|t| {
            let r = search(t, &lib, &UniformScorer, &cfg);
            Solved {
                task: t.name.clone(),
                solved: r.solved,
                program: r.program.map(|p| absynth::lang::print(&p)),
                candidates: r.candidates_evaluated,
            }
        })
        .collect();
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Mines abstractions from a `task<TAB>program` corpus.
pub fn mine_json(tasks: &str, corpus: &str, library_text: &str) -> Result<String, String> {
    let lib = library(library_text)?;
    let tasks = parse_tasks(tasks).map_err(|e| e.to_string())?;
    let corpus = parse_corpus(corpus, &tasks, &lib).map_err(|e| e.to_string())?;
    let out = mine_corpus(&corpus, &lib, &MiningConfig::default(), 1);
    serde_json::to_string(&Mined {
        report: absynth::librarian::render_report(&out),
        library: render_library(&out.library),
        corpus: render_corpus(&out.corpus),
    })
    .map_err(|e| e.to_string())
}

/// Draws up to `count` distinct index tuples from the product of the given
/// per-position distributions (a JSON array of arrays).
pub fn sample_unique_json(dists: &str, count: usize, seed: u64) -> Result<String, String> {
    let dists: Vec<Vec<f64>> = serde_json::from_str(dists).map_err(|e| e.to_string())?;
    if dists
        .iter()
        .any(|d| d.iter().any(|p| !p.is_finite() || *p < 0.0))
    {
        return Err("probabilities must be finite and non-negative".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples = UniqueSampler::new(&dists).sample_many(count, &mut rng);
    serde_json::to_string(&tuples).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn synthesize(
    tasks: &str,
    library: &str,
    max_weight: u32,
    budget: f64,
) -> Result<String, JsValue> {
    synthesize_json(tasks, library, max_weight, budget).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mine(tasks: &str, corpus: &str, library: &str) -> Result<String, JsValue> {
    mine_json(tasks, corpus, library).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sample_unique(dists: &str, count: usize, seed: u64) -> Result<String, JsValue> {
    sample_unique_json(dists, count, seed).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TASK: &str = "name: sum_doubles\ninputs: l:IntList\noutput: Int\n\
        example: l=[1,2,3] -> 12\nexample: l=[0,5] -> 10\nexample: l=[4] -> 8\n";

    #[test]
    fn synthesize_solves_a_small_task() {
        let out: serde_json::Value =
            serde_json::from_str(&synthesize_json(TASK, "", 6, 5.0).unwrap()).unwrap();
        assert_eq!(out[0]["solved"], true, "{out}");
    }

    #[test]
    fn mine_finds_the_shared_pattern() {
        let tasks = format!("{TASK}---\n{}", TASK.replace("sum_doubles", "again"));
        let corpus = "sum_doubles\t(Sum (Map (lam (Add $0 $0)) l))\nagain\t(Sum (Map (lam (Add $0 $0)) l))\n";
        let out: serde_json::Value =
            serde_json::from_str(&mine_json(&tasks, corpus, "").unwrap()).unwrap();
        assert!(out["library"].as_str().unwrap().contains("fn_1"), "{out}");
    }

    #[test]
    fn sample_unique_returns_distinct_tuples() {
        let out: Vec<Vec<usize>> =
            serde_json::from_str(&sample_unique_json("[[0.5,0.5],[0.2,0.3,0.5]]", 10, 1).unwrap())
                .unwrap();
        assert_eq!(out.len(), 6);
        let set: std::collections::BTreeSet<_> = out.iter().collect();
        assert_eq!(set.len(), 6);
        assert!(sample_unique_json("[[-1]]", 1, 0).is_err());
    }
}
