mod common;

use std::collections::{BTreeSet, HashMap};

use absynth::dsl::default_list_dsl;
use absynth::guidance::UniformScorer;
use absynth::synthesis::{
    exhaustive_search, run_search, search, ClockKind, SearchConfig, UniqueSampler, CONCRETE,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SIX_OPS: &[&str] = &["Add", "Map", "Filter", "IsEven", "Sum", "Reverse"];

fn virtual_clock() -> ClockKind {
    ClockKind::Virtual {
        candidates_per_second: 50_000.0,
    }
}

#[test]
fn unbounded_search_agrees_with_exhaustive_enumeration() {
    let lib = common::six_op_dsl();
    let tasks = common::random_tasks(&lib, SIX_OPS, 12, 6, 3);
    let cfg = SearchConfig {
        clock: virtual_clock(),
        ..SearchConfig::unbounded(4)
    };
    for t in &tasks {
        let (r, space) = run_search(t, &lib, &UniformScorer, &cfg);
        let ex = exhaustive_search(t, &lib, 4, f64::INFINITY, virtual_clock(), cfg.eval_limits);
        assert!(r.exhausted && ex.completed);
        assert_eq!(r.solved, ex.solution.is_some(), "{}", t.name);
        assert_eq!(
            space.signature_sets(),
            ex.space.signature_sets(),
            "{}",
            t.name
        );
    }
}

#[test]
fn stores_hold_one_entry_per_signature() {
    let lib = default_list_dsl();
    let tasks = common::random_tasks(
        &lib,
        &["Map", "Add", "Sum", "Filter", "IsOdd", "Sort"],
        6,
        6,
        9,
    );
    let cfg = SearchConfig {
        clock: virtual_clock(),
        timeout: 0.5,
        restart_interval: None,
        stop_on_solution: false,
        ..SearchConfig::default()
    };
    for t in &tasks {
        let (_, space) = run_search(t, &lib, &UniformScorer, &cfg);
        for c in &space.contexts {
            let sigs: BTreeSet<_> = c
                .store
                .entries()
                .iter()
                .map(|e| (&e.ty, &e.signature))
                .collect();
            assert_eq!(sigs.len(), c.store.len());
        }
        assert!(space.contexts[CONCRETE].store.len() > 10);
    }
}

#[test]
fn search_under_a_virtual_clock_is_reproducible() {
    let lib = default_list_dsl();
    let tasks = common::random_tasks(&lib, &["Map", "Add", "Sum", "Reverse", "Take"], 4, 7, 21);
    let cfg = SearchConfig {
        clock: virtual_clock(),
        timeout: 0.4,
        restart_interval: Some(0.2),
        seed: 5,
        ..SearchConfig::default()
    };
    for t in &tasks {
        let a = search(t, &lib, &UniformScorer, &cfg);
        let b = search(t, &lib, &UniformScorer, &cfg);
        assert_eq!(a, b);
        if let Some(p) = &a.program {
            assert!(t.is_solved_by(p, &lib, cfg.eval_limits));
        }
    }
}

#[test]
fn timeouts_and_restarts_are_honoured() {
    let lib = default_list_dsl();
    let tasks = absynth::synthesis::parse_tasks(
        "name: hard\ninputs: l:IntList\noutput: Int\nexample: l=[1,2] -> 917\nexample: l=[5] -> -33\n",
    )
    .unwrap();
    let cfg = SearchConfig {
        clock: virtual_clock(),
        timeout: 1.0,
        restart_interval: Some(0.25),
        ..SearchConfig::default()
    };
    let r = search(&tasks[0], &lib, &UniformScorer, &cfg);
    assert!(!r.solved);
    assert_eq!(r.candidates_evaluated, 50_000);
    assert_eq!(r.restarts, 3);
}

fn random_dists(rng: &mut ChaCha8Rng, positions: usize, max_width: usize) -> Vec<Vec<f64>> {
    use rand::Rng;
    (0..positions)
        .map(|_| {
            let w = rng.gen_range(1..=max_width);
            let raw: Vec<f64> = (0..w)
                .map(|_| {
                    if rng.gen_bool(0.1) {
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
                raw.iter().map(|x| x / total).collect()
            }
        })
        .collect()
}

#[test]
fn sampler_first_draw_follows_the_product_distribution() {
    let dists = vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3]];
    let n = 10_000;
    let mut counts: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..n {
        let mut s = UniqueSampler::new(&dists);
        *counts.entry(s.sample(&mut rng).unwrap()).or_default() += 1.0;
    }
    let mut chi2 = 0.0;
    for (i, a) in dists[0].iter().enumerate() {
        for (j, b) in dists[1].iter().enumerate() {
            let expected = a * b * n as f64;
            let observed = counts.get(&vec![i, j]).copied().unwrap_or(0.0);
            chi2 += (observed - expected).powi(2) / expected;
        }
    }
    let p = 1.0 - ChiSquared::new(8.0).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2} p {p}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampler_yields_each_supported_tuple_once(seed in any::<u64>(), positions in 1usize..4, width in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dists = random_dists(&mut rng, positions, width);
        let support: usize = dists.iter().map(|d| d.iter().filter(|p| **p > 0.0).count()).product();
        let mut s = UniqueSampler::new(&dists);
        prop_assert_eq!(s.support_size(), support as u128);
        let mut seen = BTreeSet::new();
        while let Some(t) = s.sample(&mut rng) {
            for (i, k) in t.iter().enumerate() {
                prop_assert!(dists[i][*k] > 0.0);
            }
            prop_assert!(seen.insert(t));
        }
        prop_assert_eq!(seen.len(), support);
        prop_assert!(s.is_exhausted());
        prop_assert!(s.sample(&mut rng).is_none());
    }
}
