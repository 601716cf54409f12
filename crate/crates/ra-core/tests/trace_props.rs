//! Trace validation against a brute-force definition.

mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ra_core::corpus::{random_program, CorpusParams};
use ra_core::decider::enumerate_graphs;
use ra_core::graph::{EventId, ExecutionGraph};
use ra_core::trace::{canonical_trace, counts, linearize_hb, make_trace, Run, Trace};

/// Partition, per-run thread and po contiguity, and hb extension, checked directly.
fn brute_valid(g: &ExecutionGraph, runs: &[Run]) -> bool {
    let order: Vec<EventId> = runs.iter().flat_map(|r| r.events.iter().copied()).collect();
    let mut non_init: Vec<EventId> = g
        .events()
        .iter()
        .filter(|e| !e.is_init())
        .map(|e| e.id)
        .collect();
    let mut sorted = order.clone();
    sorted.sort();
    non_init.sort();
    if sorted != non_init || runs.iter().any(|r| r.events.is_empty()) {
        return false;
    }
    for r in runs {
        if r.events.iter().any(|&e| g.event(e).unwrap().tid() != r.tid) {
            return false;
        }
        let seq = g.po_seq(&r.tid).unwrap();
        let start = seq.iter().position(|&e| e == r.events[0]).unwrap();
        if seq.get(start..start + r.events.len()) != Some(&r.events[..]) {
            return false;
        }
    }
    let pos: HashMap<EventId, usize> = order.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let hb = common::hb_rel(g);
    hb.iter().all(|(a, b)| match (pos.get(a), pos.get(b)) {
        (Some(x), Some(y)) => x < y,
        _ => true,
    })
}

/// Random split of a shuffled or linearised order into single-thread runs.
fn random_runs(g: &ExecutionGraph, rng: &mut ChaCha8Rng) -> Vec<Run> {
    let mut order = if rng.gen_bool(0.5) {
        linearize_hb(g).unwrap_or_default()
    } else {
        Vec::new()
    };
    if order.is_empty() {
        order = g
            .events()
            .iter()
            .filter(|e| !e.is_init())
            .map(|e| e.id)
            .collect();
        order.shuffle(rng);
    }
    let mut runs: Vec<Run> = Vec::new();
    for e in order {
        let tid = g.event(e).unwrap().tid().to_string();
        match runs.last_mut() {
            Some(r) if r.tid == tid && rng.gen_bool(0.7) => r.events.push(e),
            _ => runs.push(Run::new(tid, vec![e])),
        }
    }
    runs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn make_trace_matches_definition(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(seed, n, 0.1);
        for _ in 0..8 {
            let runs = random_runs(&g, &mut rng);
            let expect = brute_valid(&g, &runs);
            prop_assert_eq!(make_trace(g.clone(), runs).is_ok(), expect);
        }
    }

    #[test]
    fn canonical_traces_round_trip(seed in 0u64..300) {
        let p = random_program(seed, &CorpusParams::default());
        for g in enumerate_graphs(&p, 5) {
            let t = canonical_trace(g).unwrap();
            let (l, _) = counts(&t);
            prop_assert_eq!(l, t.runs().len());
            for w in t.runs().windows(2) {
                prop_assert_ne!(&w[0].tid, &w[1].tid);
            }
            let back = Trace::from_json(&t.to_json()).unwrap();
            prop_assert_eq!(back.to_json(), t.to_json());
        }
    }
}
