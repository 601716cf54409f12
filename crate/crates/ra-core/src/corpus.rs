//! Seeded random programs for differential testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Label, LtsBuilder, Program};

/// Shape limits of generated programs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusParams {
    pub max_threads: usize,
    pub max_transitions: usize,
    pub n_locs: usize,
    pub n_vals: usize,
    /// Upper bound on RMW transitions across the whole program.
    pub max_rmws: usize,
    /// Probability that a transition becomes an RMW while the budget lasts.
    pub rmw_prob: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_threads: 3,
            max_transitions: 4,
            n_locs: 2,
            n_vals: 2,
            max_rmws: 0,
            rmw_prob: 0.0,
        }
    }
}

/// A program whose threads are mostly chains `q0 → q1 → …` with occasional
/// branches and back edges; the final state of each thread is its last chain
/// state. Locations are `x`, `y`, … and values `0`, `1`, … with init `0`.
pub fn random_program(seed: u64, params: &CorpusParams) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locs: Vec<String> = (0..params.n_locs.max(1))
        .map(|i| ((b'x' + i as u8) as char).to_string())
        .collect();
    let vals: Vec<String> = (0..params.n_vals.max(1)).map(|v| v.to_string()).collect();
    let n_threads = rng.gen_range(1..=params.max_threads.max(1));
    let mut rmws_left = params.max_rmws;
    let mut threads = Vec::new();
    for t in 0..n_threads {
        let tid = format!("t{}", t + 1);
        let n_tr = rng.gen_range(1..=params.max_transitions.max(1));
        let chain = rng.gen_range(1..=n_tr);
        let mut b = LtsBuilder::new(&tid, "q0", &format!("q{chain}"));
        for k in 0..n_tr {
            let (from, to) = if k < chain {
                (k, k + 1)
            } else {
                (rng.gen_range(0..=chain), rng.gen_range(0..=chain))
            };
            let loc = &locs[rng.gen_range(0..locs.len())];
            let v = &vals[rng.gen_range(0..vals.len())];
            let label = if rmws_left > 0 && rng.gen_bool(params.rmw_prob) {
                rmws_left -= 1;
                let w = &vals[rng.gen_range(0..vals.len())];
                Label::rmw(&tid, loc, v, w)
            } else if rng.gen_bool(0.5) {
                Label::read(&tid, loc, v)
            } else {
                Label::write(&tid, loc, v)
            };
            b.add(&format!("q{from}"), label, &format!("q{to}"));
        }
        threads.push(b.build());
    }
    Program {
        threads,
        init_vals: locs.iter().map(|l| (l.clone(), "0".to_string())).collect(),
        locs,
        vals,
    }
}
