//! The bounded decider against exhaustive enumeration.

use proptest::prelude::*;

use ra_core::consistency::check_ra;
use ra_core::corpus::{random_program, CorpusParams};
use ra_core::decider::{bounded_reach, naive_reach, ReachStatus, SearchConfig};
use ra_core::graph::reaches;
use ra_core::trace::{counts, ContextBudget};

const CAP: usize = 6;

fn saturating(cap: usize) -> SearchConfig {
    SearchConfig::new(ContextBudget::new(cap, cap).unwrap()).with_event_cap(cap)
}

fn params(rmws: usize) -> CorpusParams {
    CorpusParams {
        max_rmws: rmws,
        rmw_prob: 0.4,
        ..CorpusParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn bounded_agrees_with_naive(seed in any::<u64>(), rmws in 0usize..=2) {
        let p = random_program(seed, &params(rmws));
        let naive = naive_reach(&p, CAP);
        let bounded = bounded_reach(&p, &saturating(CAP)).unwrap();
        prop_assert_eq!(naive.is_reachable(), bounded.is_reachable());
        if let Some(w) = &bounded.witness {
            prop_assert!(check_ra(w.graph()).is_consistent());
            prop_assert!(reaches(w.graph(), &p, &p.final_vector()).unwrap());
            prop_assert!(w.graph().non_init_len() <= CAP);
        }
    }

    #[test]
    fn pruning_is_verdict_neutral(seed in any::<u64>(), k in 1usize..=3) {
        let p = random_program(seed, &params(1));
        let cfg = SearchConfig::new(ContextBudget::new(k, 1).unwrap()).with_event_cap(5);
        let a = bounded_reach(&p, &cfg).unwrap();
        let b = bounded_reach(&p, &cfg.clone().with_prune(false)).unwrap();
        prop_assert_eq!(a.is_reachable(), b.is_reachable());
    }

    #[test]
    fn seeds_and_jobs_do_not_change_verdicts(seed in any::<u64>(), order in 1u64..1000) {
        let p = random_program(seed, &params(1));
        let base = bounded_reach(&p, &saturating(5)).unwrap();
        let seeded = bounded_reach(&p, &saturating(5).with_seed(order)).unwrap();
        let par = bounded_reach(&p, &saturating(5).with_jobs(3)).unwrap();
        prop_assert_eq!(base.status, seeded.status);
        prop_assert_eq!(base.status, par.status);
    }

    #[test]
    fn witnesses_respect_the_budget(seed in any::<u64>(), k in 1usize..=3, r in 0usize..=1) {
        let p = random_program(seed, &params(2));
        let v = bounded_reach(&p, &SearchConfig::new(ContextBudget::new(k, r).unwrap()).with_event_cap(6)).unwrap();
        if let Some(w) = &v.witness {
            let (l, n) = counts(w);
            prop_assert!(l <= k && n <= r);
        }
        if v.status == ReachStatus::Reachable {
            prop_assert!(v.witness.is_some());
        }
    }

    #[test]
    fn more_contexts_never_lose_reachability(seed in any::<u64>()) {
        let p = random_program(seed, &params(0));
        let mut prev = false;
        for k in 1..=4 {
            let now = bounded_reach(&p, &SearchConfig::new(ContextBudget::new(k, 0).unwrap()).with_event_cap(5))
                .unwrap()
                .is_reachable();
            prop_assert!(!prev || now);
            prev = now;
        }
    }
}
