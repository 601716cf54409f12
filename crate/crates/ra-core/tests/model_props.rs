//! Programs, LTS stepping and serialisation round trips.

use proptest::prelude::*;

use ra_core::corpus::{random_program, CorpusParams};
use ra_core::model::{
    parse_program, program_from_json, program_to_json, program_to_text, Label, StateSet,
};

fn params() -> CorpusParams {
    CorpusParams {
        max_rmws: 2,
        rmw_prob: 0.3,
        ..CorpusParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let p = random_program(seed, &params());
        let back = parse_program(&program_to_text(&p)).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(program_to_text(&back), program_to_text(&p));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let p = random_program(seed, &params());
        prop_assert_eq!(program_from_json(&program_to_json(&p)).unwrap(), p);
    }

    #[test]
    fn step_states_distributes_over_union(seed in any::<u64>(), a in any::<u8>(), b in any::<u8>(), pick in any::<usize>()) {
        let p = random_program(seed, &params());
        let t = &p.threads[pick % p.threads.len()];
        let n = t.states.len();
        let set = |bits: u8| -> StateSet { (0..n).filter(|i| bits >> (i % 8) & 1 == 1).collect() };
        let (sa, sb) = (set(a), set(b));
        let union: StateSet = sa.union(&sb).copied().collect();
        for tr in &t.transitions {
            let lhs = t.step_states(&union, &tr.label);
            let rhs: StateSet = t.step_states(&sa, &tr.label).union(&t.step_states(&sb, &tr.label)).copied().collect();
            prop_assert_eq!(lhs, rhs);
            // a label that no transition carries leads nowhere
            let alien = Label::write(&t.tid, "zz", "9");
            prop_assert!(t.step_states(&union, &alien).is_empty());
        }
    }

    #[test]
    fn reach_set_is_iterated_step(seed in any::<u64>(), choices in proptest::collection::vec(any::<usize>(), 0..6)) {
        let p = random_program(seed, &params());
        let t = &p.threads[0];
        let labels: Vec<Label> = choices.iter().map(|c| t.transitions[c % t.transitions.len()].label.clone()).collect();
        let mut cur: StateSet = [t.init].into_iter().collect();
        for l in &labels {
            cur = t.step_states(&cur, l);
        }
        prop_assert_eq!(t.reach_set(&labels), cur.clone());
        prop_assert_eq!(t.accepts_prefix(&labels), !cur.is_empty());
        prop_assert_eq!(t.word_reaches(&labels, t.final_state), cur.contains(&t.final_state));
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let bad = "locs x\nvals 0 1\nthread t init a final b\n a b w q 1\n";
    assert_eq!(parse_program(bad).unwrap_err().line(), 4);
    let bad = "locs x\nvals 0 1\nthread t init a final b\n a b frob x 1\n";
    assert_eq!(parse_program(bad).unwrap_err().line(), 4);
}
