//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use ra_core::consistency::{check_ra, Axiom};
use ra_core::corpus::{random_program, CorpusParams};
use ra_core::decider::{bounded_reach, enumerate_graphs, naive_reach, SearchConfig};
use ra_core::graph::reaches;
use ra_core::model::{parse_program, Op, Program};
use ra_core::pcp::{
    apply_mutation, check_monotonicity, check_no_skipping, compile_pcp, index_breaking_mutations,
    parse_instance, pcp_witness, verify_solution,
};
use ra_core::reduction::{
    collapsible, find_collapsible, reduce, reduce_fixpoint, small_model_bound_params,
    CollapsiblePair,
};
use ra_core::trace::{canonical_trace, ContextBudget};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn program(text: &str) -> Program {
    parse_program(text).expect("litmus programs parse")
}

fn saturating(cap: usize) -> SearchConfig {
    SearchConfig::new(ContextBudget::new(cap, cap).unwrap()).with_event_cap(cap)
}

fn litmus() -> Outcome {
    let start = Instant::now();
    let head = "locs x y\nvals 0 1 2\ninit x=0 y=0\n";
    let cases: [(&str, String, bool); 6] = [
        ("MP forbidden", format!("{head}thread t1 init a final c\n a b w x 1\n b c w y 1\nthread t2 init a final c\n a b r y 1\n b c r x 0\n"), false),
        ("MP allowed", format!("{head}thread t1 init a final c\n a b w x 1\n b c w y 1\nthread t2 init a final c\n a b r y 1\n b c r x 1\n"), true),
        ("SB relaxed", format!("{head}thread t1 init a final c\n a b w x 1\n b c r y 0\nthread t2 init a final c\n a b w y 1\n b c r x 0\n"), true),
        ("CoRR inverted", format!("{head}thread t1 init a final c\n a b w x 1\n b c w x 2\nthread t2 init a final c\n a b r x 2\n b c r x 1\n"), false),
        ("CoRR in order", format!("{head}thread t1 init a final c\n a b w x 1\n b c w x 2\nthread t2 init a final c\n a b r x 1\n b c r x 2\n"), true),
        ("CoRR two writers", format!("{head}thread t1 init a final b\n a b w x 1\nthread t2 init a final b\n a b w x 2\nthread t3 init a final c\n a b r x 1\n b c r x 2\n"), true),
    ];
    let mut wrong = Vec::new();
    for (name, text, expect) in &cases {
        let p = program(text);
        let naive = naive_reach(&p, 6).is_reachable();
        let by_enum = enumerate_graphs(&p, 6)
            .iter()
            .any(|g| reaches(g, &p, &p.final_vector()).unwrap());
        if naive != *expect || by_enum != *expect {
            wrong.push(*name);
        }
    }
    let t = start.elapsed();
    outcome(
        wrong.is_empty() && t < Duration::from_secs(5),
        format!(
            "{} litmus outcomes classified, misclassified {:?}, {:.2?} (limit 5s)",
            cases.len(),
            wrong,
            t
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let n = 60;
    let mut agree = 0;
    for seed in 0..n {
        let p = random_program(seed, &CorpusParams::default());
        let naive = naive_reach(&p, 6).is_reachable();
        let bounded = bounded_reach(&p, &saturating(6)).unwrap().is_reachable();
        agree += usize::from(naive == bounded);
    }
    let t = start.elapsed();
    outcome(
        agree == n as usize && t < Duration::from_secs(60),
        format!("{agree}/{n} random programs agree, {t:.2?} (limit 60s)"),
    )
}

/// Returns (pairs checked, failures, fixpoints checked, atomicity violations).
fn reduction_sweep(params: &CorpusParams, rmw: bool) -> (usize, usize, usize, usize) {
    let (mut pairs, mut bad, mut fixpoints, mut atomicity) = (0, 0, 0, 0);
    for seed in 0..60 {
        let p = random_program(seed, params);
        let target = p.final_vector();
        for g in enumerate_graphs(&p, 5) {
            let t = canonical_trace(g).unwrap();
            let before = reaches(t.graph(), &p, &target).unwrap();
            for (c, run) in t.runs().iter().enumerate() {
                for i in 0..run.events.len() {
                    for j in i + 1..run.events.len() {
                        let (e_i, e_j) = (run.events[i], run.events[j]);
                        if !collapsible(&p, &t, e_i, e_j, rmw).unwrap() {
                            continue;
                        }
                        pairs += 1;
                        let r = reduce(
                            &p,
                            &t,
                            CollapsiblePair {
                                e_i,
                                e_j,
                                run_index: c + 1,
                            },
                            rmw,
                        )
                        .unwrap();
                        let v = check_ra(r.graph());
                        if v.axiom() == Some(Axiom::Atomicity) {
                            atomicity += 1;
                        }
                        let ok = v.is_consistent()
                            && reaches(r.graph(), &p, &target).unwrap() == before
                            && r.graph().len() < t.graph().len();
                        bad += usize::from(!ok);
                    }
                }
            }
            let (f, _) = reduce_fixpoint(&p, &t, rmw).unwrap();
            fixpoints += 1;
            let ok = find_collapsible(&p, &f, rmw).unwrap().is_none()
                && check_ra(f.graph()).is_consistent()
                && reaches(f.graph(), &p, &target).unwrap() == before;
            bad += usize::from(!ok);
        }
    }
    (pairs, bad, fixpoints, atomicity)
}

fn reduction_preservation() -> Outcome {
    let (pairs, bad, fixpoints, _) = reduction_sweep(&CorpusParams::default(), false);
    outcome(
        bad == 0 && pairs > 0,
        format!("{pairs} collapsible pairs and {fixpoints} fixpoints checked, {bad} failures"),
    )
}

fn rmw_mode() -> Outcome {
    let params = CorpusParams {
        max_rmws: 2,
        rmw_prob: 0.5,
        ..CorpusParams::default()
    };
    let (pairs, bad, _, atomicity) = reduction_sweep(&params, true);
    let mut disagree = 0;
    let n = 60;
    for seed in 0..n {
        let p = random_program(seed, &params);
        let cfg = SearchConfig::new(ContextBudget::new(6, 2).unwrap()).with_event_cap(6);
        let oracle = enumerate_graphs(&p, 6).iter().any(|g| {
            let rmws = g.events().iter().filter(|e| e.op() == Op::Rmw).count();
            rmws <= 2 && reaches(g, &p, &p.final_vector()).unwrap()
        });
        let bounded = bounded_reach(&p, &cfg).unwrap().is_reachable();
        let full = bounded_reach(&p, &saturating(6)).unwrap().is_reachable();
        disagree += usize::from(bounded != oracle || full != naive_reach(&p, 6).is_reachable());
    }
    outcome(
        bad == 0 && atomicity == 0 && disagree == 0,
        format!("{pairs} RMW-mode reductions, {atomicity} atomicity violations, {bad} failures; {disagree}/{n} decider disagreements"),
    )
}

/// Direct evaluation of `g(ℓ) = S`, `g(c) = S + (S+1)((L+1)Σ_{j>c} g(j) + k)`.
fn hand_g(c: u128, l: u128, s: u128, locs: u128, k: u128) -> u128 {
    if c == l {
        return s;
    }
    let tail: u128 = (c + 1..=l).map(|j| hand_g(j, l, s, locs, k)).sum();
    s + (s + 1) * ((locs + 1) * tail + k)
}

fn bound_recurrence() -> Outcome {
    let tuples: [(u128, u128, u128, u128); 12] = [
        (8, 1, 2, 0),
        (8, 1, 1, 0),
        (1, 1, 1, 0),
        (2, 2, 3, 0),
        (8, 2, 3, 1),
        (5, 1, 4, 2),
        (16, 3, 2, 0),
        (3, 0, 5, 0),
        (288, 2, 2, 0),
        (7, 4, 3, 3),
        (100, 2, 4, 1),
        (1, 1, 6, 0),
    ];
    let mut mismatches = Vec::new();
    for (s, locs, l, k) in tuples {
        let expect: u128 = (1..=l).map(|c| hand_g(c, l, s, locs, k)).sum();
        let got =
            small_model_bound_params(&BigUint::from(s), locs as usize, l as usize, k as usize);
        if got != BigUint::from(expect) {
            mismatches.push((s, locs, l, k));
        }
    }
    let worked = small_model_bound_params(&BigUint::from(8u32), 1, 2, 0) == BigUint::from(160u32);
    outcome(
        mismatches.is_empty() && worked,
        format!(
            "{} tuples, mismatches {:?}, S=8 nLocs=1 l=2 gives 160: {worked}",
            tuples.len(),
            mismatches
        ),
    )
}

fn pcp_completeness() -> Outcome {
    let start = Instant::now();
    let inst = parse_instance("pair a : aa\npair ab : b\n").unwrap();
    let solved = verify_solution(&inst, &[1, 2]).unwrap();
    let gp = compile_pcp(&inst);
    let shape = gp.program.threads.len() == 12 && gp.program.locs.len() == 20;
    let t = pcp_witness(&inst, &[1, 2]).unwrap();
    let g = t.graph();
    let consistent = check_ra(g).is_consistent();
    let term = reaches(g, &gp.program, &gp.program.final_vector()).unwrap();
    let noskip = check_no_skipping(g).unwrap().ok();
    let mono = check_monotonicity(g).unwrap().ok();
    let el = start.elapsed();
    outcome(
        solved && shape && consistent && term && noskip && mono && el < Duration::from_secs(10),
        format!(
            "12 threads/20 locs: {shape}, consistent: {consistent}, all-term: {term}, no-skipping: {noskip}, monotonicity: {mono}, {el:.2?} (limit 10s)"
        ),
    )
}

fn mutation_probe() -> Outcome {
    let inst = parse_instance("pair a : aa\npair ab : b\n").unwrap();
    let t = pcp_witness(&inst, &[1, 2]).unwrap();
    let muts = index_breaking_mutations(t.graph());
    let violating = muts
        .iter()
        .filter(|&&m| !check_ra(&apply_mutation(t.graph(), m).unwrap()).is_consistent())
        .count();
    outcome(
        muts.len() >= 20 && violating == muts.len(),
        format!(
            "{violating}/{} index-breaking rf rewires violate RA (need at least 20)",
            muts.len()
        ),
    )
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ra-reach");
    let witness = std::env::temp_dir().join(format!("ra-acceptance-{}.json", std::process::id()));
    let w = witness.to_str().unwrap().to_string();
    let d = |f: &str| format!("{DATA}/{f}");
    let runs: Vec<Vec<String>> = vec![
        vec![
            "--json".into(),
            "--seed".into(),
            "7".into(),
            "reach".into(),
            d("mp.txt"),
            "--contexts".into(),
            "2".into(),
            "--emit-witness".into(),
            w.clone(),
        ],
        vec![
            "--json".into(),
            "--seed".into(),
            "3".into(),
            "reach".into(),
            d("mp_forbidden.txt"),
            "--contexts".into(),
            "3".into(),
            "--jobs".into(),
            "2".into(),
        ],
        vec![
            "--json".into(),
            "enumerate".into(),
            d("mp.txt"),
            "--max-events".into(),
            "4".into(),
        ],
        vec![
            "--json".into(),
            "bound".into(),
            "--program".into(),
            d("mp.txt"),
            "--contexts".into(),
            "2".into(),
        ],
        vec![
            "--json".into(),
            "pcp".into(),
            "witness".into(),
            d("pcp_example.txt"),
            "--solution".into(),
            "1,2".into(),
        ],
        vec![
            "--json".into(),
            "pcp".into(),
            "compile".into(),
            d("pcp_example.txt"),
        ],
        vec![
            "--json".into(),
            "reduce".into(),
            w.clone(),
            "--program".into(),
            d("mp.txt"),
            "--fixpoint".into(),
        ],
        vec!["--json".into(), "check".into(), w.clone()],
    ];
    let mut differing = Vec::new();
    for args in &runs {
        let a = Command::new(bin).args(args).output().expect("binary runs");
        let b = Command::new(bin).args(args).output().expect("binary runs");
        if a.stdout != b.stdout || a.status.code() != b.status.code() || a.stdout.is_empty() {
            differing.push(args[..args.len().min(5)].join(" "));
        }
    }
    let _ = std::fs::remove_file(&witness);
    outcome(
        differing.is_empty(),
        format!(
            "{} invocations run twice, differing {:?}",
            runs.len(),
            differing
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("litmus classification", litmus),
        ("oracle equivalence", oracle_equivalence),
        ("reduction preservation", reduction_preservation),
        ("RMW mode", rmw_mode),
        ("bound recurrence", bound_recurrence),
        ("PCP completeness", pcp_completeness),
        ("mutation soundness probe", mutation_probe),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.pass);
        println!(
            "criterion {}: {} {}: {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
