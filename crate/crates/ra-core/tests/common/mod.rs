//! Shared generators and brute-force oracles for the property tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ra_core::consistency::{Axiom, Verdict};
use ra_core::graph::{EventId, ExecutionGraph, GraphBuilder};
use ra_core::model::{Label, Op};

pub type Rel = BTreeSet<(EventId, EventId)>;

/// A well-formed but not necessarily consistent graph with `n` non-init
/// events over locations `x`, `y`: rf sources and mo orders are uniform.
pub fn random_graph(seed: u64, n: usize, rmw_prob: f64) -> ExecutionGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locs = ["x", "y"];
    let n_threads = rng.gen_range(1..=3);
    struct Ev {
        tid: String,
        op: Op,
        loc: &'static str,
        val_w: String,
    }
    let evs: Vec<Ev> = (0..n)
        .map(|_| {
            let op = if rng.gen_bool(rmw_prob) {
                Op::Rmw
            } else if rng.gen_bool(0.5) {
                Op::Read
            } else {
                Op::Write
            };
            Ev {
                tid: format!("t{}", rng.gen_range(1..=n_threads)),
                op,
                loc: locs[rng.gen_range(0..2)],
                val_w: rng.gen_range(1..=2).to_string(),
            }
        })
        .collect();
    // Writers are identified by index into `evs`, or `None` for init.
    let mut src: Vec<Option<Option<usize>>> = Vec::new();
    for (k, e) in evs.iter().enumerate() {
        if e.op.reads() {
            let cands: Vec<Option<usize>> = std::iter::once(None)
                .chain(
                    evs.iter()
                        .enumerate()
                        .filter(|(j, w)| *j != k && w.op.writes() && w.loc == e.loc)
                        .map(|(j, _)| Some(j)),
                )
                .collect();
            src.push(Some(cands[rng.gen_range(0..cands.len())]));
        } else {
            src.push(None);
        }
    }
    let mut b = GraphBuilder::new();
    let inits: Vec<EventId> = locs.iter().map(|l| b.init(l, "0")).collect();
    let val_of = |s: Option<usize>| s.map_or("0".to_string(), |j| evs[j].val_w.clone());
    let ids: Vec<EventId> = evs
        .iter()
        .zip(&src)
        .map(|(e, s)| {
            let label = match e.op {
                Op::Read => Label::read(&e.tid, e.loc, &val_of(s.unwrap())),
                Op::Write => Label::write(&e.tid, e.loc, &e.val_w),
                Op::Rmw => Label::rmw(&e.tid, e.loc, &val_of(s.unwrap()), &e.val_w),
            };
            b.event(label)
        })
        .collect();
    for (k, s) in src.iter().enumerate() {
        if let Some(s) = s {
            let w = match s {
                Some(j) => ids[*j],
                None => inits[locs.iter().position(|l| *l == evs[k].loc).unwrap()],
            };
            b.rf(ids[k], w);
        }
    }
    for (li, l) in locs.iter().enumerate() {
        let mut ws: Vec<EventId> = evs
            .iter()
            .enumerate()
            .filter(|(_, e)| e.op.writes() && e.loc == *l)
            .map(|(j, _)| ids[j])
            .collect();
        for i in (1..ws.len()).rev() {
            ws.swap(i, rng.gen_range(0..=i));
        }
        b.mo(l, std::iter::once(inits[li]).chain(ws).collect());
    }
    b.build().expect("generator builds well-formed graphs")
}

pub fn closure(ids: &[EventId], r: &Rel) -> Rel {
    let mut c = r.clone();
    for &k in ids {
        let into: Vec<EventId> = ids
            .iter()
            .copied()
            .filter(|&a| c.contains(&(a, k)))
            .collect();
        let out: Vec<EventId> = ids
            .iter()
            .copied()
            .filter(|&b| c.contains(&(k, b)))
            .collect();
        for &a in &into {
            for &b in &out {
                c.insert((a, b));
            }
        }
    }
    c
}

pub fn po_rel(g: &ExecutionGraph) -> Rel {
    let mut r = Rel::new();
    for t in g.threads() {
        let s = g.po_seq(t).unwrap();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                r.insert((s[i], s[j]));
            }
        }
    }
    for a in g.events().iter().filter(|e| e.is_init()) {
        for b in g.events().iter().filter(|e| !e.is_init()) {
            r.insert((a.id, b.id));
        }
    }
    r
}

pub fn rf_rel(g: &ExecutionGraph) -> Rel {
    g.rf().iter().map(|(&r, &w)| (w, r)).collect()
}

pub fn mo_rel(g: &ExecutionGraph) -> Rel {
    let mut r = Rel::new();
    for s in g.mo().values() {
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                r.insert((s[i], s[j]));
            }
        }
    }
    r
}

pub fn hb_rel(g: &ExecutionGraph) -> Rel {
    let ids: Vec<EventId> = g.events().iter().map(|e| e.id).collect();
    let base: Rel = po_rel(g).union(&rf_rel(g)).copied().collect();
    closure(&ids, &base)
}

pub fn compose(a: &Rel, b: &Rel) -> Rel {
    let mut out = Rel::new();
    for &(x, y) in a {
        for &(y2, z) in b.range((y, 0)..=(y, EventId::MAX)) {
            debug_assert_eq!(y, y2);
            out.insert((x, z));
        }
    }
    out
}

pub fn inverse(a: &Rel) -> Rel {
    a.iter().map(|&(x, y)| (y, x)).collect()
}

/// Relation-algebra reference checker with the library's witness conventions.
pub fn oracle_ra(g: &ExecutionGraph) -> Verdict {
    let hb = hb_rel(g);
    let mo = mo_rel(g);
    let rf = rf_rel(g);
    let v = |axiom, witness| Verdict::Violation { axiom, witness };
    if let Some(&(e, _)) = hb.iter().find(|(a, b)| a == b) {
        return v(Axiom::IrrHb, vec![e]);
    }
    let wc: Vec<Vec<EventId>> = mo
        .iter()
        .filter(|&&(w1, w2)| hb.contains(&(w2, w1)))
        .map(|&(w1, w2)| vec![w1, w2])
        .collect();
    if let Some(w) = wc.into_iter().min() {
        return v(Axiom::WriteCoherence, w);
    }
    let rc = compose(&compose(&mo, &hb), &inverse(&rf));
    if rc.iter().any(|(a, b)| a == b) {
        let mut best: Option<Vec<EventId>> = None;
        for &(w, r) in &rf {
            for &(_, w2) in mo.range((w, 0)..=(w, EventId::MAX)) {
                if hb.contains(&(w2, r)) {
                    let c = vec![w, r, w2];
                    if best.as_ref().is_none_or(|b| c < *b) {
                        best = Some(c);
                    }
                }
            }
        }
        return v(Axiom::ReadCoherence, best.unwrap());
    }
    let at = compose(&compose(&mo, &mo), &inverse(&rf));
    if at.iter().any(|(a, b)| a == b) {
        let mut best: Option<Vec<EventId>> = None;
        for &(w, u) in &rf {
            for &(_, mid) in mo.range((w, 0)..=(w, EventId::MAX)) {
                if mo.contains(&(mid, u)) {
                    let c = vec![w, u, mid];
                    if best.as_ref().is_none_or(|b| c < *b) {
                        best = Some(c);
                    }
                }
            }
        }
        return v(Axiom::Atomicity, best.unwrap());
    }
    Verdict::Consistent
}
