//! Event summaries, collapsible pairs, the three-step trace reduction and the
//! small-model bound.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{build_graph, EventId};
use crate::model::{Op, Program, StateSet};
use crate::trace::{cid, make_trace, range_in_run, Run, Trace, TraceError};

/// `⟨Q, φ, Erf⟩` of an event.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Summary {
    /// States the thread's LTS reaches on the po prefix ending at the event.
    pub q: StateSet,
    /// Value of the latest local write per location, `None` for ⊥.
    pub phi: BTreeMap<String, Option<String>>,
    /// Locations read remotely since their latest local write.
    pub erf: BTreeSet<String>,
}

/// Two events of one run that may be collapsed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CollapsiblePair {
    #[serde(rename = "eI")]
    pub e_i: EventId,
    #[serde(rename = "eJ")]
    pub e_j: EventId,
    /// 1-based run index.
    #[serde(rename = "run")]
    pub run_index: usize,
}

/// What one application of [`reduce`] changed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    pub pair: CollapsiblePair,
    pub removed: Vec<EventId>,
    /// `(read, old writer, new writer)`.
    pub rewires: Vec<(EventId, EventId, EventId)>,
    /// `(location, lw(eI,x), lw(eJ,x))` for each transposition performed.
    #[serde(rename = "moSwaps")]
    pub mo_swaps: Vec<(String, EventId, EventId)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("event {0} is not in any run")]
    UnknownEvent(EventId),
    #[error("thread `{0}` is not part of the program")]
    UnknownThread(String),
    #[error("events {0} and {1} are not collapsible")]
    NotCollapsible(EventId, EventId),
    #[error("rewired read {read} on `{loc}` disagrees with the summary value")]
    InternalValueMismatch { read: EventId, loc: String },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl From<crate::graph::GraphError> for ReductionError {
    fn from(e: crate::graph::GraphError) -> Self {
        ReductionError::Trace(TraceError::Graph(e))
    }
}

fn counts_as_write(op: Op, rmw_mode: bool) -> bool {
    op == Op::Write || (rmw_mode && op == Op::Rmw)
}

/// Latest write of `e`'s thread on `x` at or before `e` within `e`'s run.
///
/// Without `rmw_mode` only plain writes count; with it RMWs count too.
pub fn lw(
    t: &Trace,
    e: EventId,
    x: &str,
    rmw_mode: bool,
) -> Result<Option<EventId>, ReductionError> {
    let c = cid(t, e).map_err(|_| ReductionError::UnknownEvent(e))?;
    let k = t.run_position(e).expect("event has a run");
    let g = t.graph();
    Ok(t.runs()[c - 1].events[..=k]
        .iter()
        .rev()
        .copied()
        .find(|&w| {
            let ev = g.event(w).unwrap();
            ev.loc() == x && counts_as_write(ev.op(), rmw_mode)
        }))
}

/// Summary of `e`.
pub fn summary(
    p: &Program,
    t: &Trace,
    e: EventId,
    rmw_mode: bool,
) -> Result<Summary, ReductionError> {
    let g = t.graph();
    let ev = g.event(e).ok_or(ReductionError::UnknownEvent(e))?;
    cid(t, e).map_err(|_| ReductionError::UnknownEvent(e))?;
    let lts = p
        .thread(ev.tid())
        .ok_or_else(|| ReductionError::UnknownThread(ev.tid().to_string()))?;
    let seq = g.po_seq(ev.tid()).expect("thread of an event");
    let k = g.po_index(e).expect("non-init event");
    let word: Vec<_> = seq[..=k]
        .iter()
        .map(|&i| g.event(i).unwrap().label.clone())
        .collect();
    let q = lts.reach_set(&word);
    let mut phi = BTreeMap::new();
    let mut erf = BTreeSet::new();
    for x in &p.locs {
        let w = lw(t, e, x, rmw_mode)?;
        phi.insert(
            x.clone(),
            w.map(|w| g.event(w).unwrap().val_w().unwrap().to_string()),
        );
        if let Some(w) = w {
            let remote = range_in_run(t, w, e)
                .map(|r| {
                    r.into_iter().any(|r| {
                        let re = g.event(r).unwrap();
                        re.loc() == x && re.op().reads() && g.rf_source(r) != Some(w)
                    })
                })
                .unwrap_or(false);
            if remote {
                erf.insert(x.clone());
            }
        }
    }
    Ok(Summary { q, phi, erf })
}

/// Precomputed summaries and `lw` values for every event of a trace.
struct Analysis<'a> {
    p: &'a Program,
    t: &'a Trace,
    rmw_mode: bool,
    sums: HashMap<EventId, Summary>,
}

impl<'a> Analysis<'a> {
    fn new(p: &'a Program, t: &'a Trace, rmw_mode: bool) -> Result<Self, ReductionError> {
        let mut sums = HashMap::new();
        for id in t.order() {
            sums.insert(id, summary(p, t, id, rmw_mode)?);
        }
        Ok(Analysis {
            p,
            t,
            rmw_mode,
            sums,
        })
    }

    fn collapsible(&self, e_i: EventId, e_j: EventId) -> Result<bool, ReductionError> {
        let t = self.t;
        let g = t.graph();
        let c = cid(t, e_i).map_err(|_| ReductionError::UnknownEvent(e_i))?;
        let cj = cid(t, e_j).map_err(|_| ReductionError::UnknownEvent(e_j))?;
        // (i)
        if c != cj || t.run_position(e_i) >= t.run_position(e_j) {
            return Ok(false);
        }
        // (ii)
        if self.sums[&e_i] != self.sums[&e_j] {
            return Ok(false);
        }
        // (iii)
        let range = range_in_run(t, e_i, e_j)?;
        for (&r, &w) in g.rf() {
            if range.contains(&w) && cid(t, r).ok() != Some(c) {
                return Ok(false);
            }
        }
        // (iv) and (v)
        let tid = g.event(e_i).unwrap().tid();
        let hb = g.hb();
        for x in &self.p.locs {
            let a = lw(t, e_i, x, self.rmw_mode)?;
            let b = lw(t, e_j, x, self.rmw_mode)?;
            for e in g.events().iter().filter(|e| !e.is_init() && e.tid() != tid) {
                let ha = a.is_some_and(|a| hb.contains(a, e.id));
                let hb_ = b.is_some_and(|b| hb.contains(b, e.id));
                if ha != hb_ {
                    return Ok(false);
                }
            }
            if self.rmw_mode && a != b {
                if let Some(a) = a {
                    if g.event(a).unwrap().op() != Op::Write {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// True iff `(e_i, e_j)` satisfies conditions (i)–(iv), plus (v) in RMW mode.
pub fn collapsible(
    p: &Program,
    t: &Trace,
    e_i: EventId,
    e_j: EventId,
    rmw_mode: bool,
) -> Result<bool, ReductionError> {
    Analysis::new(p, t, rmw_mode)?.collapsible(e_i, e_j)
}

/// The π-lexicographically first collapsible pair, if any.
pub fn find_collapsible(
    p: &Program,
    t: &Trace,
    rmw_mode: bool,
) -> Result<Option<CollapsiblePair>, ReductionError> {
    let a = Analysis::new(p, t, rmw_mode)?;
    for (c, run) in t.runs().iter().enumerate() {
        for (i, &e_i) in run.events.iter().enumerate() {
            for &e_j in &run.events[i + 1..] {
                if a.sums[&e_i] == a.sums[&e_j] && a.collapsible(e_i, e_j)? {
                    return Ok(Some(CollapsiblePair {
                        e_i,
                        e_j,
                        run_index: c + 1,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Collapses the pair and returns the smaller trace.
pub fn reduce(
    p: &Program,
    t: &Trace,
    pair: CollapsiblePair,
    rmw_mode: bool,
) -> Result<Trace, ReductionError> {
    reduce_logged(p, t, pair, rmw_mode).map(|(t, _)| t)
}

/// [`reduce`] together with a record of the removed events, rf rewires and mo swaps.
pub fn reduce_logged(
    p: &Program,
    t: &Trace,
    pair: CollapsiblePair,
    rmw_mode: bool,
) -> Result<(Trace, ReductionStep), ReductionError> {
    let CollapsiblePair { e_i, e_j, .. } = pair;
    if !collapsible(p, t, e_i, e_j, rmw_mode)? {
        return Err(ReductionError::NotCollapsible(e_i, e_j));
    }
    let g = t.graph();
    let sum = summary(p, t, e_i, rmw_mode)?;
    let removed = range_in_run(t, e_i, e_j)?;
    let keep: HashSet<EventId> = g
        .events()
        .iter()
        .map(|e| e.id)
        .filter(|id| !removed.contains(id))
        .collect();
    let (events, po, rf, mo) = g.parts();

    let events = events
        .into_iter()
        .filter(|e| keep.contains(&e.id))
        .collect();
    let po = po
        .into_iter()
        .map(|(tid, s)| (tid, s.into_iter().filter(|i| keep.contains(i)).collect()))
        .collect();

    let mut rewires = Vec::new();
    let mut new_rf = Vec::new();
    for (r, w) in rf {
        if !keep.contains(&r) {
            continue;
        }
        if keep.contains(&w) {
            new_rf.push((r, w));
            continue;
        }
        let re = g.event(r).unwrap();
        let x = re.loc().to_string();
        let target = lw(t, e_i, &x, rmw_mode)?;
        let expected = sum.phi.get(&x).cloned().flatten();
        match target {
            Some(nw) if expected.as_deref() == re.val_r() => {
                rewires.push((r, w, nw));
                new_rf.push((r, nw));
            }
            _ => return Err(ReductionError::InternalValueMismatch { read: r, loc: x }),
        }
    }

    let mut mo_swaps = Vec::new();
    let mut new_mo = Vec::new();
    for (x, mut seq) in mo {
        let unchanged = sum.phi.get(&x).cloned().flatten().is_none() || sum.erf.contains(&x);
        if !unchanged {
            let a = lw(t, e_i, &x, rmw_mode)?;
            let b = lw(t, e_j, &x, rmw_mode)?;
            if let (Some(a), Some(b)) = (a, b) {
                let ia = seq.iter().position(|&w| w == a).unwrap();
                let ib = seq.iter().position(|&w| w == b).unwrap();
                seq.swap(ia, ib);
                if a != b {
                    mo_swaps.push((x.clone(), a, b));
                }
            }
        }
        new_mo.push((x, seq.into_iter().filter(|i| keep.contains(i)).collect()));
    }

    let g2 = build_graph(events, po, new_rf, new_mo)?;
    let runs: Vec<Run> = t
        .runs()
        .iter()
        .map(|r| {
            Run::new(
                r.tid.clone(),
                r.events
                    .iter()
                    .copied()
                    .filter(|i| keep.contains(i))
                    .collect(),
            )
        })
        .filter(|r| !r.events.is_empty())
        .collect();
    let t2 = make_trace(g2, runs)?;
    Ok((
        t2,
        ReductionStep {
            pair,
            removed: removed.into_iter().collect(),
            rewires,
            mo_swaps,
        },
    ))
}

/// Reduces until no collapsible pair remains.
pub fn reduce_fixpoint(
    p: &Program,
    t: &Trace,
    rmw_mode: bool,
) -> Result<(Trace, Vec<ReductionStep>), ReductionError> {
    let mut cur = t.clone();
    let mut steps = Vec::new();
    while let Some(pair) = find_collapsible(p, &cur, rmw_mode)? {
        let (next, step) = reduce_logged(p, &cur, pair, rmw_mode)?;
        debug_assert!(next.graph().len() < cur.graph().len());
        steps.push(step);
        cur = next;
    }
    Ok((cur, steps))
}

// ===== Small-model bound =====

/// `2^nStates · (nVals+1)^nLocs · 2^nLocs`.
pub fn summary_space_params(n_states: usize, n_vals: usize, n_locs: usize) -> BigUint {
    let two = BigUint::from(2u32);
    two.pow(n_states as u32) * BigUint::from(n_vals + 1).pow(n_locs as u32) * two.pow(n_locs as u32)
}

/// Summary space of each thread, in program order.
pub fn summary_space_per_thread(p: &Program) -> Vec<(String, BigUint)> {
    p.threads
        .iter()
        .map(|t| {
            (
                t.tid.clone(),
                summary_space_params(t.states.len(), p.vals.len(), p.locs.len()),
            )
        })
        .collect()
}

/// Maximum summary space over the program's threads.
pub fn summary_space(p: &Program) -> BigUint {
    summary_space_per_thread(p)
        .into_iter()
        .map(|(_, s)| s)
        .max()
        .unwrap_or_else(|| summary_space_params(0, p.vals.len(), p.locs.len()))
}

/// `Σ_c g(c)` with `g(ℓ) = S` and
/// `g(c) = S + (S+1)·((nLocs+1)·Σ_{j>c} g(j) + kRmw)`.
pub fn small_model_bound_params(s: &BigUint, n_locs: usize, l: usize, k_rmw: usize) -> BigUint {
    assert!(l >= 1, "at least one context");
    let mut total = BigUint::zero();
    let mut g = s.clone();
    total += &g;
    let factor = BigUint::from(n_locs + 1);
    for _ in 1..l {
        g = s + (s + BigUint::one()) * (&factor * &total + BigUint::from(k_rmw));
        total += &g;
    }
    total
}

/// Length bound on irreducible traces with `ℓ` contexts and `kRmw` RMWs.
pub fn small_model_bound(p: &Program, l: usize, k_rmw: usize) -> BigUint {
    small_model_bound_params(&summary_space(p), p.locs.len(), l, k_rmw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::check_ra;
    use crate::graph::{reaches, GraphBuilder};
    use crate::model::{parse_program, Label};

    fn twin_program() -> Program {
        parse_program("locs x\nvals 0 1\nthread t init q final q\n q q w x 1\n").unwrap()
    }

    fn twin_trace(n: usize) -> Trace {
        let mut b = GraphBuilder::new();
        b.init("x", "0");
        let ids: Vec<_> = (0..n)
            .map(|_| b.event(Label::write("t", "x", "1")))
            .collect();
        make_trace(b.build().unwrap(), vec![Run::new("t", ids)]).unwrap()
    }

    #[test]
    fn lw_examples() {
        let p = parse_program(
            "locs x y\nvals 0 1\nthread t init a final d\n a b rmw x 0 1\n b c r x 1\n c d w y 1\n",
        )
        .unwrap();
        let mut b = GraphBuilder::new();
        b.init("x", "0");
        b.init("y", "0");
        let u = b.event(Label::rmw("t", "x", "0", "1"));
        let r = b.event(Label::read("t", "x", "1"));
        let w = b.event(Label::write("t", "y", "1"));
        b.rf(u, 0).rf(r, u);
        let t = make_trace(b.build().unwrap(), vec![Run::new("t", vec![u, r, w])]).unwrap();
        assert_eq!(lw(&t, r, "x", false).unwrap(), None);
        assert_eq!(lw(&t, r, "x", true).unwrap(), Some(u));
        assert_eq!(lw(&t, w, "y", false).unwrap(), Some(w));
        let s = summary(&p, &t, w, true).unwrap();
        assert!(s.erf.is_empty());
        assert_eq!(s.phi["x"], Some("1".into()));
        assert_eq!(
            lw(&t, 0, "x", false).unwrap_err(),
            ReductionError::UnknownEvent(0)
        );
    }

    #[test]
    fn first_write_summary() {
        let p = twin_program();
        let t = twin_trace(2);
        let s = summary(&p, &t, 1, false).unwrap();
        assert_eq!(s.q, StateSet::from([0]));
        assert_eq!(s.phi["x"], Some("1".into()));
        assert!(s.erf.is_empty());
    }

    #[test]
    fn remote_read_enters_erf() {
        let p = parse_program(
            "locs x\nvals 0 1\nthread t init a final d\n a b w x 1\n b c r x 1\n c d w x 0\n\
             thread u init a final b\n a b w x 1\n",
        )
        .unwrap();
        let build = |remote: bool| {
            let mut b = GraphBuilder::new();
            b.init("x", "0");
            let wu = b.event(Label::write("u", "x", "1"));
            let w = b.event(Label::write("t", "x", "1"));
            let r = b.event(Label::read("t", "x", "1"));
            b.rf(r, if remote { wu } else { w });
            b.mo("x", vec![0, w, wu]);
            let g = b.build().unwrap();
            make_trace(g, vec![Run::new("u", vec![wu]), Run::new("t", vec![w, r])]).unwrap()
        };
        let s = summary(&p, &build(true), 3, false).unwrap();
        assert_eq!(s.erf, BTreeSet::from(["x".to_string()]));
        let s = summary(&p, &build(false), 3, false).unwrap();
        assert!(s.erf.is_empty());
    }

    #[test]
    fn twin_write_pair_reduces() {
        let p = twin_program();
        let t = twin_trace(4);
        let pair = find_collapsible(&p, &t, false).unwrap().unwrap();
        assert_eq!((pair.e_i, pair.e_j, pair.run_index), (1, 2, 1));
        let (r, step) = reduce_logged(&p, &t, pair, false).unwrap();
        assert_eq!(step.removed, vec![2]);
        assert_eq!(r.graph().non_init_len(), 3);
        assert!(check_ra(r.graph()).is_consistent());
        let (fx, steps) = reduce_fixpoint(&p, &t, false).unwrap();
        assert_eq!(fx.graph().non_init_len(), 1);
        assert_eq!(steps.len(), 3);
        assert!(find_collapsible(&p, &fx, false).unwrap().is_none());
        assert!(reaches(fx.graph(), &p, &p.final_vector()).unwrap());
    }

    #[test]
    fn observed_write_blocks_collapse() {
        let p = parse_program(
            "locs x\nvals 0 1\nthread t init q final q\n q q w x 1\nthread u init a final b\n a b r x 1\n",
        )
        .unwrap();
        let mut b = GraphBuilder::new();
        b.init("x", "0");
        let w1 = b.event(Label::write("t", "x", "1"));
        let w2 = b.event(Label::write("t", "x", "1"));
        let r = b.event(Label::read("u", "x", "1"));
        b.rf(r, w2);
        let t = make_trace(
            b.build().unwrap(),
            vec![Run::new("t", vec![w1, w2]), Run::new("u", vec![r])],
        )
        .unwrap();
        assert!(!collapsible(&p, &t, w1, w2, false).unwrap());
        assert!(find_collapsible(&p, &t, false).unwrap().is_none());
        assert_eq!(
            reduce(
                &p,
                &t,
                CollapsiblePair {
                    e_i: w1,
                    e_j: w2,
                    run_index: 1
                },
                false
            )
            .unwrap_err(),
            ReductionError::NotCollapsible(w1, w2)
        );
    }

    #[test]
    fn rmw_source_blocks_collapse_in_rmw_mode() {
        let p = parse_program(
            "locs x y\nvals 0 1\nthread t init q final q\n q q rmw x 0 0\n q q w x 0\n q q w y 1\n",
        )
        .unwrap();
        let mut b = GraphBuilder::new();
        b.init("x", "0");
        b.init("y", "0");
        let u = b.event(Label::rmw("t", "x", "0", "0"));
        let wy1 = b.event(Label::write("t", "y", "1"));
        let wx = b.event(Label::write("t", "x", "0"));
        let wy2 = b.event(Label::write("t", "y", "1"));
        b.rf(u, 0);
        let t = make_trace(
            b.build().unwrap(),
            vec![Run::new("t", vec![u, wy1, wx, wy2])],
        )
        .unwrap();
        assert!(!collapsible(&p, &t, wy1, wy2, true).unwrap());
    }

    #[test]
    fn summary_space_examples() {
        assert_eq!(summary_space_params(1, 1, 1), BigUint::from(8u32));
        assert_eq!(summary_space_params(2, 2, 2), BigUint::from(144u32));
        assert_eq!(summary_space_params(0, 2, 1), BigUint::from(6u32));
    }

    #[test]
    fn bound_examples() {
        let s = BigUint::from(8u32);
        assert_eq!(small_model_bound_params(&s, 1, 1, 0), s);
        assert_eq!(small_model_bound_params(&s, 1, 2, 0), BigUint::from(160u32));
        assert!(small_model_bound_params(&s, 1, 3, 1) > small_model_bound_params(&s, 1, 3, 0));
    }
}
