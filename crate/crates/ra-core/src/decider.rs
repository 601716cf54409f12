//! Reachability deciders: a brute-force graph enumerator and a context-bounded
//! depth-first search over traces with incremental consistency pruning.

use std::collections::HashSet;
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::consistency::check_ra;
use crate::graph::{build_graph, reaches, Event, EventId, ExecutionGraph};
use crate::model::{Label, Lts, Op, Program, StateSet, INIT_TID};
use crate::reduction::small_model_bound;
use crate::trace::{canonical_trace, counts, make_trace, ContextBudget, Run, Trace};

/// Outcome of a reachability query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ReachStatus {
    Reachable,
    UnreachableWithinBound,
    Inconclusive,
}

impl ReachStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            ReachStatus::Reachable => 0,
            ReachStatus::UnreachableWithinBound => 1,
            ReachStatus::Inconclusive => 2,
        }
    }
}

/// Exploration statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Search nodes (partial traces) or enumerated candidate graphs visited.
    pub visited: u64,
    /// Candidates rejected by a consistency check.
    pub prunes: u64,
    /// Nodes skipped because an identical state was already explored.
    #[serde(rename = "memoHits")]
    pub memo_hits: u64,
    /// Largest number of non-init events seen.
    #[serde(rename = "maxEvents")]
    pub max_events: usize,
}

impl SearchStats {
    fn absorb(&mut self, o: &SearchStats) {
        self.visited += o.visited;
        self.prunes += o.prunes;
        self.memo_hits += o.memo_hits;
        self.max_events = self.max_events.max(o.max_events);
    }
}

/// Verdict with an optional witness trace.
#[derive(Clone, Debug)]
pub struct ReachVerdict {
    pub status: ReachStatus,
    pub witness: Option<Trace>,
    pub stats: SearchStats,
}

impl ReachVerdict {
    pub fn is_reachable(&self) -> bool {
        self.status == ReachStatus::Reachable
    }

    /// JSON record: status, statistics and, when reachable, the witness trace.
    pub fn to_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        m.insert("status".into(), serde_json::to_value(self.status).unwrap());
        m.insert("stats".into(), serde_json::to_value(self.stats).unwrap());
        if let Some(w) = &self.witness {
            let (l, n) = counts(w);
            m.insert("contexts".into(), l.into());
            m.insert("rmws".into(), n.into());
            m.insert("witness".into(), w.to_json());
        }
        serde_json::Value::Object(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DeciderError {
    #[error("invalid search configuration: {0}")]
    BadConfig(String),
}

/// Parameters of [`bounded_reach`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub budget: ContextBudget,
    /// Maximum number of non-init events; `None` uses the small-model bound.
    pub event_cap: Option<usize>,
    /// Branch-order seed; 0 keeps the natural order.
    pub seed: u64,
    /// Worker threads over top-level subtrees.
    pub jobs: usize,
    /// Incremental consistency pruning; when off, consistency is checked only on hits.
    pub prune: bool,
    /// Optional limit on visited nodes; reaching it yields `Inconclusive`.
    pub max_nodes: Option<u64>,
}

impl SearchConfig {
    pub fn new(budget: ContextBudget) -> Self {
        SearchConfig {
            budget,
            event_cap: None,
            seed: 0,
            jobs: 1,
            prune: true,
            max_nodes: None,
        }
    }

    pub fn with_event_cap(mut self, cap: usize) -> Self {
        self.event_cap = Some(cap);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn with_prune(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    pub fn with_max_nodes(mut self, n: u64) -> Self {
        self.max_nodes = Some(n);
        self
    }

    fn validate(&self) -> Result<(), DeciderError> {
        if self.budget.k_c == 0 {
            return Err(DeciderError::BadConfig(
                "contexts must be at least 1".into(),
            ));
        }
        if self.event_cap == Some(0) {
            return Err(DeciderError::BadConfig(
                "event cap must be at least 1".into(),
            ));
        }
        if self.jobs == 0 {
            return Err(DeciderError::BadConfig("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

// ===== Brute-force enumeration =====

/// Distinct label words of `lts` of length at most `max_len`, optionally only
/// those whose reach set contains the final state.
fn thread_words(lts: &Lts, max_len: usize, need_final: bool) -> Vec<Vec<Label>> {
    fn go(
        lts: &Lts,
        set: &StateSet,
        word: &mut Vec<Label>,
        max_len: usize,
        need_final: bool,
        out: &mut Vec<Vec<Label>>,
    ) {
        if !need_final || set.contains(&lts.final_state) {
            out.push(word.clone());
        }
        if word.len() == max_len {
            return;
        }
        for lab in enabled_labels(lts, set) {
            let next = lts.step_states(set, &lab);
            word.push(lab);
            go(lts, &next, word, max_len, need_final, out);
            word.pop();
        }
    }
    let mut out = Vec::new();
    go(
        lts,
        &StateSet::from([lts.init]),
        &mut Vec::new(),
        max_len,
        need_final,
        &mut out,
    );
    out
}

/// Distinct labels leaving a state set, in transition order.
fn enabled_labels(lts: &Lts, set: &StateSet) -> Vec<Label> {
    let mut out: Vec<Label> = Vec::new();
    for t in &lts.transitions {
        if set.contains(&t.from) && !out.iter().any(|l| l.same_access(&t.label)) {
            out.push(t.label.with_tid(&lts.tid));
        }
    }
    out
}

/// All interleavings of per-thread sequences.
fn interleavings(seqs: &[Vec<EventId>]) -> Vec<Vec<EventId>> {
    fn go(
        seqs: &[Vec<EventId>],
        idx: &mut [usize],
        cur: &mut Vec<EventId>,
        out: &mut Vec<Vec<EventId>>,
    ) {
        let mut any = false;
        for k in 0..seqs.len() {
            if idx[k] < seqs[k].len() {
                any = true;
                cur.push(seqs[k][idx[k]]);
                idx[k] += 1;
                go(seqs, idx, cur, out);
                idx[k] -= 1;
                cur.pop();
            }
        }
        if !any {
            out.push(cur.clone());
        }
    }
    let mut out = Vec::new();
    go(seqs, &mut vec![0; seqs.len()], &mut Vec::new(), &mut out);
    out
}

/// Calls `f` on every RA-consistent graph of `p` with at most `max_events`
/// non-init events; with `need_final` only graphs reaching the final vector.
fn visit_graphs(
    p: &Program,
    max_events: usize,
    need_final: bool,
    stats: &mut SearchStats,
    f: &mut dyn FnMut(ExecutionGraph) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let words: Vec<Vec<Vec<Label>>> = p
        .threads
        .iter()
        .map(|t| thread_words(t, max_events, need_final))
        .collect();
    let mut choice = vec![0usize; p.threads.len()];
    visit_word_combos(p, &words, 0, max_events, &mut choice, stats, f)
}

fn visit_word_combos(
    p: &Program,
    words: &[Vec<Vec<Label>>],
    k: usize,
    budget: usize,
    choice: &mut Vec<usize>,
    stats: &mut SearchStats,
    f: &mut dyn FnMut(ExecutionGraph) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if k == words.len() {
        let picked: Vec<&Vec<Label>> = choice
            .iter()
            .enumerate()
            .map(|(t, &i)| &words[t][i])
            .collect();
        return visit_executions(p, &picked, stats, f);
    }
    for i in 0..words[k].len() {
        if words[k][i].len() > budget {
            continue;
        }
        choice[k] = i;
        visit_word_combos(
            p,
            words,
            k + 1,
            budget - words[k][i].len(),
            choice,
            stats,
            f,
        )?;
    }
    ControlFlow::Continue(())
}

fn visit_executions(
    p: &Program,
    words: &[&Vec<Label>],
    stats: &mut SearchStats,
    f: &mut dyn FnMut(ExecutionGraph) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let mut events = Vec::new();
    for loc in &p.locs {
        events.push(Event::new(
            events.len(),
            Label::write(INIT_TID, loc, p.init_value(loc)),
        ));
    }
    let mut po = Vec::new();
    for (t, w) in words.iter().enumerate() {
        let mut seq = Vec::new();
        for lab in w.iter() {
            seq.push(events.len());
            events.push(Event::new(events.len(), lab.clone()));
        }
        po.push((p.threads[t].tid.clone(), seq));
    }
    let n_non_init = events.len() - p.locs.len();
    let thread_of = |id: EventId| po.iter().position(|(_, s)| s.contains(&id));
    let po_pos = |id: EventId| po.iter().find_map(|(_, s)| s.iter().position(|&x| x == id));

    let reads: Vec<EventId> = events
        .iter()
        .filter(|e| e.op().reads())
        .map(|e| e.id)
        .collect();
    let mut sources: Vec<Vec<EventId>> = Vec::new();
    for &r in &reads {
        let re = &events[r];
        let cands: Vec<EventId> = events
            .iter()
            .filter(|w| {
                w.id != r
                    && w.op().writes()
                    && w.loc() == re.loc()
                    && w.val_w() == re.val_r()
                    && !(thread_of(w.id).is_some()
                        && thread_of(w.id) == thread_of(r)
                        && po_pos(w.id) > po_pos(r))
            })
            .map(|w| w.id)
            .collect();
        if cands.is_empty() {
            return ControlFlow::Continue(());
        }
        sources.push(cands);
    }

    let mut mo_choices: Vec<(String, Vec<Vec<EventId>>)> = Vec::new();
    for loc in &p.locs {
        let init = events
            .iter()
            .find(|e| e.is_init() && e.loc() == loc)
            .map(|e| e.id);
        let per_thread: Vec<Vec<EventId>> = po
            .iter()
            .map(|(_, s)| {
                s.iter()
                    .copied()
                    .filter(|&i| events[i].op().writes() && events[i].loc() == loc)
                    .collect()
            })
            .collect();
        let orders = interleavings(&per_thread)
            .into_iter()
            .map(|o| init.into_iter().chain(o).collect())
            .collect();
        mo_choices.push((loc.clone(), orders));
    }

    let rf_lens: Vec<usize> = sources.iter().map(Vec::len).collect();
    let mo_lens: Vec<usize> = mo_choices.iter().map(|(_, o)| o.len()).collect();
    let mut rf_pick = vec![0usize; reads.len()];
    loop {
        let rf: Vec<(EventId, EventId)> = reads
            .iter()
            .enumerate()
            .map(|(k, &r)| (r, sources[k][rf_pick[k]]))
            .collect();
        let mut mo_pick = vec![0usize; mo_choices.len()];
        loop {
            stats.visited += 1;
            stats.max_events = stats.max_events.max(n_non_init);
            let mo = mo_choices
                .iter()
                .zip(&mo_pick)
                .map(|((l, os), &i)| (l.clone(), os[i].clone()))
                .collect();
            let g = build_graph(events.clone(), po.clone(), rf.clone(), mo)
                .expect("enumerated graphs are well formed");
            if check_ra(&g).is_consistent() {
                f(g)?;
            } else {
                stats.prunes += 1;
            }
            if !advance(&mut mo_pick, &mo_lens) {
                break;
            }
        }
        if !advance(&mut rf_pick, &rf_lens) {
            break;
        }
    }
    ControlFlow::Continue(())
}

/// Odometer increment; false once every combination was produced.
fn advance(pick: &mut [usize], lens: &[usize]) -> bool {
    for k in (0..pick.len()).rev() {
        pick[k] += 1;
        if pick[k] < lens[k] {
            return true;
        }
        pick[k] = 0;
    }
    false
}

/// Every RA-consistent graph of `p` with at most `max_events` non-init events.
pub fn enumerate_graphs(p: &Program, max_events: usize) -> Vec<ExecutionGraph> {
    let mut out = Vec::new();
    let mut stats = SearchStats::default();
    let _ = visit_graphs(p, max_events, false, &mut stats, &mut |g| {
        out.push(g);
        ControlFlow::Continue(())
    });
    out
}

/// Brute-force reachability of the final vector within `max_events` non-init events.
pub fn naive_reach(p: &Program, max_events: usize) -> ReachVerdict {
    let mut stats = SearchStats::default();
    let target = p.final_vector();
    let mut found = None;
    let _ = visit_graphs(p, max_events, true, &mut stats, &mut |g| {
        if reaches(&g, p, &target).unwrap_or(false) {
            found = Some(g);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    match found {
        Some(g) => ReachVerdict {
            status: ReachStatus::Reachable,
            witness: Some(canonical_trace(g).expect("consistent graphs have acyclic hb")),
            stats,
        },
        None => ReachVerdict {
            status: ReachStatus::UnreachableWithinBound,
            witness: None,
            stats,
        },
    }
}

// ===== Bounded search =====

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
struct ITrans {
    from: usize,
    label: usize,
    to: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct ILabel {
    op: Op,
    loc: usize,
    vr: usize,
    vw: usize,
}

/// Program with interned labels.
struct Interned<'a> {
    p: &'a Program,
    labels: Vec<ILabel>,
    trans: Vec<Vec<ITrans>>,
    init_vals: Vec<usize>,
}

impl<'a> Interned<'a> {
    fn new(p: &'a Program) -> Self {
        let loc = |l: &str| {
            p.locs
                .iter()
                .position(|x| x == l)
                .expect("declared location")
        };
        let val = |v: Option<&str>| {
            v.map_or(NONE, |v| {
                p.vals.iter().position(|x| x == v).expect("declared value")
            })
        };
        let mut labels: Vec<ILabel> = Vec::new();
        let mut trans = Vec::new();
        for t in &p.threads {
            let mut ts = Vec::new();
            for tr in &t.transitions {
                let il = ILabel {
                    op: tr.label.op,
                    loc: loc(&tr.label.loc),
                    vr: val(tr.label.val_r.as_deref()),
                    vw: val(tr.label.val_w.as_deref()),
                };
                let id = labels.iter().position(|l| *l == il).unwrap_or_else(|| {
                    labels.push(il);
                    labels.len() - 1
                });
                ts.push(ITrans {
                    from: tr.from,
                    label: id,
                    to: tr.to,
                });
            }
            trans.push(ts);
        }
        let init_vals = p.locs.iter().map(|l| val(Some(p.init_value(l)))).collect();
        Interned {
            p,
            labels,
            trans,
            init_vals,
        }
    }

    fn n_threads(&self) -> usize {
        self.trans.len()
    }

    fn to_label(&self, tid: &str, l: usize) -> Label {
        let il = self.labels[l];
        let loc = &self.p.locs[il.loc];
        let v = |i: usize| &self.p.vals[i];
        match il.op {
            Op::Read => Label::read(tid, loc, v(il.vr)),
            Op::Write => Label::write(tid, loc, v(il.vw)),
            Op::Rmw => Label::rmw(tid, loc, v(il.vr), v(il.vw)),
        }
    }
}

#[derive(Clone, Debug)]
struct IEvent {
    thread: usize,
    label: usize,
}

#[derive(Clone, Copy, Debug)]
enum Move {
    Open(usize),
    Append {
        label: usize,
        src: usize,
        pos: usize,
    },
}

struct Search<'a> {
    ip: &'a Interned<'a>,
    k_c: usize,
    k_rmw: usize,
    cap: usize,
    prune: bool,
    max_nodes: Option<u64>,
    rng: Option<ChaCha8Rng>,
    n_init: usize,
    events: Vec<IEvent>,
    rf: Vec<usize>,
    mo: Vec<Vec<usize>>,
    hbp: Vec<FixedBitSet>,
    po: Vec<Vec<usize>>,
    states: Vec<FixedBitSet>,
    runs: Vec<(usize, Vec<usize>)>,
    n_rmw: usize,
    memo: HashSet<Vec<u32>>,
    truncated: bool,
    out_of_nodes: bool,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn new(ip: &'a Interned<'a>, cfg: &SearchConfig, cap: usize, seed: u64) -> Self {
        let p = ip.p;
        let n_init = p.locs.len();
        let events = (0..n_init)
            .map(|_| IEvent {
                thread: NONE,
                label: NONE,
            })
            .collect();
        let states = p
            .threads
            .iter()
            .map(|t| {
                let mut b = FixedBitSet::with_capacity(t.states.len());
                b.insert(t.init);
                b
            })
            .collect();
        Search {
            ip,
            k_c: cfg.budget.k_c,
            k_rmw: cfg.budget.k_rmw,
            cap,
            prune: cfg.prune,
            max_nodes: cfg.max_nodes,
            rng: (seed != 0).then(|| ChaCha8Rng::seed_from_u64(seed)),
            n_init,
            events,
            rf: vec![NONE; n_init],
            mo: (0..n_init).map(|l| vec![l]).collect(),
            hbp: (0..n_init).map(|_| FixedBitSet::new()).collect(),
            po: vec![Vec::new(); ip.n_threads()],
            states,
            runs: Vec::new(),
            n_rmw: 0,
            memo: HashSet::new(),
            truncated: false,
            out_of_nodes: false,
            stats: SearchStats::default(),
        }
    }

    fn val_w(&self, e: usize) -> usize {
        if e < self.n_init {
            self.ip.init_vals[e]
        } else {
            self.ip.labels[self.events[e].label].vw
        }
    }

    fn is_rmw(&self, e: usize) -> bool {
        e >= self.n_init && self.ip.labels[self.events[e].label].op == Op::Rmw
    }

    fn goal(&self) -> bool {
        self.ip
            .p
            .threads
            .iter()
            .zip(&self.states)
            .all(|(t, s)| s.contains(t.final_state))
    }

    fn enabled(&self, t: usize) -> Vec<(usize, FixedBitSet)> {
        let mut out: Vec<(usize, FixedBitSet)> = Vec::new();
        let n = self.ip.p.threads[t].states.len();
        for tr in &self.ip.trans[t] {
            if !self.states[t].contains(tr.from) {
                continue;
            }
            if self.ip.labels[tr.label].op == Op::Rmw && self.n_rmw >= self.k_rmw {
                continue;
            }
            match out.iter_mut().find(|(l, _)| *l == tr.label) {
                Some((_, s)) => s.insert(tr.to),
                None => {
                    let mut s = FixedBitSet::with_capacity(n);
                    s.insert(tr.to);
                    out.push((tr.label, s));
                }
            }
        }
        out
    }

    /// hb-predecessors a new event of thread `t` reading from `src` would have.
    fn preds(&self, t: usize, src: usize) -> FixedBitSet {
        let n = self.events.len();
        let mut s = FixedBitSet::with_capacity(n + 1);
        s.insert_range(0..self.n_init);
        if let Some(&last) = self.po[t].last() {
            s.union_with(&self.hbp[last]);
            s.insert(last);
        }
        if src != NONE {
            s.union_with(&self.hbp[src]);
            s.insert(src);
        }
        s
    }

    /// Candidate appends of label `l` for thread `t`.
    fn append_moves(&mut self, t: usize, l: usize, out: &mut Vec<Move>) {
        let il = self.ip.labels[l];
        let x = il.loc;
        let srcs: Vec<usize> = if il.op.reads() {
            self.mo[x]
                .iter()
                .copied()
                .filter(|&w| self.val_w(w) == il.vr)
                .collect()
        } else {
            vec![NONE]
        };
        for src in srcs {
            let preds = self.preds(t, src);
            if self.prune && src != NONE {
                // read coherence: no write on x mo-after src may hb-precede the read
                let sp = self.mo[x].iter().position(|&w| w == src).unwrap();
                if self.mo[x][sp + 1..].iter().any(|&w| preds.contains(w)) {
                    self.stats.prunes += 1;
                    continue;
                }
            }
            if !il.op.writes() {
                out.push(Move::Append {
                    label: l,
                    src,
                    pos: NONE,
                });
                continue;
            }
            let len = self.mo[x].len();
            let positions: Vec<usize> = if il.op == Op::Rmw && self.prune {
                vec![self.mo[x].iter().position(|&w| w == src).unwrap() + 1]
            } else {
                (1..=len).collect()
            };
            for pos in positions {
                if self.prune {
                    // write coherence: hb-earlier writes on x stay mo-before
                    let ok_wc = self.mo[x][pos..].iter().all(|&w| !preds.contains(w));
                    // atomicity: never split an RMW from its source
                    let ok_at = pos == len || {
                        let next = self.mo[x][pos];
                        !(self.is_rmw(next) && self.rf[next] == self.mo[x][pos - 1])
                    };
                    if !(ok_wc && ok_at) {
                        self.stats.prunes += 1;
                        continue;
                    }
                }
                out.push(Move::Append { label: l, src, pos });
            }
        }
    }

    fn memo_key(&self) -> Vec<u32> {
        let mut canon = vec![0u32; self.events.len()];
        for (i, c) in canon.iter_mut().enumerate().take(self.n_init) {
            *c = i as u32;
        }
        let mut next = self.n_init as u32;
        for seq in &self.po {
            for &e in seq {
                canon[e] = next;
                next += 1;
            }
        }
        let active = self.runs.last().map_or(NONE, |r| r.0);
        let mut key = vec![active as u32, self.runs.len() as u32];
        for seq in &self.po {
            key.push(seq.len() as u32);
            for &e in seq {
                key.push(self.events[e].label as u32);
                key.push(if self.rf[e] == NONE {
                    u32::MAX
                } else {
                    canon[self.rf[e]]
                });
            }
        }
        for seq in &self.mo {
            key.push(u32::MAX - 1);
            key.extend(seq.iter().map(|&e| canon[e]));
        }
        key
    }

    fn moves(&mut self) -> Vec<Move> {
        let mut out = Vec::new();
        let active = self.runs.last().map(|r| r.0);
        let can_open = match self.runs.last() {
            None => true,
            Some((_, evs)) => !evs.is_empty() && self.runs.len() < self.k_c,
        };
        let appendable: Vec<usize> = match active {
            Some(t) => self.enabled(t).into_iter().map(|(l, _)| l).collect(),
            None => Vec::new(),
        };
        let openable: Vec<usize> = if can_open {
            (0..self.ip.n_threads())
                .filter(|&t| Some(t) != active && !self.enabled(t).is_empty())
                .collect()
        } else {
            Vec::new()
        };
        if self.events.len() - self.n_init >= self.cap {
            if !appendable.is_empty() || !openable.is_empty() {
                self.truncated = true;
            }
            return out;
        }
        if let Some(t) = active {
            for l in appendable {
                self.append_moves(t, l, &mut out);
            }
        }
        out.extend(openable.into_iter().map(Move::Open));
        if let Some(rng) = &mut self.rng {
            out.shuffle(rng);
        }
        out
    }

    fn apply(&mut self, m: Move) -> Option<FixedBitSet> {
        match m {
            Move::Open(t) => {
                self.runs.push((t, Vec::new()));
                None
            }
            Move::Append { label, src, pos } => {
                let t = self.runs.last().unwrap().0;
                let e = self.events.len();
                let preds = self.preds(t, src);
                let il = self.ip.labels[label];
                self.events.push(IEvent { thread: t, label });
                self.rf.push(src);
                self.hbp.push(preds);
                self.po[t].push(e);
                self.runs.last_mut().unwrap().1.push(e);
                if il.op.writes() {
                    self.mo[il.loc].insert(pos, e);
                }
                if il.op == Op::Rmw {
                    self.n_rmw += 1;
                }
                let mut next = FixedBitSet::with_capacity(self.states[t].len());
                for tr in &self.ip.trans[t] {
                    if tr.label == label && self.states[t].contains(tr.from) {
                        next.insert(tr.to);
                    }
                }
                Some(std::mem::replace(&mut self.states[t], next))
            }
        }
    }

    fn undo(&mut self, m: Move, saved: Option<FixedBitSet>) {
        match m {
            Move::Open(_) => {
                self.runs.pop();
            }
            Move::Append { label, pos, .. } => {
                let e = self.events.len() - 1;
                let t = self.events[e].thread;
                let il = self.ip.labels[label];
                if il.op.writes() {
                    self.mo[il.loc].remove(pos);
                }
                if il.op == Op::Rmw {
                    self.n_rmw -= 1;
                }
                self.events.pop();
                self.rf.pop();
                self.hbp.pop();
                self.po[t].pop();
                self.runs.last_mut().unwrap().1.pop();
                self.states[t] = saved.expect("append saves states");
            }
        }
    }

    fn dfs(&mut self) -> Option<Trace> {
        if self.max_nodes.is_some_and(|m| self.stats.visited >= m) {
            self.out_of_nodes = true;
            return None;
        }
        self.stats.visited += 1;
        self.stats.max_events = self.stats.max_events.max(self.events.len() - self.n_init);
        if self.goal() {
            if let Some(t) = self.witness() {
                return Some(t);
            }
        }
        if !self.memo.insert(self.memo_key()) {
            self.stats.memo_hits += 1;
            return None;
        }
        for m in self.moves() {
            let saved = self.apply(m);
            let r = self.dfs();
            self.undo(m, saved);
            if r.is_some() {
                return r;
            }
            if self.out_of_nodes {
                return None;
            }
        }
        None
    }

    /// Current partial trace as a validated [`Trace`]; `None` if inconsistent.
    fn witness(&self) -> Option<Trace> {
        let p = self.ip.p;
        let mut events = Vec::new();
        for (l, loc) in p.locs.iter().enumerate() {
            events.push(Event::new(
                l,
                Label::write(INIT_TID, loc, &p.vals[self.ip.init_vals[l]]),
            ));
        }
        for (e, ev) in self.events.iter().enumerate().skip(self.n_init) {
            let tid = &p.threads[ev.thread].tid;
            events.push(Event::new(e, self.ip.to_label(tid, ev.label)));
        }
        let po = p
            .threads
            .iter()
            .zip(&self.po)
            .map(|(t, s)| (t.tid.clone(), s.clone()))
            .collect();
        let rf = (self.n_init..self.events.len())
            .filter(|&e| self.rf[e] != NONE)
            .map(|e| (e, self.rf[e]))
            .collect();
        let mo = p
            .locs
            .iter()
            .zip(&self.mo)
            .map(|(l, s)| (l.clone(), s.clone()))
            .collect();
        let g = build_graph(events, po, rf, mo).expect("search graphs are well formed");
        let consistent = check_ra(&g).is_consistent();
        if self.prune {
            assert!(consistent, "pruned search produced an inconsistent graph");
        } else if !consistent {
            return None;
        }
        let runs = self
            .runs
            .iter()
            .filter(|(_, evs)| !evs.is_empty())
            .map(|(t, evs)| Run::new(p.threads[*t].tid.clone(), evs.clone()))
            .collect();
        let t = make_trace(g, runs).expect("search order extends hb");
        debug_assert!(reaches(t.graph(), p, &p.final_vector()).unwrap());
        Some(t)
    }
}

/// Context- and RMW-bounded reachability of the final vector.
pub fn bounded_reach(p: &Program, cfg: &SearchConfig) -> Result<ReachVerdict, DeciderError> {
    cfg.validate()?;
    let default_cap = small_model_bound(p, cfg.budget.k_c, cfg.budget.k_rmw)
        .to_usize()
        .unwrap_or(usize::MAX);
    let cap = cfg.event_cap.map_or(default_cap, |c| c.min(default_cap));
    let user_capped = cap < default_cap;
    let ip = Interned::new(p);

    let mut root = Search::new(&ip, cfg, cap, cfg.seed);
    let (found, stats, truncated, out_of_nodes) = if cfg.jobs <= 1 {
        let w = root.dfs();
        (w, root.stats, root.truncated, root.out_of_nodes)
    } else {
        root.stats.visited += 1;
        if root.goal() {
            let w = root.witness();
            (w, root.stats, false, false)
        } else {
            let firsts: Vec<Move> = root.moves();
            let results: Vec<(Option<Trace>, SearchStats, bool, bool)> = firsts
                .par_iter()
                .enumerate()
                .map(|(i, &m)| {
                    let seed = if cfg.seed == 0 {
                        0
                    } else {
                        cfg.seed.wrapping_add(i as u64 + 1)
                    };
                    let mut s = Search::new(&ip, cfg, cap, seed);
                    s.apply(m);
                    let w = s.dfs();
                    (w, s.stats, s.truncated, s.out_of_nodes)
                })
                .collect();
            let mut stats = root.stats;
            let mut truncated = false;
            let mut oon = false;
            let mut found = None;
            for (w, st, tr, o) in results {
                stats.absorb(&st);
                truncated |= tr;
                oon |= o;
                if found.is_none() {
                    found = w;
                }
            }
            (found, stats, truncated, oon)
        }
    };

    let status = if found.is_some() {
        ReachStatus::Reachable
    } else if out_of_nodes || (truncated && user_capped) {
        ReachStatus::Inconclusive
    } else {
        ReachStatus::UnreachableWithinBound
    };
    if let Some(w) = &found {
        assert!(cfg.budget.admits(w), "witness exceeds the context budget");
    }
    Ok(ReachVerdict {
        status,
        witness: found,
        stats,
    })
}
