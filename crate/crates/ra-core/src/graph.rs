//! Execution graphs `<E, po, rf, mo>` and the derived happens-before order.
//!
//! Events carry caller-chosen integer ids. `po` is stored as one sequence per
//! thread, `rf` as a map from reading event to writing event and `mo` as one
//! sequence per location. Init pseudo-events (thread [`INIT_TID`]) are
//! hb-before every other event and sit first in their location's `mo`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Label, Op, Program, StateVector, INIT_TID};

pub type EventId = usize;

/// An event: a unique id plus its label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub id: EventId,
    #[serde(flatten)]
    pub label: Label,
}

impl Event {
    pub fn new(id: EventId, label: Label) -> Self {
        Event { id, label }
    }

    pub fn is_init(&self) -> bool {
        self.label.tid == INIT_TID
    }

    pub fn tid(&self) -> &str {
        &self.label.tid
    }

    pub fn loc(&self) -> &str {
        &self.label.loc
    }

    pub fn op(&self) -> Op {
        self.label.op
    }

    pub fn val_r(&self) -> Option<&str> {
        self.label.val_r.as_deref()
    }

    pub fn val_w(&self) -> Option<&str> {
        self.label.val_w.as_deref()
    }
}

/// Well-formedness failures reported by [`build_graph`] and graph queries.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate event id {0}")]
    DuplicateId(EventId),
    #[error("unknown event id {0}")]
    UnknownEvent(EventId),
    #[error("malformed label on event {0}")]
    MalformedLabel(EventId),
    #[error("rf value mismatch: read {read} cannot read from write {write}")]
    ValueMismatch { read: EventId, write: EventId },
    #[error("rf location mismatch: read {read} and write {write}")]
    LocationMismatch { read: EventId, write: EventId },
    #[error("rf edge {read} <- {write} does not connect a reading event to a writing event")]
    BadRf { read: EventId, write: EventId },
    #[error("read {0} has more than one rf source")]
    DuplicateRf(EventId),
    #[error("read {0} has no rf source")]
    MissingWriter(EventId),
    #[error("mo on `{0}` is not a total order over its writing events")]
    MoNotTotal(String),
    #[error("init event of `{0}` is not mo-minimal")]
    InitNotMoMinimal(String),
    #[error("po of thread `{0}` is not a total order over its events")]
    PoNotTotal(String),
    #[error("unknown thread `{0}`")]
    UnknownThread(String),
    #[error("graph does not match the program alphabet: {0}")]
    AlphabetMismatch(String),
    #[error("invalid graph json: {0}")]
    Json(String),
}

/// Transitive closure of a relation over the graph's event positions.
#[derive(Clone, Debug)]
pub struct HbMatrix {
    ids: Vec<EventId>,
    pos: HashMap<EventId, usize>,
    succ: Vec<FixedBitSet>,
}

impl HbMatrix {
    /// True iff `(a, b)` is in the relation.
    pub fn contains(&self, a: EventId, b: EventId) -> bool {
        match (self.pos.get(&a), self.pos.get(&b)) {
            (Some(&i), Some(&j)) => self.succ[i].contains(j),
            _ => false,
        }
    }

    /// All pairs, sorted by ids.
    pub fn pairs(&self) -> BTreeSet<(EventId, EventId)> {
        let mut out = BTreeSet::new();
        for (i, row) in self.succ.iter().enumerate() {
            for j in row.ones() {
                out.insert((self.ids[i], self.ids[j]));
            }
        }
        out
    }

    /// Ids of all `b` with `(a, b)` in the relation.
    pub fn successors(&self, a: EventId) -> Vec<EventId> {
        match self.pos.get(&a) {
            Some(&i) => self.succ[i].ones().map(|j| self.ids[j]).collect(),
            None => Vec::new(),
        }
    }

    /// True iff no event is related to itself.
    pub fn is_irreflexive(&self) -> bool {
        self.succ
            .iter()
            .enumerate()
            .all(|(i, row)| !row.contains(i))
    }
}

/// An execution graph.
#[derive(Clone, Debug)]
pub struct ExecutionGraph {
    events: Vec<Event>,
    pos: HashMap<EventId, usize>,
    po: BTreeMap<String, Vec<EventId>>,
    po_index: HashMap<EventId, usize>,
    rf: BTreeMap<EventId, EventId>,
    mo: BTreeMap<String, Vec<EventId>>,
    hb_cache: OnceLock<HbMatrix>,
}

/// Builds and validates an execution graph.
///
/// `po` lists each thread's events in program order; init events take no part
/// in `po`. `rf` holds `(read, write)` pairs; `mo` holds one sequence per location.
pub fn build_graph(
    events: Vec<Event>,
    po: Vec<(String, Vec<EventId>)>,
    rf: Vec<(EventId, EventId)>,
    mo: Vec<(String, Vec<EventId>)>,
) -> Result<ExecutionGraph, GraphError> {
    let mut pos = HashMap::new();
    for (i, e) in events.iter().enumerate() {
        if pos.insert(e.id, i).is_some() {
            return Err(GraphError::DuplicateId(e.id));
        }
        if !e.label.is_well_formed() || (e.is_init() && e.op() != Op::Write) {
            return Err(GraphError::MalformedLabel(e.id));
        }
    }
    let get = |id: EventId| -> Result<&Event, GraphError> {
        pos.get(&id)
            .map(|&i| &events[i])
            .ok_or(GraphError::UnknownEvent(id))
    };

    let mut po_map: BTreeMap<String, Vec<EventId>> = BTreeMap::new();
    let mut po_index = HashMap::new();
    for (tid, seq) in po {
        if tid == INIT_TID || po_map.contains_key(&tid) {
            return Err(GraphError::PoNotTotal(tid));
        }
        for (k, &id) in seq.iter().enumerate() {
            let e = get(id)?;
            if e.tid() != tid || po_index.insert(id, k).is_some() {
                return Err(GraphError::PoNotTotal(tid));
            }
        }
        po_map.insert(tid, seq);
    }
    for e in &events {
        if !e.is_init() && !po_index.contains_key(&e.id) {
            return Err(GraphError::PoNotTotal(e.tid().to_string()));
        }
    }

    let mut rf_map = BTreeMap::new();
    for (r, w) in rf {
        let re = get(r)?;
        let we = get(w)?;
        if !re.op().reads() || !we.op().writes() {
            return Err(GraphError::BadRf { read: r, write: w });
        }
        if re.loc() != we.loc() {
            return Err(GraphError::LocationMismatch { read: r, write: w });
        }
        if re.val_r() != we.val_w() {
            return Err(GraphError::ValueMismatch { read: r, write: w });
        }
        if rf_map.insert(r, w).is_some() {
            return Err(GraphError::DuplicateRf(r));
        }
    }
    for e in &events {
        if e.op().reads() && !rf_map.contains_key(&e.id) {
            return Err(GraphError::MissingWriter(e.id));
        }
    }

    let mut mo_map: BTreeMap<String, Vec<EventId>> = BTreeMap::new();
    for (loc, seq) in mo {
        if mo_map.contains_key(&loc) {
            return Err(GraphError::MoNotTotal(loc));
        }
        let mut seen = HashSet::new();
        for &id in &seq {
            let e = get(id)?;
            if !e.op().writes() || e.loc() != loc || !seen.insert(id) {
                return Err(GraphError::MoNotTotal(loc));
            }
        }
        mo_map.insert(loc, seq);
    }
    let mut writes_per_loc: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &events {
        if e.op().writes() {
            *writes_per_loc.entry(e.loc()).or_default() += 1;
        }
    }
    for (loc, n) in &writes_per_loc {
        if mo_map.get(*loc).map(Vec::len) != Some(*n) {
            return Err(GraphError::MoNotTotal(loc.to_string()));
        }
    }
    for (loc, seq) in &mo_map {
        if seq.is_empty() && !writes_per_loc.contains_key(loc.as_str()) {
            continue;
        }
        for (k, &id) in seq.iter().enumerate() {
            if k > 0 && get(id)?.is_init() {
                return Err(GraphError::InitNotMoMinimal(loc.clone()));
            }
        }
    }

    Ok(ExecutionGraph {
        events,
        pos,
        po: po_map,
        po_index,
        rf: rf_map,
        mo: mo_map,
        hb_cache: OnceLock::new(),
    })
}

impl ExecutionGraph {
    /// All events in storage order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, id: EventId) -> Option<&Event> {
        self.pos.get(&id).map(|&i| &self.events[i])
    }

    pub fn contains(&self, id: EventId) -> bool {
        self.pos.contains_key(&id)
    }

    /// Number of events, init events included.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of events excluding init pseudo-events.
    pub fn non_init_len(&self) -> usize {
        self.events.iter().filter(|e| !e.is_init()).count()
    }

    /// Thread ids with a po entry (possibly empty), sorted.
    pub fn threads(&self) -> impl Iterator<Item = &str> {
        self.po.keys().map(String::as_str)
    }

    /// Program-order sequence of a thread.
    pub fn po_seq(&self, tid: &str) -> Option<&[EventId]> {
        self.po.get(tid).map(Vec::as_slice)
    }

    /// Position of a non-init event within its thread.
    pub fn po_index(&self, id: EventId) -> Option<usize> {
        self.po_index.get(&id).copied()
    }

    /// True iff `a` po `b` (same thread, strictly earlier).
    pub fn po_before(&self, a: EventId, b: EventId) -> bool {
        match (self.event(a), self.event(b)) {
            (Some(ea), Some(eb)) if !ea.is_init() && ea.tid() == eb.tid() => {
                self.po_index[&a] < self.po_index[&b]
            }
            _ => false,
        }
    }

    pub fn rf(&self) -> &BTreeMap<EventId, EventId> {
        &self.rf
    }

    pub fn rf_source(&self, read: EventId) -> Option<EventId> {
        self.rf.get(&read).copied()
    }

    pub fn mo(&self) -> &BTreeMap<String, Vec<EventId>> {
        &self.mo
    }

    pub fn mo_seq(&self, loc: &str) -> &[EventId] {
        self.mo.get(loc).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Position of a writing event in its location's mo.
    pub fn mo_position(&self, id: EventId) -> Option<usize> {
        let e = self.event(id)?;
        self.mo_seq(e.loc()).iter().position(|&w| w == id)
    }

    /// True iff `a` mo `b`.
    pub fn mo_before(&self, a: EventId, b: EventId) -> bool {
        match (self.event(a), self.event(b)) {
            (Some(ea), Some(eb)) if ea.loc() == eb.loc() => {
                match (self.mo_position(a), self.mo_position(b)) {
                    (Some(i), Some(j)) => i < j,
                    _ => false,
                }
            }
            _ => false,
        }
    }

    /// Init pseudo-event of a location, if present.
    pub fn init_event(&self, loc: &str) -> Option<EventId> {
        self.events
            .iter()
            .find(|e| e.is_init() && e.loc() == loc)
            .map(|e| e.id)
    }

    /// Immediate po ∪ rf edges plus init-to-everything edges.
    pub fn base_edges(&self) -> Vec<(EventId, EventId)> {
        let mut edges = Vec::new();
        for seq in self.po.values() {
            for w in seq.windows(2) {
                edges.push((w[0], w[1]));
            }
        }
        for (&r, &w) in &self.rf {
            edges.push((w, r));
        }
        for i in self.events.iter().filter(|e| e.is_init()) {
            for e in self.events.iter().filter(|e| !e.is_init()) {
                edges.push((i.id, e.id));
            }
        }
        edges
    }

    /// `hb = (po ∪ rf)+`, memoized.
    pub fn hb(&self) -> &HbMatrix {
        self.hb_cache.get_or_init(|| self.compute_hb())
    }

    fn compute_hb(&self) -> HbMatrix {
        let n = self.events.len();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in self.base_edges() {
            adj[self.pos[&a]].push(self.pos[&b]);
        }
        let mut succ = Vec::with_capacity(n);
        let mut stack = Vec::new();
        for s in 0..n {
            let mut seen = FixedBitSet::with_capacity(n);
            stack.clear();
            stack.extend(adj[s].iter().copied());
            while let Some(v) = stack.pop() {
                if seen.contains(v) {
                    continue;
                }
                seen.insert(v);
                stack.extend(adj[v].iter().copied());
            }
            succ.push(seen);
        }
        HbMatrix {
            ids: self.events.iter().map(|e| e.id).collect(),
            pos: self.pos.clone(),
            succ,
        }
    }

    /// Locations that occur in the graph, sorted.
    pub fn locs(&self) -> BTreeSet<&str> {
        self.events.iter().map(|e| e.loc()).collect()
    }

    /// Graph restricted to `keep`, with induced po, rf and mo.
    ///
    /// Fails if a kept read loses its writer.
    pub fn restrict(&self, keep: &HashSet<EventId>) -> Result<ExecutionGraph, GraphError> {
        let events: Vec<Event> = self
            .events
            .iter()
            .filter(|e| keep.contains(&e.id))
            .cloned()
            .collect();
        let po = self
            .po
            .iter()
            .map(|(t, s)| {
                (
                    t.clone(),
                    s.iter().copied().filter(|i| keep.contains(i)).collect(),
                )
            })
            .collect();
        let rf = self
            .rf
            .iter()
            .filter(|(r, w)| keep.contains(r) && keep.contains(w))
            .map(|(&r, &w)| (r, w))
            .collect();
        let mo = self
            .mo
            .iter()
            .map(|(l, s)| {
                (
                    l.clone(),
                    s.iter().copied().filter(|i| keep.contains(i)).collect(),
                )
            })
            .collect();
        build_graph(events, po, rf, mo)
    }

    /// Decomposes the graph into the components accepted by [`build_graph`].
    #[allow(clippy::type_complexity)]
    pub fn parts(
        &self,
    ) -> (
        Vec<Event>,
        Vec<(String, Vec<EventId>)>,
        Vec<(EventId, EventId)>,
        Vec<(String, Vec<EventId>)>,
    ) {
        (
            self.events.clone(),
            self.po
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            self.rf.iter().map(|(&r, &w)| (r, w)).collect(),
            self.mo
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    /// Id-independent description used for structural equality.
    pub fn canonical(&self) -> CanonicalGraph {
        let key = |id: EventId| -> EventKey {
            let e = self.event(id).expect("id from this graph");
            if e.is_init() {
                EventKey::Init(e.loc().to_string())
            } else {
                EventKey::Thread(e.tid().to_string(), self.po_index[&id])
            }
        };
        CanonicalGraph {
            inits: self
                .events
                .iter()
                .filter(|e| e.is_init())
                .map(|e| (e.loc().to_string(), e.label.clone()))
                .collect(),
            words: self
                .po
                .iter()
                .map(|(t, s)| {
                    (
                        t.clone(),
                        s.iter()
                            .map(|&i| self.event(i).unwrap().label.clone())
                            .collect(),
                    )
                })
                .collect(),
            rf: self.rf.iter().map(|(&r, &w)| (key(r), key(w))).collect(),
            mo: self
                .mo
                .iter()
                .map(|(l, s)| (l.clone(), s.iter().map(|&i| key(i)).collect()))
                .collect(),
        }
    }
}

/// Id-free name of an event: its location for init events, else thread and po position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKey {
    Init(String),
    Thread(String, usize),
}

/// Structural content of a graph, independent of event ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalGraph {
    pub inits: BTreeMap<String, Label>,
    pub words: BTreeMap<String, Vec<Label>>,
    pub rf: BTreeMap<EventKey, EventKey>,
    pub mo: BTreeMap<String, Vec<EventKey>>,
}

impl PartialEq for ExecutionGraph {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for ExecutionGraph {}

/// Labels of `t`'s events in po order.
pub fn thread_word(g: &ExecutionGraph, tid: &str) -> Result<Vec<Label>, GraphError> {
    let seq = g
        .po_seq(tid)
        .ok_or_else(|| GraphError::UnknownThread(tid.to_string()))?;
    Ok(seq
        .iter()
        .map(|&i| g.event(i).expect("po ids are events").label.clone())
        .collect())
}

/// True iff every thread's word reaches its entry of `target`.
///
/// Threads of `p` absent from the graph contribute the empty word.
pub fn reaches(g: &ExecutionGraph, p: &Program, target: &StateVector) -> Result<bool, GraphError> {
    check_alphabet(g, p)?;
    if target.0.len() != p.threads.len() {
        return Err(GraphError::AlphabetMismatch(format!(
            "target has {} entries for {} threads",
            target.0.len(),
            p.threads.len()
        )));
    }
    for (lts, &q) in p.threads.iter().zip(&target.0) {
        let word = match g.po_seq(&lts.tid) {
            Some(_) => thread_word(g, &lts.tid)?,
            None => Vec::new(),
        };
        if !lts.word_reaches(&word, q) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that threads, locations and values of `g` belong to `p`.
pub fn check_alphabet(g: &ExecutionGraph, p: &Program) -> Result<(), GraphError> {
    for t in g.threads() {
        if p.thread(t).is_none() {
            return Err(GraphError::AlphabetMismatch(format!("thread `{t}`")));
        }
    }
    for e in g.events() {
        if !p.has_loc(e.loc()) {
            return Err(GraphError::AlphabetMismatch(format!(
                "location `{}`",
                e.loc()
            )));
        }
        for v in e.val_r().into_iter().chain(e.val_w()) {
            if !p.has_val(v) {
                return Err(GraphError::AlphabetMismatch(format!("value `{v}`")));
            }
        }
        if !e.is_init() && p.thread(e.tid()).is_none() {
            return Err(GraphError::AlphabetMismatch(format!(
                "thread `{}`",
                e.tid()
            )));
        }
    }
    Ok(())
}

// ===== Incremental construction =====

/// Convenience builder assigning dense ids in insertion order.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    events: Vec<Event>,
    po: BTreeMap<String, Vec<EventId>>,
    rf: Vec<(EventId, EventId)>,
    mo: BTreeMap<String, Vec<EventId>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an init write for `loc`.
    pub fn init(&mut self, loc: &str, val: &str) -> EventId {
        let id = self.events.len();
        self.events
            .push(Event::new(id, Label::write(INIT_TID, loc, val)));
        self.mo.entry(loc.to_string()).or_default().insert(0, id);
        id
    }

    /// Appends an event to its thread's po; writes are appended to mo.
    pub fn event(&mut self, label: Label) -> EventId {
        let id = self.events.len();
        self.po.entry(label.tid.clone()).or_default().push(id);
        if label.op.writes() {
            self.mo.entry(label.loc.clone()).or_default().push(id);
        }
        self.events.push(Event::new(id, label));
        id
    }

    /// Declares a thread with no events yet.
    pub fn thread(&mut self, tid: &str) {
        self.po.entry(tid.to_string()).or_default();
    }

    pub fn rf(&mut self, read: EventId, write: EventId) -> &mut Self {
        self.rf.push((read, write));
        self
    }

    /// Replaces the mo sequence of a location.
    pub fn mo(&mut self, loc: &str, seq: Vec<EventId>) -> &mut Self {
        self.mo.insert(loc.to_string(), seq);
        self
    }

    pub fn build(&self) -> Result<ExecutionGraph, GraphError> {
        build_graph(
            self.events.clone(),
            self.po
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            self.rf.clone(),
            self.mo
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }
}

// ===== JSON and DOT =====

#[derive(Serialize, Deserialize)]
pub(crate) struct GraphJson {
    pub events: Vec<Event>,
    #[serde(default)]
    pub threads: Vec<String>,
    pub rf: Vec<(EventId, EventId)>,
    pub mo: BTreeMap<String, Vec<EventId>>,
}

impl ExecutionGraph {
    /// Events ordered so that each thread's events appear in po order.
    fn po_consistent_events(&self) -> Vec<&Event> {
        let mut next: HashMap<&str, usize> = HashMap::new();
        self.events
            .iter()
            .map(|e| {
                if e.is_init() {
                    return e;
                }
                let k = next.entry(e.tid()).or_default();
                let id = self.po[e.tid()][*k];
                *k += 1;
                self.event(id).unwrap()
            })
            .collect()
    }

    pub(crate) fn to_json_struct(&self) -> GraphJson {
        GraphJson {
            events: self.po_consistent_events().into_iter().cloned().collect(),
            threads: self.po.keys().cloned().collect(),
            rf: self.rf.iter().map(|(&r, &w)| (r, w)).collect(),
            mo: self.mo.clone(),
        }
    }

    /// JSON form: events `(id, tid, op, loc, valR, valW)`, rf pairs, mo per location.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_json_struct()).expect("graph json is serializable")
    }

    pub(crate) fn from_json_struct(gj: GraphJson) -> Result<ExecutionGraph, GraphError> {
        let mut po: BTreeMap<String, Vec<EventId>> = BTreeMap::new();
        for t in &gj.threads {
            if t != INIT_TID {
                po.entry(t.clone()).or_default();
            }
        }
        for e in &gj.events {
            if !e.is_init() {
                po.entry(e.tid().to_string()).or_default().push(e.id);
            }
        }
        build_graph(
            gj.events,
            po.into_iter().collect(),
            gj.rf,
            gj.mo.into_iter().collect(),
        )
    }

    /// Parses the JSON form produced by [`ExecutionGraph::to_json`].
    pub fn from_json(v: &serde_json::Value) -> Result<ExecutionGraph, GraphError> {
        let gj: GraphJson =
            serde_json::from_value(v.clone()).map_err(|e| GraphError::Json(e.to_string()))?;
        Self::from_json_struct(gj)
    }

    /// Graphviz rendering: po solid, rf green dashed, mo orange dotted.
    pub fn to_dot(&self) -> String {
        let mut s =
            String::from("digraph G {\n  rankdir=TB;\n  node [shape=box, fontname=monospace];\n");
        let node = |e: &Event| format!("e{}", e.id);
        let inits: Vec<&Event> = self.events.iter().filter(|e| e.is_init()).collect();
        if !inits.is_empty() {
            s.push_str("  subgraph cluster_init {\n    label=\"init\";\n");
            for e in &inits {
                let _ = writeln!(s, "    {} [label=\"{}: {}\"];", node(e), e.id, e.label);
            }
            s.push_str("  }\n");
        }
        for (i, (tid, seq)) in self.po.iter().enumerate() {
            let _ = writeln!(s, "  subgraph cluster_{i} {{\n    label=\"{tid}\";");
            for &id in seq {
                let e = self.event(id).unwrap();
                let _ = writeln!(s, "    {} [label=\"{}: {}\"];", node(e), e.id, e.label);
            }
            s.push_str("  }\n");
        }
        for seq in self.po.values() {
            for w in seq.windows(2) {
                let _ = writeln!(s, "  e{} -> e{} [color=black];", w[0], w[1]);
            }
        }
        for (&r, &w) in &self.rf {
            let _ = writeln!(
                s,
                "  e{w} -> e{r} [color=green, style=dashed, label=\"rf\", constraint=false];"
            );
        }
        for seq in self.mo.values() {
            for w in seq.windows(2) {
                let _ = writeln!(
                    s,
                    "  e{} -> e{} [color=orange, style=dotted, label=\"mo\", constraint=false];",
                    w[0], w[1]
                );
            }
        }
        s.push_str("}\n");
        s
    }
}
