//! Traces: execution graphs together with a partition of their events into context runs.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EventId, ExecutionGraph, GraphError, GraphJson};
use crate::model::Op;

/// A context: a contiguous po segment of one thread.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Run {
    pub tid: String,
    pub events: Vec<EventId>,
}

impl Run {
    pub fn new(tid: impl Into<String>, events: Vec<EventId>) -> Self {
        Run {
            tid: tid.into(),
            events,
        }
    }
}

/// Bounds on the number of runs and of RMW events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextBudget {
    pub k_c: usize,
    pub k_rmw: usize,
}

impl ContextBudget {
    /// Fails when `k_c` is zero.
    pub fn new(k_c: usize, k_rmw: usize) -> Result<Self, TraceError> {
        if k_c == 0 {
            return Err(TraceError::BadBudget);
        }
        Ok(ContextBudget { k_c, k_rmw })
    }

    /// True iff the trace fits within the budget.
    pub fn admits(&self, t: &Trace) -> bool {
        let (l, n) = counts(t);
        l <= self.k_c && n <= self.k_rmw
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("runs do not partition the non-init events (event {0})")]
    NotPartition(EventId),
    #[error("run order inverts hb edge {from} -> {to}")]
    NotHbExtension { from: EventId, to: EventId },
    #[error("run {0} is not a contiguous po segment")]
    RunNotContiguous(usize),
    #[error("run {0} mixes events of several threads")]
    RunThreadMixed(usize),
    #[error("run {0} is empty")]
    EmptyRun(usize),
    #[error("event {0} is not in any run")]
    UnknownEvent(EventId),
    #[error("events {0} and {1} lie in different runs")]
    DifferentRuns(EventId, EventId),
    #[error("event {0} does not strictly precede event {1} in its run")]
    WrongOrder(EventId, EventId),
    #[error("context budget needs k_c >= 1")]
    BadBudget,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid trace json: {0}")]
    Json(String),
}

/// A graph with runs `π_1 … π_ℓ` whose concatenation extends hb.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    graph: ExecutionGraph,
    runs: Vec<Run>,
    cid: HashMap<EventId, (usize, usize)>,
}

/// Validates `runs` against `g` and builds the trace.
pub fn make_trace(g: ExecutionGraph, runs: Vec<Run>) -> Result<Trace, TraceError> {
    let mut cid = HashMap::new();
    for (c, run) in runs.iter().enumerate() {
        if run.events.is_empty() {
            return Err(TraceError::EmptyRun(c + 1));
        }
        for (k, &id) in run.events.iter().enumerate() {
            let e = g.event(id).ok_or(TraceError::NotPartition(id))?;
            if e.is_init() {
                return Err(TraceError::NotPartition(id));
            }
            if e.tid() != run.tid {
                return Err(TraceError::RunThreadMixed(c + 1));
            }
            if cid.insert(id, (c, k)).is_some() {
                return Err(TraceError::NotPartition(id));
            }
        }
    }
    if let Some(e) = g
        .events()
        .iter()
        .filter(|e| !e.is_init() && !cid.contains_key(&e.id))
        .map(|e| e.id)
        .min()
    {
        return Err(TraceError::NotPartition(e));
    }
    for (c, run) in runs.iter().enumerate() {
        let idx: Vec<usize> = run.events.iter().map(|&i| g.po_index(i).unwrap()).collect();
        if idx.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(TraceError::RunNotContiguous(c + 1));
        }
    }
    let pos: HashMap<EventId, usize> = runs
        .iter()
        .flat_map(|r| r.events.iter().copied())
        .enumerate()
        .map(|(p, id)| (id, p))
        .collect();
    if let Some((from, to)) = g
        .hb()
        .pairs()
        .into_iter()
        .find(|(a, b)| matches!((pos.get(a), pos.get(b)), (Some(pa), Some(pb)) if pa >= pb))
    {
        return Err(TraceError::NotHbExtension { from, to });
    }
    Ok(Trace {
        graph: g,
        runs,
        cid,
    })
}

impl Trace {
    pub fn graph(&self) -> &ExecutionGraph {
        &self.graph
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    /// The concatenation `π_1 · … · π_ℓ`.
    pub fn order(&self) -> Vec<EventId> {
        self.runs
            .iter()
            .flat_map(|r| r.events.iter().copied())
            .collect()
    }

    /// Position of an event inside its run.
    pub fn run_position(&self, e: EventId) -> Option<usize> {
        self.cid.get(&e).map(|&(_, k)| k)
    }

    pub fn into_parts(self) -> (ExecutionGraph, Vec<Run>) {
        (self.graph, self.runs)
    }

    /// JSON form: the graph plus runs as arrays of event ids.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TraceJson {
            graph: self.graph.to_json_struct(),
            runs: self.runs.iter().map(|r| r.events.clone()).collect(),
        })
        .expect("trace json is serializable")
    }

    /// Parses the JSON form; each run's thread is taken from its first event.
    pub fn from_json(v: &serde_json::Value) -> Result<Trace, TraceError> {
        let tj: TraceJson =
            serde_json::from_value(v.clone()).map_err(|e| TraceError::Json(e.to_string()))?;
        let g = ExecutionGraph::from_json_struct(tj.graph)?;
        let mut runs = Vec::new();
        for (c, ids) in tj.runs.into_iter().enumerate() {
            let first = *ids.first().ok_or(TraceError::EmptyRun(c + 1))?;
            let tid = g
                .event(first)
                .ok_or(TraceError::NotPartition(first))?
                .tid()
                .to_string();
            runs.push(Run::new(tid, ids));
        }
        make_trace(g, runs)
    }
}

#[derive(Serialize, Deserialize)]
struct TraceJson {
    graph: GraphJson,
    runs: Vec<Vec<EventId>>,
}

/// 1-based index of the run containing `e`.
pub fn cid(t: &Trace, e: EventId) -> Result<usize, TraceError> {
    t.cid
        .get(&e)
        .map(|&(c, _)| c + 1)
        .ok_or(TraceError::UnknownEvent(e))
}

/// Events of the common run strictly after `e_i` up to and including `e_j`.
pub fn range_in_run(
    t: &Trace,
    e_i: EventId,
    e_j: EventId,
) -> Result<BTreeSet<EventId>, TraceError> {
    let &(ci, ki) = t.cid.get(&e_i).ok_or(TraceError::UnknownEvent(e_i))?;
    let &(cj, kj) = t.cid.get(&e_j).ok_or(TraceError::UnknownEvent(e_j))?;
    if ci != cj {
        return Err(TraceError::DifferentRuns(e_i, e_j));
    }
    if ki >= kj {
        return Err(TraceError::WrongOrder(e_i, e_j));
    }
    Ok(t.runs[ci].events[ki + 1..=kj].iter().copied().collect())
}

/// `(ℓ, nRmw)`: number of runs and number of RMW events.
pub fn counts(t: &Trace) -> (usize, usize) {
    let n_rmw = t
        .graph
        .events()
        .iter()
        .filter(|e| e.op() == Op::Rmw)
        .count();
    (t.runs.len(), n_rmw)
}

/// Deterministic linearization of hb over non-init events (smallest id first).
///
/// Returns `None` when hb is cyclic.
pub fn linearize_hb(g: &ExecutionGraph) -> Option<Vec<EventId>> {
    let hb = g.hb();
    let ids: Vec<EventId> = g
        .events()
        .iter()
        .filter(|e| !e.is_init())
        .map(|e| e.id)
        .collect();
    let mut indeg: HashMap<EventId, usize> = ids.iter().map(|&i| (i, 0)).collect();
    for &a in &ids {
        for b in hb.successors(a) {
            if let Some(d) = indeg.get_mut(&b) {
                *d += 1;
            }
        }
    }
    let mut ready: BTreeSet<EventId> = ids.iter().copied().filter(|i| indeg[i] == 0).collect();
    let mut out = Vec::with_capacity(ids.len());
    while let Some(a) = ready.pop_first() {
        out.push(a);
        for b in hb.successors(a) {
            if let Some(d) = indeg.get_mut(&b) {
                *d -= 1;
                if *d == 0 {
                    ready.insert(b);
                }
            }
        }
    }
    (out.len() == ids.len()).then_some(out)
}

/// Splits an order of non-init events into maximal single-thread runs.
pub fn runs_from_order(g: &ExecutionGraph, order: &[EventId]) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for &id in order {
        let tid = g.event(id).expect("order ids are events").tid();
        match runs.last_mut() {
            Some(r) if r.tid == tid => r.events.push(id),
            _ => runs.push(Run::new(tid, vec![id])),
        }
    }
    runs
}

/// The trace given by [`linearize_hb`] and [`runs_from_order`].
pub fn canonical_trace(g: ExecutionGraph) -> Result<Trace, TraceError> {
    let order = linearize_hb(&g).ok_or_else(|| {
        let e = g
            .events()
            .iter()
            .map(|e| e.id)
            .find(|&e| g.hb().contains(e, e));
        TraceError::NotHbExtension {
            from: e.unwrap_or_default(),
            to: e.unwrap_or_default(),
        }
    })?;
    let runs = runs_from_order(&g, &order);
    make_trace(g, runs)
}

/// Event ids of a trace, excluding init, as a set.
pub fn trace_events(t: &Trace) -> HashSet<EventId> {
    t.cid.keys().copied().collect()
}
