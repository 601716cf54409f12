//! Release/Acquire consistency: four irreflexivity axioms checked in a fixed order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{EventId, ExecutionGraph};

/// The four RA axioms, in checking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Axiom {
    /// `hb` irreflexive.
    IrrHb,
    /// `mo;hb` irreflexive.
    WriteCoherence,
    /// `mo;hb;rf⁻¹` irreflexive.
    ReadCoherence,
    /// `mo;mo;rf⁻¹` irreflexive.
    Atomicity,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [
        Axiom::IrrHb,
        Axiom::WriteCoherence,
        Axiom::ReadCoherence,
        Axiom::Atomicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::IrrHb => "IRR_HB",
            Axiom::WriteCoherence => "WRITE_COHERENCE",
            Axiom::ReadCoherence => "READ_COHERENCE",
            Axiom::Atomicity => "ATOMICITY",
        }
    }

    pub fn from_name(s: &str) -> Option<Axiom> {
        Axiom::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of a consistency check.
///
/// Witness shapes: `IRR_HB` gives `[e]` with `e hb e`; `WRITE_COHERENCE` gives
/// `[w1, w2]` with `w1 mo w2` and `w2 hb w1`; `READ_COHERENCE` gives
/// `[w, r, w']` with `w rf r`, `w mo w'`, `w' hb r`; `ATOMICITY` gives
/// `[w, u, w']` with `w rf u`, `w mo w'`, `w' mo u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum Verdict {
    Consistent,
    Violation { axiom: Axiom, witness: Vec<EventId> },
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent)
    }

    pub fn axiom(&self) -> Option<Axiom> {
        match self {
            Verdict::Consistent => None,
            Verdict::Violation { axiom, .. } => Some(*axiom),
        }
    }
}

/// Checks all four axioms and reports the first failing one.
pub fn check_ra(g: &ExecutionGraph) -> Verdict {
    for ax in Axiom::ALL {
        let v = check_axiom(g, ax);
        if !v.is_consistent() {
            return v;
        }
    }
    Verdict::Consistent
}

/// Checks a single axiom, reporting the lexicographically smallest witness.
pub fn check_axiom(g: &ExecutionGraph, axiom: Axiom) -> Verdict {
    let witness = match axiom {
        Axiom::IrrHb => irr_hb(g),
        Axiom::WriteCoherence => write_coherence(g),
        Axiom::ReadCoherence => read_coherence(g),
        Axiom::Atomicity => atomicity(g),
    };
    match witness {
        None => Verdict::Consistent,
        Some(witness) => Verdict::Violation { axiom, witness },
    }
}

fn irr_hb(g: &ExecutionGraph) -> Option<Vec<EventId>> {
    let hb = g.hb();
    g.events()
        .iter()
        .map(|e| e.id)
        .filter(|&e| hb.contains(e, e))
        .min()
        .map(|e| vec![e])
}

fn write_coherence(g: &ExecutionGraph) -> Option<Vec<EventId>> {
    let hb = g.hb();
    let mut best: Option<Vec<EventId>> = None;
    for seq in g.mo().values() {
        for (i, &w1) in seq.iter().enumerate() {
            for &w2 in &seq[i + 1..] {
                if hb.contains(w2, w1) {
                    keep_min(&mut best, vec![w1, w2]);
                }
            }
        }
    }
    best
}

fn read_coherence(g: &ExecutionGraph) -> Option<Vec<EventId>> {
    let hb = g.hb();
    let mut best: Option<Vec<EventId>> = None;
    for (&r, &w) in g.rf() {
        let loc = g.event(r).expect("rf ids are events").loc();
        let seq = g.mo_seq(loc);
        let Some(i) = seq.iter().position(|&x| x == w) else {
            continue;
        };
        for &w2 in &seq[i + 1..] {
            if hb.contains(w2, r) {
                keep_min(&mut best, vec![w, r, w2]);
            }
        }
    }
    best
}

fn atomicity(g: &ExecutionGraph) -> Option<Vec<EventId>> {
    let mut best: Option<Vec<EventId>> = None;
    for (&u, &w) in g.rf() {
        let e = g.event(u).expect("rf ids are events");
        if !e.op().writes() {
            continue;
        }
        let seq = g.mo_seq(e.loc());
        let (Some(i), Some(j)) = (
            seq.iter().position(|&x| x == w),
            seq.iter().position(|&x| x == u),
        ) else {
            continue;
        };
        if i < j {
            for &mid in &seq[i + 1..j] {
                keep_min(&mut best, vec![w, u, mid]);
            }
        }
    }
    best
}

fn keep_min(best: &mut Option<Vec<EventId>>, cand: Vec<EventId>) {
    if best.as_ref().is_none_or(|b| cand < *b) {
        *best = Some(cand);
    }
}
