//! Reachability under release/acquire semantics: programs, execution graphs,
//! RA consistency, traces, trace reduction, a bounded decider and the PCP gadget.

pub mod consistency;
pub mod corpus;
pub mod decider;
pub mod graph;
pub mod model;
pub mod pcp;
pub mod reduction;
pub mod trace;
