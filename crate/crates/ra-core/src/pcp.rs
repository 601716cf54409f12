//! PCP gadget: compiles a Post Correspondence instance into a 12-thread,
//! 20-location RMW-free program, builds the completeness witness for a
//! solution, and audits graphs against the no-skipping and monotonicity lemmas.
//!
//! Thread ids: guessers `tax tay tbx tby`, primed guessers `taxp tayp tbxp
//! tbyp`, verifiers `tx ty`, primed verifiers `txp typ`. Locations use `a`/`b`
//! for the α/β side and `p` for primes, e.g. `zpax` is z'^x_α.
//!
//! Value atoms: z-locations carry `0`..`3`; ℓ-locations carry `<c,v>`;
//! x/y-locations carry `<t,v>` or `<~t,v>` (the overlined first-write tag);
//! `bot` stands for ⊥ and every location starts at `init`.
//!
//! Per-iteration instruction order (counters `i`, `c`, `o` start at 0 and are
//! incremented mod 4 before use):
//!
//! - `t{s}x`: outer `aux ← ndet` (⊥ not first); `o++`; `w(z{s}xy, o)`; for
//!   each letter `L` of `α_aux` (or a single ⊥): `c++`; `w(x{s}, <t{s}x,L>)`
//!   (`~` on the very first); `w(zp{s}x, c)`; unless first inner iteration
//!   `r(z{s}x, c-1)`. Then `r(l{s}, <o,aux>)`; stop on ⊥.
//! - `t{s}y`: `aux ← ndet` (⊥ not first); `i++`; `w(y{s}, <t{s}y,aux>)` (`~`
//!   first); `w(zp{s}y, i)`; `w(l{s}, <i,aux>)`; unless first `r(z{s}y, i-1)`,
//!   `r(z{s}xy, i-1)`; stop on ⊥.
//! - `t{s}xp` (do-while): `i++`; `w(xp{s}, <t{s}xp,0>)`; `w(z{s}x, i)`;
//!   `r(zp{s}x, i)`. `t{s}yp` likewise on `yp{s}`, `z{s}y`, `zp{s}y`.
//! - `tx`: `aux ← ndet Γ∪{⊥}`; `i++`; `w(xa, <tx,i>)`; `w(xb, <tx,i>)`;
//!   `r(xa, <tax,aux>)`; `r(xb, <tbx,aux>)` (`~` first); unless first
//!   `r(xpa, <txp,i-1>)`, `r(xpb, <txp,i-1>)`; stop on ⊥. `ty` likewise over
//!   indices.
//! - `txp` (do-while): `i++`; `w(xpa, <txp,i>)`; `w(xpb, <txp,i>)`;
//!   `r(xpa, <taxp,0>)`; `r(xpb, <tbxp,0>)`; `r(xa, <tx,i>)`; `r(xb, <tx,i>)`.
//!   `typ` likewise.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::consistency::check_ra;
use crate::graph::{build_graph, Event, EventId, ExecutionGraph, GraphError};
use crate::model::{Label, Lts, LtsBuilder, Op, Program, INIT_TID};
use crate::trace::{make_trace, Run, Trace, TraceError};

pub const BOT: &str = "bot";
pub const GADGET_INIT: &str = "init";
pub const TERM: &str = "term";

/// A PCP instance: pairs `(α_i, β_i)` of nonempty words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcpInstance {
    pub pairs: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PcpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instance has no pairs")]
    EmptyInstance,
    #[error("pair {0} has an empty word")]
    EmptyWord(usize),
    #[error("letter `{0}` is not allowed (use ASCII letters, digits or `_`)")]
    BadLetter(char),
    #[error("solution index {0} is out of range")]
    IndexOutOfRange(usize),
    #[error("solution is empty")]
    EmptySolution,
    #[error("the index sequence is not a solution")]
    InvalidSolution,
    #[error("graph is not over the gadget alphabet: {0}")]
    NotGadget(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl PcpInstance {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self, PcpError> {
        if pairs.is_empty() {
            return Err(PcpError::EmptyInstance);
        }
        for (k, (a, b)) in pairs.iter().enumerate() {
            if a.is_empty() || b.is_empty() {
                return Err(PcpError::EmptyWord(k + 1));
            }
            if let Some(c) = a
                .chars()
                .chain(b.chars())
                .find(|c| !(c.is_ascii_alphanumeric() || *c == '_'))
            {
                return Err(PcpError::BadLetter(c));
            }
        }
        Ok(PcpInstance { pairs })
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    /// Letters occurring in the instance, sorted.
    pub fn gamma(&self) -> Vec<String> {
        let set: BTreeSet<char> = self
            .pairs
            .iter()
            .flat_map(|(a, b)| a.chars().chain(b.chars()))
            .collect();
        set.into_iter().map(String::from).collect()
    }

    fn word(&self, side: Side, j: usize) -> &str {
        match side {
            Side::A => &self.pairs[j - 1].0,
            Side::B => &self.pairs[j - 1].1,
        }
    }
}

/// Parses `pair <α tokens> : <β tokens>` lines; tokens of a side are
/// concatenated and every character is one letter. `#` starts a comment.
pub fn parse_instance(text: &str) -> Result<PcpInstance, PcpError> {
    let mut pairs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks[0] != "pair" {
            return Err(PcpError::Parse {
                line,
                msg: format!("expected `pair`, found `{}`", toks[0]),
            });
        }
        let colon = toks
            .iter()
            .position(|t| *t == ":")
            .ok_or_else(|| PcpError::Parse {
                line,
                msg: "missing `:`".into(),
            })?;
        let a: String = toks[1..colon].concat();
        let b: String = toks[colon + 1..].concat();
        if a.is_empty() || b.is_empty() {
            return Err(PcpError::Parse {
                line,
                msg: "both sides need a word".into(),
            });
        }
        pairs.push((a, b));
    }
    PcpInstance::new(pairs)
}

/// Concatenation equality `α_{j1}⋯α_{jk} = β_{j1}⋯β_{jk}` for a nonempty sequence.
pub fn verify_solution(inst: &PcpInstance, indices: &[usize]) -> Result<bool, PcpError> {
    if indices.is_empty() {
        return Err(PcpError::EmptySolution);
    }
    if let Some(&j) = indices.iter().find(|&&j| j == 0 || j > inst.n()) {
        return Err(PcpError::IndexOutOfRange(j));
    }
    let a: String = indices.iter().map(|&j| inst.word(Side::A, j)).collect();
    let b: String = indices.iter().map(|&j| inst.word(Side::B, j)).collect();
    Ok(a == b)
}

// ===== Roles =====

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    fn c(self) -> char {
        match self {
            Side::A => 'a',
            Side::B => 'b',
        }
    }
}

/// Role of a gadget thread.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Role {
    GuesserX(Side),
    GuesserY(Side),
    PrimedGuesserX(Side),
    PrimedGuesserY(Side),
    VerifierX,
    VerifierY,
    PrimedVerifierX,
    PrimedVerifierY,
}

impl Role {
    pub const ALL: [Role; 12] = [
        Role::GuesserX(Side::A),
        Role::GuesserY(Side::A),
        Role::GuesserX(Side::B),
        Role::GuesserY(Side::B),
        Role::PrimedGuesserX(Side::A),
        Role::PrimedGuesserY(Side::A),
        Role::PrimedGuesserX(Side::B),
        Role::PrimedGuesserY(Side::B),
        Role::VerifierX,
        Role::VerifierY,
        Role::PrimedVerifierX,
        Role::PrimedVerifierY,
    ];

    pub fn tid(self) -> String {
        match self {
            Role::GuesserX(s) => format!("t{}x", s.c()),
            Role::GuesserY(s) => format!("t{}y", s.c()),
            Role::PrimedGuesserX(s) => format!("t{}xp", s.c()),
            Role::PrimedGuesserY(s) => format!("t{}yp", s.c()),
            Role::VerifierX => "tx".into(),
            Role::VerifierY => "ty".into(),
            Role::PrimedVerifierX => "txp".into(),
            Role::PrimedVerifierY => "typ".into(),
        }
    }

    pub fn from_tid(tid: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.tid() == tid)
    }

    fn is_verifier(self) -> bool {
        matches!(
            self,
            Role::VerifierX | Role::VerifierY | Role::PrimedVerifierX | Role::PrimedVerifierY
        )
    }
}

/// Kind of a gadget location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LocRole {
    Main,
    Primed,
    Z,
    Ell,
}

/// All 20 gadget locations with their kinds.
pub fn gadget_locations() -> Vec<(String, LocRole)> {
    let mut out = Vec::new();
    for s in ['a', 'b'] {
        out.push((format!("x{s}"), LocRole::Main));
        out.push((format!("y{s}"), LocRole::Main));
        out.push((format!("l{s}"), LocRole::Ell));
        out.push((format!("xp{s}"), LocRole::Primed));
        out.push((format!("yp{s}"), LocRole::Primed));
        for z in ["x", "y", "xy"] {
            out.push((format!("z{s}{z}"), LocRole::Z));
        }
        for z in ["x", "y"] {
            out.push((format!("zp{s}{z}"), LocRole::Z));
        }
    }
    out
}

/// Bridge locations: accessed once per outer iteration of an x-guesser.
pub fn bridge_locations() -> BTreeSet<String> {
    ["zaxy", "la", "zbxy", "lb"]
        .into_iter()
        .map(String::from)
        .collect()
}

/// Compiled gadget with role metadata.
#[derive(Clone, Debug)]
pub struct GadgetProgram {
    pub program: Program,
    pub role_map: BTreeMap<String, Role>,
    pub loc_map: BTreeMap<String, LocRole>,
}

fn tag(t: &str, v: impl fmt::Display) -> String {
    format!("<{t},{v}>")
}

fn over(t: &str, first: bool) -> String {
    if first {
        format!("~{t}")
    } else {
        t.to_string()
    }
}

fn aux_str(aux: Option<usize>) -> String {
    aux.map_or(BOT.to_string(), |j| j.to_string())
}

// ===== Compiler =====

const CHOOSE: u8 = 0;
const TERM_PC: u8 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct St {
    pc: u8,
    i: u8,
    c: u8,
    aux: Option<usize>,
    pos: usize,
    started: bool,
}

impl St {
    const INIT: St = St {
        pc: CHOOSE,
        i: 0,
        c: 0,
        aux: None,
        pos: 0,
        started: false,
    };
    const TERM: St = St {
        pc: TERM_PC,
        i: 0,
        c: 0,
        aux: None,
        pos: 0,
        started: false,
    };

    fn at(self, pc: u8) -> St {
        St { pc, ..self }
    }
}

fn inc(i: u8) -> u8 {
    (i + 1) % 4
}

fn dec(i: u8) -> u8 {
    (i + 3) % 4
}

struct Compiler<'a> {
    inst: &'a PcpInstance,
    gamma: Vec<String>,
}

impl<'a> Compiler<'a> {
    /// Labeled successors of a state; silent choices are resolved eagerly.
    fn succ(&self, role: Role, st: St) -> Vec<(Label, St)> {
        let tid = role.tid();
        let n = self.inst.n();
        let w = |loc: &str, v: &str| Label::write(&tid, loc, v);
        let r = |loc: &str, v: &str| Label::read(&tid, loc, v);
        // outer guesses: ⊥ is not allowed in the first iteration
        let guesses = |started: bool| -> Vec<Option<usize>> {
            let mut g: Vec<Option<usize>> = (1..=n).map(Some).collect();
            if started {
                g.push(None);
            }
            g
        };
        let end_iter = |s: St| -> St {
            if s.aux.is_none() {
                St::TERM
            } else {
                St {
                    pc: CHOOSE,
                    aux: None,
                    pos: 0,
                    started: true,
                    ..s
                }
            }
        };
        match role {
            Role::GuesserX(side) => {
                let s = side.c();
                let letters = |aux: Option<usize>| -> Vec<String> {
                    match aux {
                        Some(j) => self.inst.word(side, j).chars().map(String::from).collect(),
                        None => vec![BOT.to_string()],
                    }
                };
                match st.pc {
                    CHOOSE => guesses(st.started)
                        .into_iter()
                        .flat_map(|aux| {
                            self.succ(
                                role,
                                St {
                                    pc: 1,
                                    i: inc(st.i),
                                    aux,
                                    pos: 0,
                                    ..st
                                },
                            )
                        })
                        .collect(),
                    1 => vec![(w(&format!("z{s}xy"), &st.i.to_string()), st.at(2))],
                    2 => {
                        let c = inc(st.c);
                        let lt = &letters(st.aux)[st.pos];
                        vec![(
                            w(&format!("x{s}"), &tag(&over(&tid, !st.started), lt)),
                            St { pc: 3, c, ..st },
                        )]
                    }
                    3 => {
                        let next = if st.started { st.at(4) } else { st.at(5) };
                        vec![(w(&format!("zp{s}x"), &st.c.to_string()), next)]
                    }
                    4 => vec![(r(&format!("z{s}x"), &dec(st.c).to_string()), st.at(5))],
                    5 => {
                        let len = letters(st.aux).len();
                        let s2 = if st.pos + 1 < len {
                            St {
                                pc: 2,
                                pos: st.pos + 1,
                                started: true,
                                ..st
                            }
                        } else {
                            St {
                                pc: 6,
                                pos: 0,
                                started: true,
                                ..st
                            }
                        };
                        self.succ(role, s2)
                    }
                    6 => vec![(
                        r(&format!("l{s}"), &tag(&st.i.to_string(), aux_str(st.aux))),
                        end_iter(st),
                    )],
                    _ => Vec::new(),
                }
            }
            Role::GuesserY(side) => {
                let s = side.c();
                match st.pc {
                    CHOOSE => guesses(st.started)
                        .into_iter()
                        .flat_map(|aux| {
                            self.succ(
                                role,
                                St {
                                    pc: 1,
                                    i: inc(st.i),
                                    aux,
                                    ..st
                                },
                            )
                        })
                        .collect(),
                    1 => vec![(
                        w(
                            &format!("y{s}"),
                            &tag(&over(&tid, !st.started), aux_str(st.aux)),
                        ),
                        st.at(2),
                    )],
                    2 => vec![(w(&format!("zp{s}y"), &st.i.to_string()), st.at(3))],
                    3 => {
                        let next = if st.started { st.at(4) } else { end_iter(st) };
                        vec![(
                            w(&format!("l{s}"), &tag(&st.i.to_string(), aux_str(st.aux))),
                            next,
                        )]
                    }
                    4 => vec![(r(&format!("z{s}y"), &dec(st.i).to_string()), st.at(5))],
                    5 => vec![(r(&format!("z{s}xy"), &dec(st.i).to_string()), end_iter(st))],
                    _ => Vec::new(),
                }
            }
            Role::PrimedGuesserX(side) | Role::PrimedGuesserY(side) => {
                let s = side.c();
                let d = if matches!(role, Role::PrimedGuesserX(_)) {
                    'x'
                } else {
                    'y'
                };
                match st.pc {
                    CHOOSE => vec![(
                        w(&format!("{d}p{s}"), &tag(&tid, 0)),
                        St {
                            pc: 1,
                            i: inc(st.i),
                            ..st
                        },
                    )],
                    1 => vec![(w(&format!("z{s}{d}"), &st.i.to_string()), st.at(2))],
                    2 => {
                        let lab = r(&format!("zp{s}{d}"), &st.i.to_string());
                        vec![(lab.clone(), st.at(CHOOSE)), (lab, St::TERM)]
                    }
                    _ => Vec::new(),
                }
            }
            Role::VerifierX | Role::VerifierY => {
                let d = if role == Role::VerifierX { 'x' } else { 'y' };
                let val = |aux: Option<usize>| -> String {
                    match (role, aux) {
                        (_, None) => BOT.to_string(),
                        (Role::VerifierX, Some(k)) => self.gamma[k].clone(),
                        (_, Some(j)) => j.to_string(),
                    }
                };
                let n_choices = if role == Role::VerifierX {
                    self.gamma.len()
                } else {
                    n
                };
                match st.pc {
                    CHOOSE => {
                        let opts: Vec<Option<usize>> = if role == Role::VerifierX {
                            (0..n_choices).map(Some).chain([None]).collect()
                        } else {
                            (1..=n_choices).map(Some).chain([None]).collect()
                        };
                        opts.into_iter()
                            .flat_map(|aux| {
                                self.succ(
                                    role,
                                    St {
                                        pc: 1,
                                        i: inc(st.i),
                                        aux,
                                        ..st
                                    },
                                )
                            })
                            .collect()
                    }
                    1 => vec![(w(&format!("{d}a"), &tag(&tid, st.i)), st.at(2))],
                    2 => vec![(w(&format!("{d}b"), &tag(&tid, st.i)), st.at(3))],
                    3 => vec![(
                        r(
                            &format!("{d}a"),
                            &tag(&over(&format!("ta{d}"), !st.started), val(st.aux)),
                        ),
                        st.at(4),
                    )],
                    4 => {
                        let next = if st.started { st.at(5) } else { end_iter(st) };
                        vec![(
                            r(
                                &format!("{d}b"),
                                &tag(&over(&format!("tb{d}"), !st.started), val(st.aux)),
                            ),
                            next,
                        )]
                    }
                    5 => vec![(
                        r(&format!("{d}pa"), &tag(&format!("t{d}p"), dec(st.i))),
                        st.at(6),
                    )],
                    6 => vec![(
                        r(&format!("{d}pb"), &tag(&format!("t{d}p"), dec(st.i))),
                        end_iter(st),
                    )],
                    _ => Vec::new(),
                }
            }
            Role::PrimedVerifierX | Role::PrimedVerifierY => {
                let d = if role == Role::PrimedVerifierX {
                    'x'
                } else {
                    'y'
                };
                let v = format!("t{d}");
                match st.pc {
                    CHOOSE => {
                        let i = inc(st.i);
                        vec![(w(&format!("{d}pa"), &tag(&tid, i)), St { pc: 1, i, ..st })]
                    }
                    1 => vec![(w(&format!("{d}pb"), &tag(&tid, st.i)), st.at(2))],
                    2 => vec![(r(&format!("{d}pa"), &tag(&format!("ta{d}p"), 0)), st.at(3))],
                    3 => vec![(r(&format!("{d}pb"), &tag(&format!("tb{d}p"), 0)), st.at(4))],
                    4 => vec![(r(&format!("{d}a"), &tag(&v, st.i)), st.at(5))],
                    5 => {
                        let lab = r(&format!("{d}b"), &tag(&v, st.i));
                        vec![(lab.clone(), st.at(CHOOSE)), (lab, St::TERM)]
                    }
                    _ => Vec::new(),
                }
            }
        }
    }

    fn lts(&self, role: Role) -> Lts {
        let tid = role.tid();
        let mut names: HashMap<St, String> = HashMap::new();
        names.insert(St::INIT, "s0".into());
        names.insert(St::TERM, TERM.into());
        let mut b = LtsBuilder::new(&tid, "s0", TERM);
        let mut queue = VecDeque::from([St::INIT]);
        let mut next_id = 1;
        while let Some(st) = queue.pop_front() {
            let from = names[&st].clone();
            for (lab, to) in self.succ(role, st) {
                let name = names.entry(to).or_insert_with(|| {
                    queue.push_back(to);
                    let n = format!("s{next_id}");
                    next_id += 1;
                    n
                });
                b.add(&from, lab, name);
            }
        }
        b.build()
    }
}

/// Compiles an instance into the 12-thread gadget program.
pub fn compile_pcp(inst: &PcpInstance) -> GadgetProgram {
    let comp = Compiler {
        inst,
        gamma: inst.gamma(),
    };
    let threads: Vec<Lts> = Role::ALL.iter().map(|&r| comp.lts(r)).collect();
    let locs = gadget_locations();
    let mut vals: BTreeSet<String> = BTreeSet::from([GADGET_INIT.to_string()]);
    for t in &threads {
        for tr in &t.transitions {
            vals.extend(tr.label.val_r.iter().cloned());
            vals.extend(tr.label.val_w.iter().cloned());
        }
    }
    let program = Program {
        threads,
        locs: locs.iter().map(|(l, _)| l.clone()).collect(),
        vals: vals.into_iter().collect(),
        init_vals: locs
            .iter()
            .map(|(l, _)| (l.clone(), GADGET_INIT.to_string()))
            .collect(),
    };
    GadgetProgram {
        program,
        role_map: Role::ALL.iter().map(|&r| (r.tid(), r)).collect(),
        loc_map: locs.into_iter().collect(),
    }
}

// ===== Witness =====

/// Event sequences of all 12 threads for an index sequence.
fn witness_words(inst: &PcpInstance, sol: &[usize]) -> Vec<(String, Vec<Label>)> {
    let auxs: Vec<Option<usize>> = sol.iter().copied().map(Some).chain([None]).collect();
    let word: Vec<String> = sol
        .iter()
        .flat_map(|&j| inst.word(Side::A, j).chars().map(String::from))
        .collect();
    let x_len = word.len() + 1;
    let y_len = sol.len() + 1;
    let m = |i: usize| (i % 4).to_string();
    let mut out = Vec::new();
    for side in [Side::A, Side::B] {
        let s = side.c();
        let gx = Role::GuesserX(side).tid();
        let gy = Role::GuesserY(side).tid();
        let px = Role::PrimedGuesserX(side).tid();
        let py = Role::PrimedGuesserY(side).tid();

        let mut ev = Vec::new();
        let mut c = 0;
        for (o, aux) in auxs.iter().enumerate() {
            let o = o + 1;
            ev.push(Label::write(&gx, &format!("z{s}xy"), &m(o)));
            let letters: Vec<String> = match aux {
                Some(j) => inst.word(side, *j).chars().map(String::from).collect(),
                None => vec![BOT.into()],
            };
            for lt in letters {
                c += 1;
                ev.push(Label::write(
                    &gx,
                    &format!("x{s}"),
                    &tag(&over(&gx, c == 1), lt),
                ));
                ev.push(Label::write(&gx, &format!("zp{s}x"), &m(c)));
                if c > 1 {
                    ev.push(Label::read(&gx, &format!("z{s}x"), &m(c - 1)));
                }
            }
            ev.push(Label::read(
                &gx,
                &format!("l{s}"),
                &tag(&m(o), aux_str(*aux)),
            ));
        }
        out.push((gx.clone(), ev));

        let mut ev = Vec::new();
        for (i, aux) in auxs.iter().enumerate() {
            let i = i + 1;
            ev.push(Label::write(
                &gy,
                &format!("y{s}"),
                &tag(&over(&gy, i == 1), aux_str(*aux)),
            ));
            ev.push(Label::write(&gy, &format!("zp{s}y"), &m(i)));
            ev.push(Label::write(
                &gy,
                &format!("l{s}"),
                &tag(&m(i), aux_str(*aux)),
            ));
            if i > 1 {
                ev.push(Label::read(&gy, &format!("z{s}y"), &m(i - 1)));
                ev.push(Label::read(&gy, &format!("z{s}xy"), &m(i - 1)));
            }
        }
        out.push((gy.clone(), ev));

        for (t, d, len) in [(&px, 'x', x_len), (&py, 'y', y_len)] {
            let mut ev = Vec::new();
            for i in 1..=len {
                ev.push(Label::write(t, &format!("{d}p{s}"), &tag(t, 0)));
                ev.push(Label::write(t, &format!("z{s}{d}"), &m(i)));
                ev.push(Label::read(t, &format!("zp{s}{d}"), &m(i)));
            }
            out.push((t.clone(), ev));
        }
    }
    let x_vals: Vec<String> = word.iter().cloned().chain([BOT.to_string()]).collect();
    let y_vals: Vec<String> = auxs.iter().map(|a| aux_str(*a)).collect();
    for (d, vals) in [('x', &x_vals), ('y', &y_vals)] {
        let t = format!("t{d}");
        let tp = format!("t{d}p");
        let mut ev = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            let i = i + 1;
            ev.push(Label::write(&t, &format!("{d}a"), &tag(&t, i % 4)));
            ev.push(Label::write(&t, &format!("{d}b"), &tag(&t, i % 4)));
            ev.push(Label::read(
                &t,
                &format!("{d}a"),
                &tag(&over(&format!("ta{d}"), i == 1), v),
            ));
            ev.push(Label::read(
                &t,
                &format!("{d}b"),
                &tag(&over(&format!("tb{d}"), i == 1), v),
            ));
            if i > 1 {
                ev.push(Label::read(&t, &format!("{d}pa"), &tag(&tp, (i - 1) % 4)));
                ev.push(Label::read(&t, &format!("{d}pb"), &tag(&tp, (i - 1) % 4)));
            }
        }
        out.push((t.clone(), ev));
        let mut ev = Vec::new();
        for i in 1..=vals.len() {
            ev.push(Label::write(&tp, &format!("{d}pa"), &tag(&tp, i % 4)));
            ev.push(Label::write(&tp, &format!("{d}pb"), &tag(&tp, i % 4)));
            ev.push(Label::read(
                &tp,
                &format!("{d}pa"),
                &tag(&format!("ta{d}p"), 0),
            ));
            ev.push(Label::read(
                &tp,
                &format!("{d}pb"),
                &tag(&format!("tb{d}p"), 0),
            ));
            ev.push(Label::read(&tp, &format!("{d}a"), &tag(&t, i % 4)));
            ev.push(Label::read(&tp, &format!("{d}b"), &tag(&t, i % 4)));
        }
        out.push((tp, ev));
    }
    out
}

/// The unique thread writing a z- or ℓ-location.
fn single_writer(loc: &str) -> Option<String> {
    let b = loc.as_bytes();
    match loc.len() {
        2 if b[0] == b'l' => Some(format!("t{}y", b[1] as char)),
        3 if b[0] == b'z' => Some(format!("t{}{}p", b[1] as char, b[2] as char)),
        4 if loc.starts_with("zp") => Some(format!("t{}{}", b[2] as char, b[3] as char)),
        4 if b[0] == b'z' => Some(format!("t{}x", b[1] as char)),
        _ => None,
    }
}

/// Thread a read intends to read from, from its location and value tag.
fn intended_writer(loc: &str, val: &str) -> Option<String> {
    single_writer(loc).or_else(|| {
        let inner = val.strip_prefix('<')?;
        let t = inner.split(',').next()?;
        Some(t.trim_start_matches('~').to_string())
    })
}

/// Per-(thread, location, op) 1-based index of every event; init events get 0.
pub fn event_indices(g: &ExecutionGraph) -> HashMap<EventId, usize> {
    let mut out = HashMap::new();
    for e in g.events().iter().filter(|e| e.is_init()) {
        out.insert(e.id, 0);
    }
    for t in g.threads() {
        let mut count: HashMap<(&str, bool), usize> = HashMap::new();
        for &id in g.po_seq(t).unwrap() {
            let e = g.event(id).unwrap();
            let k = count.entry((e.loc(), e.op().writes())).or_default();
            *k += 1;
            out.insert(id, *k);
        }
    }
    out
}

fn mo_priority(tid: &str) -> u8 {
    match Role::from_tid(tid) {
        Some(r) if r.is_verifier() => 0,
        _ => 1,
    }
}

/// Builds the witness graph for an index sequence without checking it is a solution.
fn build_witness_graph(inst: &PcpInstance, sol: &[usize]) -> Result<ExecutionGraph, PcpError> {
    let locs = gadget_locations();
    let mut events = Vec::new();
    for (l, _) in &locs {
        events.push(Event::new(
            events.len(),
            Label::write(INIT_TID, l, GADGET_INIT),
        ));
    }
    let mut po = Vec::new();
    for (tid, word) in witness_words(inst, sol) {
        let mut seq = Vec::new();
        for lab in word {
            seq.push(events.len());
            events.push(Event::new(events.len(), lab));
        }
        po.push((tid, seq));
    }
    // i-th write of each (thread, location)
    let mut writes: HashMap<(String, String), Vec<EventId>> = HashMap::new();
    for (tid, seq) in &po {
        for &id in seq {
            let e = &events[id];
            if e.op().writes() {
                writes
                    .entry((tid.clone(), e.loc().to_string()))
                    .or_default()
                    .push(id);
            }
        }
    }
    let mut rf = Vec::new();
    for (tid, seq) in &po {
        let mut count: HashMap<&str, usize> = HashMap::new();
        for &id in seq {
            let e = &events[id];
            if !e.op().reads() {
                continue;
            }
            let k = count.entry(e.loc()).or_default();
            *k += 1;
            let writer = intended_writer(e.loc(), e.val_r().unwrap()).ok_or_else(|| {
                PcpError::NotGadget(format!("no writer for {tid} on {}", e.loc()))
            })?;
            let src = writes
                .get(&(writer, e.loc().to_string()))
                .and_then(|ws| ws.get(*k - 1))
                .copied()
                .ok_or(GraphError::MissingWriter(id))?;
            rf.push((id, src));
        }
    }
    let mut mo = Vec::new();
    for (l, (loc, _)) in locs.iter().enumerate() {
        let mut ws: Vec<(usize, u8, EventId)> = Vec::new();
        for ((tid, wl), ids) in &writes {
            if wl == loc {
                for (k, &id) in ids.iter().enumerate() {
                    ws.push((k + 1, mo_priority(tid), id));
                }
            }
        }
        ws.sort();
        mo.push((
            loc.clone(),
            std::iter::once(l)
                .chain(ws.into_iter().map(|w| w.2))
                .collect(),
        ));
    }
    Ok(build_graph(events, po, rf, mo)?)
}

/// Deterministic round-robin hb-linearization split into maximal runs.
pub fn round_robin_runs(g: &ExecutionGraph) -> Option<Vec<Run>> {
    let threads: Vec<&str> = g.threads().collect();
    let mut next = vec![0usize; threads.len()];
    let mut placed: std::collections::HashSet<EventId> = g
        .events()
        .iter()
        .filter(|e| e.is_init())
        .map(|e| e.id)
        .collect();
    let total = g.non_init_len();
    let mut runs: Vec<Run> = Vec::new();
    let mut n = 0;
    while n < total {
        let mut progress = false;
        for (k, t) in threads.iter().enumerate() {
            let seq = g.po_seq(t).unwrap();
            let mut run = Vec::new();
            while next[k] < seq.len() {
                let id = seq[next[k]];
                if g.rf_source(id).is_some_and(|w| !placed.contains(&w)) {
                    break;
                }
                placed.insert(id);
                run.push(id);
                next[k] += 1;
            }
            if !run.is_empty() {
                n += run.len();
                progress = true;
                runs.push(Run::new(*t, run));
            }
        }
        if !progress {
            return None;
        }
    }
    Some(runs)
}

/// Completeness witness for a solution, as a trace.
pub fn pcp_witness(inst: &PcpInstance, solution: &[usize]) -> Result<Trace, PcpError> {
    if !verify_solution(inst, solution)? {
        return Err(PcpError::InvalidSolution);
    }
    let g = build_witness_graph(inst, solution)?;
    let runs = round_robin_runs(&g).ok_or(PcpError::Trace(TraceError::NotHbExtension {
        from: 0,
        to: 0,
    }))?;
    Ok(make_trace(g, runs)?)
}

/// Searches index sequences of length at most `max_len` whose witness skeleton
/// is well formed, RA-consistent and reaches the all-term vector.
pub fn skeleton_search(inst: &PcpInstance, max_len: usize) -> Option<Vec<usize>> {
    let gp = compile_pcp(inst);
    let mut seqs: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &seqs {
            for j in 1..=inst.n() {
                let mut t = s.clone();
                t.push(j);
                if let Ok(g) = build_witness_graph(inst, &t) {
                    if check_ra(&g).is_consistent()
                        && crate::graph::reaches(&g, &gp.program, &gp.program.final_vector())
                            .unwrap_or(false)
                    {
                        return Some(t);
                    }
                }
                next.push(t);
            }
        }
        seqs = next;
    }
    None
}

// ===== Audits =====

/// One rf family `w_i(writer, loc) rf r_i(reader, loc)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RfFamily {
    pub writer: String,
    pub reader: String,
    pub loc: String,
}

/// The no-skipping rf families: twelve among guessers, eight among
/// verifiers, eight from guessers to verifiers.
pub fn no_skipping_families() -> Vec<RfFamily> {
    let f = |w: &str, r: &str, l: &str| RfFamily {
        writer: w.into(),
        reader: r.into(),
        loc: l.into(),
    };
    let mut out = Vec::new();
    for s in ['a', 'b'] {
        out.push(f(&format!("t{s}xp"), &format!("t{s}x"), &format!("z{s}x")));
        out.push(f(&format!("t{s}x"), &format!("t{s}xp"), &format!("zp{s}x")));
        out.push(f(&format!("t{s}yp"), &format!("t{s}y"), &format!("z{s}y")));
        out.push(f(&format!("t{s}y"), &format!("t{s}yp"), &format!("zp{s}y")));
        out.push(f(&format!("t{s}x"), &format!("t{s}y"), &format!("z{s}xy")));
        out.push(f(&format!("t{s}y"), &format!("t{s}x"), &format!("l{s}")));
    }
    for d in ['x', 'y'] {
        for s in ['a', 'b'] {
            out.push(f(&format!("t{d}"), &format!("t{d}p"), &format!("{d}{s}")));
            out.push(f(&format!("t{d}p"), &format!("t{d}"), &format!("{d}p{s}")));
        }
    }
    for d in ['x', 'y'] {
        for s in ['a', 'b'] {
            out.push(f(&format!("t{s}{d}"), &format!("t{d}"), &format!("{d}{s}")));
            out.push(f(
                &format!("t{s}{d}p"),
                &format!("t{d}p"),
                &format!("{d}p{s}"),
            ));
        }
    }
    out
}

/// A violation of the no-skipping lemma.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum NoSkipViolation {
    /// The read's source is in its family but at another index.
    IndexMismatch {
        read: EventId,
        write: EventId,
        read_index: usize,
        write_index: usize,
    },
    /// The read's source is outside every listed family.
    UnlistedEdge { read: EventId, write: EventId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoSkipReport {
    pub edges_checked: usize,
    pub violations: Vec<NoSkipViolation>,
}

impl NoSkipReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn require_gadget(g: &ExecutionGraph) -> Result<(), PcpError> {
    for t in g.threads() {
        if Role::from_tid(t).is_none() {
            return Err(PcpError::NotGadget(format!(
                "thread `{t}` has no gadget role"
            )));
        }
    }
    let locs: BTreeSet<String> = gadget_locations().into_iter().map(|(l, _)| l).collect();
    for l in g.locs() {
        if !locs.contains(l) {
            return Err(PcpError::NotGadget(format!(
                "location `{l}` is not a gadget location"
            )));
        }
    }
    Ok(())
}

/// Checks that every rf edge pairs equal indices within a listed family.
pub fn check_no_skipping(g: &ExecutionGraph) -> Result<NoSkipReport, PcpError> {
    require_gadget(g)?;
    let fams: BTreeSet<(String, String, String)> = no_skipping_families()
        .into_iter()
        .map(|f| (f.writer, f.reader, f.loc))
        .collect();
    let idx = event_indices(g);
    let mut violations = Vec::new();
    for (&r, &w) in g.rf() {
        let re = g.event(r).unwrap();
        let we = g.event(w).unwrap();
        let key = (
            we.tid().to_string(),
            re.tid().to_string(),
            re.loc().to_string(),
        );
        if we.is_init() || !fams.contains(&key) {
            violations.push(NoSkipViolation::UnlistedEdge { read: r, write: w });
        } else if idx[&r] != idx[&w] {
            violations.push(NoSkipViolation::IndexMismatch {
                read: r,
                write: w,
                read_index: idx[&r],
                write_index: idx[&w],
            });
        }
    }
    Ok(NoSkipReport {
        edges_checked: g.rf().len(),
        violations,
    })
}

/// Outcome of one monotonicity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub checks: Vec<CheckOutcome>,
    /// Decreasing read-to-read po pairs that match the allowed list.
    pub allowed_decreasing: Vec<(EventId, EventId)>,
}

impl MonotonicityReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const MAX_REPORTED: usize = 20;

struct Audit<'a> {
    g: &'a ExecutionGraph,
    idx: HashMap<EventId, usize>,
    bridge: BTreeSet<String>,
}

impl Audit<'_> {
    fn name(&self, id: EventId) -> String {
        let e = self.g.event(id).unwrap();
        let op = if e.op().writes() { "w" } else { "r" };
        format!("{op}{}({},{})", self.idx[&id], e.tid(), e.loc())
    }

    fn is_bridge(&self, id: EventId) -> bool {
        self.bridge.contains(self.g.event(id).unwrap().loc())
    }

    fn outcome(&self, name: &str, bad: Vec<(EventId, EventId)>) -> CheckOutcome {
        CheckOutcome {
            name: name.into(),
            passed: bad.is_empty(),
            violations: bad
                .iter()
                .take(MAX_REPORTED)
                .map(|&(a, b)| format!("{} -> {}", self.name(a), self.name(b)))
                .collect(),
        }
    }
}

/// Decreasing read-to-read po pairs allowed on verifier threads.
fn allowed_rr(tid: &str, from: &str, to: &str) -> bool {
    match tid {
        "tx" | "ty" => {
            let d = &tid[1..];
            let mains = [format!("{d}a"), format!("{d}b")];
            let primes = [format!("{d}pa"), format!("{d}pb")];
            mains.iter().any(|m| m == from) && primes.iter().any(|p| p == to)
        }
        _ => false,
    }
}

/// Checks the six index-monotonicity properties (a)–(f).
pub fn check_monotonicity(g: &ExecutionGraph) -> Result<MonotonicityReport, PcpError> {
    require_gadget(g)?;
    let a = Audit {
        g,
        idx: event_indices(g),
        bridge: bridge_locations(),
    };
    let idx = &a.idx;
    let ev = |id: EventId| g.event(id).unwrap();

    let mut po_bad = Vec::new();
    let mut rr_bad = Vec::new();
    let mut allowed = Vec::new();
    for t in g.threads() {
        let seq = g.po_seq(t).unwrap();
        for (p, &x) in seq.iter().enumerate() {
            for &y in &seq[p + 1..] {
                let (ex, ey) = (ev(x), ev(y));
                if ey.op().writes() && !a.is_bridge(y) {
                    let ok = if ex.op() == Op::Read {
                        idx[&x] < idx[&y]
                    } else {
                        idx[&x] <= idx[&y]
                    };
                    if !ok {
                        po_bad.push((x, y));
                    }
                }
                if ex.op() == Op::Read
                    && ey.op() == Op::Read
                    && !a.is_bridge(x)
                    && !a.is_bridge(y)
                    && idx[&y] < idx[&x]
                {
                    if idx[&y] + 1 == idx[&x] && allowed_rr(t, ex.loc(), ey.loc()) {
                        allowed.push((x, y));
                    } else {
                        rr_bad.push((x, y));
                    }
                }
            }
        }
    }

    let mut rfmo_bad = Vec::new();
    for (&r, &w) in g.rf() {
        if idx[&w] > idx[&r] {
            rfmo_bad.push((w, r));
        }
    }
    for seq in g.mo().values() {
        for (p, &x) in seq.iter().enumerate() {
            for &y in &seq[p + 1..] {
                if idx[&x] > idx[&y] {
                    rfmo_bad.push((x, y));
                }
            }
        }
    }

    let hb = g.hb();
    let mut ww_bad = Vec::new();
    let mut wr_bad = Vec::new();
    let mut dec2_bad = Vec::new();
    let dec2: Vec<(String, String, String, String)> = ['a', 'b']
        .iter()
        .flat_map(|s| {
            ['x', 'y'].iter().map(move |d| {
                (
                    format!("t{s}{d}p"),
                    format!("{d}p{s}"),
                    format!("t{s}{d}"),
                    format!("{d}{s}"),
                )
            })
        })
        .collect();
    for w in g.events().iter().filter(|e| e.op().writes()) {
        for b in hb.successors(w.id) {
            let eb = ev(b);
            if eb.loc() == w.loc() {
                if eb.op().writes() && idx[&w.id] >= idx[&b] {
                    ww_bad.push((w.id, b));
                }
                if eb.op().reads() && idx[&w.id] > idx[&b] {
                    wr_bad.push((w.id, b));
                }
            }
            if eb.op().writes()
                && dec2.iter().any(|(t1, l1, t2, l2)| {
                    w.tid() == t1 && w.loc() == l1 && eb.tid() == t2 && eb.loc() == l2
                })
                && idx[&w.id] + 1 >= idx[&b]
            {
                dec2_bad.push((w.id, b));
            }
        }
    }

    Ok(MonotonicityReport {
        checks: vec![
            a.outcome("a: po into non-bridge writes", po_bad),
            a.outcome("b: decreasing read-to-read po", rr_bad),
            a.outcome("c: rf and mo non-decreasing", rfmo_bad),
            a.outcome("d: write-to-write hb increasing", ww_bad),
            a.outcome("e: write-to-read hb non-decreasing", wr_bad),
            a.outcome("f: primed-to-guesser hb gap", dec2_bad),
        ],
        allowed_decreasing: allowed,
    })
}

/// A single rf rewire `read: old -> new`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RfMutation {
    pub read: EventId,
    pub old: EventId,
    pub new: EventId,
}

/// Value-preserving rewires of family edges to another write of the same
/// writer thread, which break index alignment.
pub fn index_breaking_mutations(g: &ExecutionGraph) -> Vec<RfMutation> {
    let idx = event_indices(g);
    let mut out = Vec::new();
    for (&r, &w) in g.rf() {
        let we = g.event(w).unwrap();
        if we.is_init() {
            continue;
        }
        let seq = g.po_seq(we.tid()).unwrap();
        for &w2 in seq {
            let e2 = g.event(w2).unwrap();
            if w2 != w
                && e2.op().writes()
                && e2.loc() == we.loc()
                && e2.val_w() == we.val_w()
                && idx[&w2] != idx[&r]
            {
                out.push(RfMutation {
                    read: r,
                    old: w,
                    new: w2,
                });
            }
        }
    }
    out
}

/// The graph with one rf edge rewired.
pub fn apply_mutation(g: &ExecutionGraph, m: RfMutation) -> Result<ExecutionGraph, GraphError> {
    let (events, po, rf, mo) = g.parts();
    let rf = rf
        .into_iter()
        .map(|(r, w)| if r == m.read { (r, m.new) } else { (r, w) })
        .collect();
    build_graph(events, po, rf, mo)
}
