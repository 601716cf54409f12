//! Programs as families of labeled transition systems over memory-event labels.
//!
//! A [`Program`] maps thread ids to [`Lts`] values whose transitions carry
//! read, write and read-modify-write [`Label`]s. Values are opaque string atoms.
//! A pseudo-thread named [`INIT_TID`] supplies one initial write per location.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Thread id reserved for the initialization pseudo-thread.
pub const INIT_TID: &str = "_init";

/// Value written by the init pseudo-thread when a location has no explicit initializer.
pub const DEFAULT_INIT_VALUE: &str = "0";

/// Kind of memory access.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "READ")]
    Read,
    #[serde(rename = "WRITE")]
    Write,
    #[serde(rename = "RMW")]
    Rmw,
}

impl Op {
    /// True for READ and RMW.
    pub fn reads(self) -> bool {
        matches!(self, Op::Read | Op::Rmw)
    }

    /// True for WRITE and RMW.
    pub fn writes(self) -> bool {
        matches!(self, Op::Write | Op::Rmw)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Read => "r",
            Op::Write => "w",
            Op::Rmw => "rmw",
        })
    }
}

/// An event label: `r(t,x,v)`, `w(t,x,v)` or `rmw(t,x,vr,vw)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub op: Op,
    pub tid: String,
    pub loc: String,
    #[serde(rename = "valR", default, skip_serializing_if = "Option::is_none")]
    pub val_r: Option<String>,
    #[serde(rename = "valW", default, skip_serializing_if = "Option::is_none")]
    pub val_w: Option<String>,
}

impl Label {
    pub fn read(tid: &str, loc: &str, v: &str) -> Self {
        Label {
            op: Op::Read,
            tid: tid.into(),
            loc: loc.into(),
            val_r: Some(v.into()),
            val_w: None,
        }
    }

    pub fn write(tid: &str, loc: &str, v: &str) -> Self {
        Label {
            op: Op::Write,
            tid: tid.into(),
            loc: loc.into(),
            val_r: None,
            val_w: Some(v.into()),
        }
    }

    pub fn rmw(tid: &str, loc: &str, vr: &str, vw: &str) -> Self {
        Label {
            op: Op::Rmw,
            tid: tid.into(),
            loc: loc.into(),
            val_r: Some(vr.into()),
            val_w: Some(vw.into()),
        }
    }

    /// Checks that `valR`/`valW` are present exactly when the op reads/writes.
    pub fn is_well_formed(&self) -> bool {
        self.val_r.is_some() == self.op.reads() && self.val_w.is_some() == self.op.writes()
    }

    /// Same access with a different thread id.
    pub fn with_tid(&self, tid: &str) -> Self {
        Label {
            tid: tid.into(),
            ..self.clone()
        }
    }

    /// Label equality ignoring the thread id.
    pub fn same_access(&self, other: &Label) -> bool {
        self.op == other.op
            && self.loc == other.loc
            && self.val_r == other.val_r
            && self.val_w == other.val_w
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            Op::Read => write!(
                f,
                "r({},{},{})",
                self.tid,
                self.loc,
                self.val_r.as_deref().unwrap_or("?")
            ),
            Op::Write => write!(
                f,
                "w({},{},{})",
                self.tid,
                self.loc,
                self.val_w.as_deref().unwrap_or("?")
            ),
            Op::Rmw => write!(
                f,
                "rmw({},{},{},{})",
                self.tid,
                self.loc,
                self.val_r.as_deref().unwrap_or("?"),
                self.val_w.as_deref().unwrap_or("?")
            ),
        }
    }
}

/// One LTS transition `from --label--> to` over state indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub from: usize,
    pub label: Label,
    pub to: usize,
}

/// Labeled transition system of a single thread.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    pub tid: String,
    /// State names; a state is referred to by its index.
    pub states: Vec<String>,
    pub transitions: Vec<Transition>,
    pub init: usize,
    pub final_state: usize,
}

/// Set of LTS states.
pub type StateSet = BTreeSet<usize>;

impl Lts {
    /// Subset image of `set` under one label.
    pub fn step_states(&self, set: &StateSet, lab: &Label) -> StateSet {
        self.transitions
            .iter()
            .filter(|t| set.contains(&t.from) && t.label.same_access(lab))
            .map(|t| t.to)
            .collect()
    }

    /// States reached from `{init}` by the word.
    pub fn reach_set(&self, word: &[Label]) -> StateSet {
        let mut set = StateSet::from([self.init]);
        for lab in word {
            if set.is_empty() {
                break;
            }
            set = self.step_states(&set, lab);
        }
        set
    }

    /// True iff iterating `step_states` from `{init}` over `word` yields a set containing `q`.
    pub fn word_reaches(&self, word: &[Label], q: usize) -> bool {
        self.reach_set(word).contains(&q)
    }

    /// True iff `word` labels some path from `init`.
    pub fn accepts_prefix(&self, word: &[Label]) -> bool {
        !self.reach_set(word).is_empty()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }
}

/// Incremental LTS constructor that registers states in first-use order.
///
/// `init` and `final` are registered first, so text serialization followed by
/// parsing reproduces the same state numbering.
#[derive(Clone, Debug)]
pub struct LtsBuilder {
    tid: String,
    states: Vec<String>,
    index: HashMap<String, usize>,
    transitions: Vec<Transition>,
    seen: HashSet<Transition>,
    init: usize,
    final_state: usize,
}

impl LtsBuilder {
    pub fn new(tid: &str, init: &str, final_state: &str) -> Self {
        let mut b = LtsBuilder {
            tid: tid.into(),
            states: Vec::new(),
            index: HashMap::new(),
            transitions: Vec::new(),
            seen: HashSet::new(),
            init: 0,
            final_state: 0,
        };
        b.init = b.state(init);
        b.final_state = b.state(final_state);
        b
    }

    /// Index of the named state, registering it if new.
    pub fn state(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.states.len();
        self.states.push(name.into());
        self.index.insert(name.into(), i);
        i
    }

    /// Adds a transition; duplicates are ignored. The label's tid is overwritten.
    pub fn add(&mut self, from: &str, label: Label, to: &str) {
        let from = self.state(from);
        let to = self.state(to);
        let t = Transition {
            from,
            label: label.with_tid(&self.tid),
            to,
        };
        if self.seen.insert(t.clone()) {
            self.transitions.push(t);
        }
    }

    pub fn build(self) -> Lts {
        Lts {
            tid: self.tid,
            states: self.states,
            transitions: self.transitions,
            init: self.init,
            final_state: self.final_state,
        }
    }
}

/// Per-thread LTS states, one entry per thread in program order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateVector(pub Vec<usize>);

/// Validation failures of a program built in memory.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate thread `{0}`")]
    DuplicateThread(String),
    #[error("thread id `{0}` is reserved")]
    ReservedThread(String),
    #[error("undeclared location `{0}`")]
    UndeclaredLocation(String),
    #[error("undeclared value `{0}`")]
    UndeclaredValue(String),
    #[error("undeclared thread `{0}`")]
    UndeclaredThread(String),
    #[error("malformed label {0}")]
    MalformedLabel(String),
    #[error("location `{0}` has no initial value")]
    MissingInitValue(String),
    #[error("state index out of range in thread `{0}`")]
    BadState(String),
    #[error("invalid program json: {0}")]
    Json(String),
}

/// A concurrent program: the parallel composition of its threads' LTSs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub threads: Vec<Lts>,
    pub locs: Vec<String>,
    pub vals: Vec<String>,
    pub init_vals: BTreeMap<String, String>,
}

impl Program {
    pub fn thread(&self, tid: &str) -> Option<&Lts> {
        self.threads.iter().find(|t| t.tid == tid)
    }

    pub fn thread_index(&self, tid: &str) -> Option<usize> {
        self.threads.iter().position(|t| t.tid == tid)
    }

    pub fn has_loc(&self, loc: &str) -> bool {
        self.locs.iter().any(|l| l == loc)
    }

    pub fn has_val(&self, v: &str) -> bool {
        self.vals.iter().any(|x| x == v)
    }

    /// Initial value of a location.
    pub fn init_value(&self, loc: &str) -> &str {
        self.init_vals
            .get(loc)
            .map(String::as_str)
            .unwrap_or(DEFAULT_INIT_VALUE)
    }

    /// Vector of all thread init states.
    pub fn initial_vector(&self) -> StateVector {
        StateVector(self.threads.iter().map(|t| t.init).collect())
    }

    /// Vector of all thread final states.
    pub fn final_vector(&self) -> StateVector {
        StateVector(self.threads.iter().map(|t| t.final_state).collect())
    }

    /// Checks the structural invariants of the program.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut tids = HashSet::new();
        for t in &self.threads {
            if t.tid == INIT_TID {
                return Err(ModelError::ReservedThread(t.tid.clone()));
            }
            if !tids.insert(t.tid.as_str()) {
                return Err(ModelError::DuplicateThread(t.tid.clone()));
            }
            if t.init >= t.states.len() || t.final_state >= t.states.len() {
                return Err(ModelError::BadState(t.tid.clone()));
            }
            for tr in &t.transitions {
                if tr.from >= t.states.len() || tr.to >= t.states.len() {
                    return Err(ModelError::BadState(t.tid.clone()));
                }
                let l = &tr.label;
                if l.tid != t.tid {
                    return Err(ModelError::UndeclaredThread(l.tid.clone()));
                }
                if !l.is_well_formed() {
                    return Err(ModelError::MalformedLabel(l.to_string()));
                }
                if !self.has_loc(&l.loc) {
                    return Err(ModelError::UndeclaredLocation(l.loc.clone()));
                }
                for v in l.val_r.iter().chain(l.val_w.iter()) {
                    if !self.has_val(v) {
                        return Err(ModelError::UndeclaredValue(v.clone()));
                    }
                }
            }
        }
        for loc in &self.locs {
            match self.init_vals.get(loc) {
                Some(v) if self.has_val(v) => {}
                Some(v) => return Err(ModelError::UndeclaredValue(v.clone())),
                None => return Err(ModelError::MissingInitValue(loc.clone())),
            }
        }
        for loc in self.init_vals.keys() {
            if !self.has_loc(loc) {
                return Err(ModelError::UndeclaredLocation(loc.clone()));
            }
        }
        Ok(())
    }

    /// Number of states of the largest thread.
    pub fn max_states(&self) -> usize {
        self.threads
            .iter()
            .map(|t| t.states.len())
            .max()
            .unwrap_or(0)
    }
}

// ===== Text format =====

/// Error raised by [`parse_program`], always tagged with a 1-based line number.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared location `{name}`")]
    UndeclaredLocation { line: usize, name: String },
    #[error("line {line}: undeclared value `{name}`")]
    UndeclaredValue { line: usize, name: String },
    #[error("line {line}: undeclared thread: transition outside any thread block")]
    UndeclaredThread { line: usize },
    #[error("line {line}: thread `{tid}` declared twice")]
    DuplicateThread { line: usize, tid: String },
    #[error("line {line}: thread `{tid}` has no init state")]
    MissingInit { line: usize, tid: String },
    #[error("line {line}: thread `{tid}` has no final state")]
    MissingFinal { line: usize, tid: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UndeclaredLocation { line, .. }
            | ParseError::UndeclaredValue { line, .. }
            | ParseError::UndeclaredThread { line }
            | ParseError::DuplicateThread { line, .. }
            | ParseError::MissingInit { line, .. }
            | ParseError::MissingFinal { line, .. } => *line,
        }
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

struct RawThread {
    builder: LtsBuilder,
}

/// Parses the line-oriented program format.
///
/// ```text
/// locs x y
/// vals 0 1
/// init x=0 y=0
/// thread t1 init q0 final q2
///   q0 q1 w x 1
///   q1 q2 w y 1
/// ```
///
/// `#` starts a comment. RMW transitions are written `q a b rmw x 0 1`.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut locs: Vec<String> = Vec::new();
    let mut vals: Vec<String> = Vec::new();
    let mut inits: Vec<(usize, String, String)> = Vec::new();
    let mut threads: Vec<RawThread> = Vec::new();
    let mut pending: Vec<(usize, usize, Vec<String>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some(&head) = toks.first() else { continue };
        match head {
            "locs" => {
                for t in &toks[1..] {
                    if locs.iter().any(|l| l == t) {
                        return Err(syntax(line, format!("location `{t}` declared twice")));
                    }
                    locs.push(t.to_string());
                }
            }
            "vals" => {
                for t in &toks[1..] {
                    if vals.iter().any(|v| v == t) {
                        return Err(syntax(line, format!("value `{t}` declared twice")));
                    }
                    vals.push(t.to_string());
                }
            }
            "init" => {
                for t in &toks[1..] {
                    let (l, v) = t
                        .split_once('=')
                        .ok_or_else(|| syntax(line, format!("expected loc=value, got `{t}`")))?;
                    if l.is_empty() || v.is_empty() {
                        return Err(syntax(line, format!("expected loc=value, got `{t}`")));
                    }
                    inits.push((line, l.to_string(), v.to_string()));
                }
            }
            "thread" => {
                let tid = toks
                    .get(1)
                    .ok_or_else(|| syntax(line, "thread needs a name"))?
                    .to_string();
                if tid == INIT_TID {
                    return Err(syntax(line, format!("thread id `{tid}` is reserved")));
                }
                if threads.iter().any(|t| t.builder.tid == tid) {
                    return Err(ParseError::DuplicateThread { line, tid });
                }
                let mut init = None;
                let mut fin = None;
                let mut k = 2;
                while k < toks.len() {
                    let key = toks[k];
                    let val = toks
                        .get(k + 1)
                        .ok_or_else(|| syntax(line, format!("`{key}` needs a state name")))?;
                    match key {
                        "init" => init = Some(val.to_string()),
                        "final" => fin = Some(val.to_string()),
                        _ => return Err(syntax(line, format!("unexpected `{key}`"))),
                    }
                    k += 2;
                }
                let init = init.ok_or_else(|| ParseError::MissingInit {
                    line,
                    tid: tid.clone(),
                })?;
                let fin = fin.ok_or_else(|| ParseError::MissingFinal {
                    line,
                    tid: tid.clone(),
                })?;
                threads.push(RawThread {
                    builder: LtsBuilder::new(&tid, &init, &fin),
                });
            }
            _ => {
                if threads.is_empty() {
                    return Err(ParseError::UndeclaredThread { line });
                }
                pending.push((
                    line,
                    threads.len() - 1,
                    toks.iter().map(|s| s.to_string()).collect(),
                ));
            }
        }
    }

    let loc_set: HashSet<&str> = locs.iter().map(String::as_str).collect();
    let mut val_set: HashSet<String> = vals.iter().cloned().collect();
    let mut init_vals = BTreeMap::new();
    for (line, l, v) in inits {
        if !loc_set.contains(l.as_str()) {
            return Err(ParseError::UndeclaredLocation { line, name: l });
        }
        if !val_set.contains(&v) {
            return Err(ParseError::UndeclaredValue { line, name: v });
        }
        if init_vals.insert(l.clone(), v).is_some() {
            return Err(syntax(line, format!("location `{l}` initialized twice")));
        }
    }
    for l in &locs {
        if !init_vals.contains_key(l) {
            if val_set.insert(DEFAULT_INIT_VALUE.to_string()) {
                vals.push(DEFAULT_INIT_VALUE.to_string());
            }
            init_vals.insert(l.clone(), DEFAULT_INIT_VALUE.to_string());
        }
    }

    for (line, ti, toks) in pending {
        if toks.len() < 5 {
            return Err(syntax(line, "transition needs `from to op loc value...`"));
        }
        let (from, to, op, loc) = (&toks[0], &toks[1], toks[2].as_str(), &toks[3]);
        let args = &toks[4..];
        let tid = threads[ti].builder.tid.clone();
        let label = match (op, args.len()) {
            ("r" | "read", 1) => Label::read(&tid, loc, &args[0]),
            ("w" | "write", 1) => Label::write(&tid, loc, &args[0]),
            ("rmw", 2) => Label::rmw(&tid, loc, &args[0], &args[1]),
            ("r" | "read" | "w" | "write", _) => {
                return Err(syntax(line, format!("`{op}` takes exactly one value")))
            }
            ("rmw", _) => return Err(syntax(line, "`rmw` takes exactly two values")),
            _ => return Err(syntax(line, format!("unknown operation `{op}`"))),
        };
        if !loc_set.contains(loc.as_str()) {
            return Err(ParseError::UndeclaredLocation {
                line,
                name: loc.clone(),
            });
        }
        for v in args {
            if !val_set.contains(v) {
                return Err(ParseError::UndeclaredValue {
                    line,
                    name: v.clone(),
                });
            }
        }
        threads[ti].builder.add(from, label, to);
    }

    let program = Program {
        threads: threads.into_iter().map(|t| t.builder.build()).collect(),
        locs,
        vals,
        init_vals,
    };
    Ok(program)
}

/// Renders a program in the text format accepted by [`parse_program`].
pub fn program_to_text(p: &Program) -> String {
    let mut out = String::new();
    out.push_str("locs");
    for l in &p.locs {
        out.push(' ');
        out.push_str(l);
    }
    out.push_str("\nvals");
    for v in &p.vals {
        out.push(' ');
        out.push_str(v);
    }
    out.push_str("\ninit");
    for l in &p.locs {
        out.push_str(&format!(" {}={}", l, p.init_value(l)));
    }
    out.push('\n');
    for t in &p.threads {
        out.push_str(&format!(
            "thread {} init {} final {}\n",
            t.tid, t.states[t.init], t.states[t.final_state]
        ));
        for tr in &t.transitions {
            let l = &tr.label;
            let vals = match l.op {
                Op::Read => l.val_r.clone().unwrap_or_default(),
                Op::Write => l.val_w.clone().unwrap_or_default(),
                Op::Rmw => format!(
                    "{} {}",
                    l.val_r.as_deref().unwrap_or(""),
                    l.val_w.as_deref().unwrap_or("")
                ),
            };
            out.push_str(&format!(
                "  {} {} {} {} {}\n",
                t.states[tr.from], t.states[tr.to], l.op, l.loc, vals
            ));
        }
    }
    out
}

// ===== JSON format =====

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    from: String,
    to: String,
    op: Op,
    loc: String,
    #[serde(rename = "valR", default, skip_serializing_if = "Option::is_none")]
    val_r: Option<String>,
    #[serde(rename = "valW", default, skip_serializing_if = "Option::is_none")]
    val_w: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ThreadJson {
    tid: String,
    init: String,
    #[serde(rename = "final")]
    final_state: String,
    states: Vec<String>,
    transitions: Vec<TransitionJson>,
}

#[derive(Serialize, Deserialize)]
struct ProgramJson {
    locs: Vec<String>,
    vals: Vec<String>,
    init: BTreeMap<String, String>,
    threads: Vec<ThreadJson>,
}

/// Canonical JSON rendering with a fixed key order.
pub fn program_to_json(p: &Program) -> serde_json::Value {
    let pj = ProgramJson {
        locs: p.locs.clone(),
        vals: p.vals.clone(),
        init: p.init_vals.clone(),
        threads: p
            .threads
            .iter()
            .map(|t| ThreadJson {
                tid: t.tid.clone(),
                init: t.states[t.init].clone(),
                final_state: t.states[t.final_state].clone(),
                states: t.states.clone(),
                transitions: t
                    .transitions
                    .iter()
                    .map(|tr| TransitionJson {
                        from: t.states[tr.from].clone(),
                        to: t.states[tr.to].clone(),
                        op: tr.label.op,
                        loc: tr.label.loc.clone(),
                        val_r: tr.label.val_r.clone(),
                        val_w: tr.label.val_w.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_value(pj).expect("program json is always serializable")
}

/// Inverse of [`program_to_json`]; validates the result.
pub fn program_from_json(v: &serde_json::Value) -> Result<Program, ModelError> {
    let pj: ProgramJson =
        serde_json::from_value(v.clone()).map_err(|e| ModelError::Json(e.to_string()))?;
    let mut threads = Vec::new();
    for tj in pj.threads {
        let idx = |name: &str| {
            tj.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ModelError::BadState(tj.tid.clone()))
        };
        let init = idx(&tj.init)?;
        let final_state = idx(&tj.final_state)?;
        let mut transitions = Vec::new();
        for t in &tj.transitions {
            transitions.push(Transition {
                from: idx(&t.from)?,
                to: idx(&t.to)?,
                label: Label {
                    op: t.op,
                    tid: tj.tid.clone(),
                    loc: t.loc.clone(),
                    val_r: t.val_r.clone(),
                    val_w: t.val_w.clone(),
                },
            });
        }
        threads.push(Lts {
            tid: tj.tid.clone(),
            states: tj.states.clone(),
            transitions,
            init,
            final_state,
        });
    }
    let p = Program {
        threads,
        locs: pj.locs,
        vals: pj.vals,
        init_vals: pj.init,
    };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const MP: &str = "locs x y\nvals 0 1\ninit x=0 y=0\n\
        thread t1 init q0 final q2\n  q0 q1 w x 1\n  q1 q2 w y 1\n\
        thread t2 init p0 final p2\n  p0 p1 r y 1\n  p1 p2 r x 1\n";

    #[test]
    fn parses_message_passing() {
        let p = parse_program(MP).unwrap();
        assert_eq!(p.threads.len(), 2);
        assert_eq!(p.locs.len(), 2);
        assert_eq!(p.vals.len(), 2);
        p.validate().unwrap();
    }

    #[test]
    fn empty_thread_accepts_only_empty_word() {
        let p = parse_program("locs x\nvals 0 1\nthread t init q final q\n").unwrap();
        let t = &p.threads[0];
        assert!(t.word_reaches(&[], t.final_state));
        assert!(!t.word_reaches(&[Label::write("t", "x", "1")], t.final_state));
    }

    #[test]
    fn undeclared_value_is_reported() {
        let err =
            parse_program("locs x\nvals 0 1\nthread t init a final b\n a b w x 7\n").unwrap_err();
        assert!(err.to_string().contains("undeclared value"), "{err}");
        assert_eq!(err.line(), 4);
    }

    #[test]
    fn undeclared_location_and_thread() {
        let e = parse_program("locs x\nvals 0\nthread t init a final b\n a b w y 0\n").unwrap_err();
        assert!(matches!(e, ParseError::UndeclaredLocation { line: 4, .. }));
        let e = parse_program("locs x\nvals 0\n a b w x 0\n").unwrap_err();
        assert!(matches!(e, ParseError::UndeclaredThread { line: 3 }));
    }

    #[test]
    fn missing_init_or_final() {
        let e = parse_program("locs x\nthread t final b\n").unwrap_err();
        assert!(matches!(e, ParseError::MissingInit { line: 2, .. }));
        let e = parse_program("locs x\nthread t init a\n").unwrap_err();
        assert!(matches!(e, ParseError::MissingFinal { line: 2, .. }));
    }

    #[test]
    fn syntax_error_carries_line() {
        let e = parse_program("locs x\nvals 0\nthread t init a final b\n a b w x\n").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 4, .. }));
        let e =
            parse_program("locs x\nvals 0\nthread t init a final b\n a b jump x 0\n").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 4, .. }));
    }

    #[test]
    fn rmw_syntax_and_comments() {
        let p = parse_program(
            "# header\nlocs x\nvals 0 1\nthread t init a final b # trailing\n a b rmw x 0 1\n",
        )
        .unwrap();
        let l = &p.threads[0].transitions[0].label;
        assert_eq!(l, &Label::rmw("t", "x", "0", "1"));
    }

    #[test]
    fn default_init_value_is_added() {
        let p = parse_program("locs x\nvals 1\nthread t init a final a\n").unwrap();
        assert_eq!(p.init_value("x"), "0");
        assert!(p.has_val("0"));
    }

    #[test]
    fn step_states_examples() {
        let p = parse_program(
            "locs x\nvals 0 1\nthread t init q0 final q2\n q0 q1 w x 1\n q0 q2 w x 1\n",
        )
        .unwrap();
        let t = &p.threads[0];
        let s0 = StateSet::from([t.init]);
        let q1 = t.state_index("q1").unwrap();
        let q2 = t.state_index("q2").unwrap();
        assert_eq!(
            t.step_states(&s0, &Label::write("t", "x", "1")),
            StateSet::from([q1, q2])
        );
        assert!(t.step_states(&s0, &Label::read("t", "x", "1")).is_empty());
    }

    #[test]
    fn mp_reader_words() {
        let p = parse_program(MP).unwrap();
        let t2 = &p.threads[1];
        let good = [Label::read("t2", "y", "1"), Label::read("t2", "x", "1")];
        let bad = [Label::read("t2", "y", "1"), Label::read("t2", "x", "0")];
        assert!(t2.word_reaches(&good, t2.final_state));
        assert!(!t2.word_reaches(&bad, t2.final_state));
        assert!(t2.word_reaches(&[], t2.init));
    }

    #[test]
    fn text_and_json_round_trip() {
        let p = parse_program(MP).unwrap();
        assert_eq!(parse_program(&program_to_text(&p)).unwrap(), p);
        assert_eq!(program_from_json(&program_to_json(&p)).unwrap(), p);
    }
}
