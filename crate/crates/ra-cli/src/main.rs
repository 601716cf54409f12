//! `ra-reach`: command-line front end for release/acquire reachability.
//!
//! Exit codes: verdict-specific codes per verb (0 and 1, plus 2 for an
//! inconclusive `reach`), 64 for usage errors, 65 for unreadable or malformed
//! input, 70 for internal failures.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ra_core::consistency::check_ra;
use ra_core::decider::{bounded_reach, enumerate_graphs, naive_reach, SearchConfig};
use ra_core::graph::{check_alphabet, reaches, ExecutionGraph};
use ra_core::model::{parse_program, program_to_json, program_to_text, Program};
use ra_core::pcp::{
    check_monotonicity, check_no_skipping, compile_pcp, parse_instance, pcp_witness, PcpError,
};
use ra_core::reduction::{
    find_collapsible, reduce_fixpoint, reduce_logged, small_model_bound, summary_space,
};
use ra_core::trace::{counts, ContextBudget, Trace, TraceError};

use config::{parse_config, Config};

const EXIT_USAGE: u8 = 64;
const EXIT_INPUT: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser, Debug)]
#[command(
    name = "ra-reach",
    version,
    about = "Release/acquire consistency checking and bounded reachability"
)]
struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomised choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write a DOT rendering of the produced graph.
    #[arg(long, global = true, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// `key = value` file presetting budgets; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check an execution graph (or the graph of a trace) against the RA axioms.
    Check { graph: PathBuf },
    /// Validate a trace and report its context and RMW counts.
    TraceValidate {
        trace: PathBuf,
        /// Also check the trace's alphabet against a program.
        #[arg(long)]
        program: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Collapse one pair (or all pairs with --fixpoint) of a trace.
    Reduce {
        trace: PathBuf,
        #[arg(long)]
        program: PathBuf,
        /// Enable the RMW condition.
        #[arg(long)]
        rmw: bool,
        /// Reduce until no collapsible pair remains.
        #[arg(long)]
        fixpoint: bool,
        /// Also write the reduced trace to a file.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Decide reachability of the all-final state vector.
    Reach {
        program: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Cap on non-init events.
        #[arg(long)]
        event_cap: Option<usize>,
        /// Use exhaustive graph enumeration (requires an event cap).
        #[arg(long)]
        naive: bool,
        /// Write the witness trace when reachable.
        #[arg(long, value_name = "FILE")]
        emit_witness: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Give up after this many search nodes.
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// List every RA-consistent graph of a program up to an event cap.
    Enumerate {
        program: PathBuf,
        #[arg(long)]
        max_events: Option<usize>,
    },
    /// PCP gadget tooling.
    Pcp {
        #[command(subcommand)]
        cmd: PcpCmd,
    },
    /// Print the small-model event bound for a program.
    Bound {
        #[arg(long)]
        program: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Subcommand, Debug)]
enum PcpCmd {
    /// Compile an instance into the gadget program.
    Compile { instance: PathBuf },
    /// Build the completeness witness for a solution.
    Witness {
        instance: PathBuf,
        /// Comma-separated 1-based pair indices.
        #[arg(long, value_delimiter = ',', required = true)]
        solution: Vec<usize>,
        /// Run the consistency, reachability, no-skipping and monotonicity checks on the witness.
        #[arg(long)]
        check: bool,
    },
    /// Run the no-skipping and monotonicity checks on a graph or trace.
    Audit { graph: PathBuf },
}

#[derive(Args, Debug, Clone, Copy)]
struct BudgetArgs {
    /// Context bound.
    #[arg(long)]
    contexts: Option<usize>,
    /// RMW bound.
    #[arg(long)]
    rmws: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

type CliResult = Result<u8, CliError>;

fn input<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(input(path))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(input(path))
}

fn read_program(path: &Path) -> Result<Program, CliError> {
    parse_program(&read_text(path)?).map_err(input(path))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialise")
}

/// A graph file holds either a bare graph or a trace embedding one.
fn read_graph(path: &Path) -> Result<ExecutionGraph, CliError> {
    let v = read_json(path)?;
    if v.get("runs").is_some() && v.get("graph").is_some() {
        Trace::from_json(&v)
            .map(|t| t.into_parts().0)
            .map_err(input(path))
    } else {
        ExecutionGraph::from_json(&v).map_err(input(path))
    }
}

struct Ctx {
    json: bool,
    seed: u64,
    dot: Option<PathBuf>,
    cfg: Config,
}

impl Ctx {
    fn emit_dot(&self, g: &ExecutionGraph) -> Result<(), CliError> {
        match &self.dot {
            Some(p) => write_file(p, &g.to_dot()),
            None => Ok(()),
        }
    }

    fn budget(&self, b: BudgetArgs) -> Result<ContextBudget, CliError> {
        let k_c = b.contexts.or(self.cfg.contexts).ok_or_else(|| {
            CliError::Usage("--contexts is required (or set `contexts` in the config file)".into())
        })?;
        let k_rmw = b.rmws.or(self.cfg.rmws).unwrap_or(0);
        ContextBudget::new(k_c, k_rmw).map_err(|e| CliError::Usage(e.to_string()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli));
    match outcome {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}

fn run(cli: Cli) -> CliResult {
    let cfg = match &cli.config {
        Some(p) => parse_config(&read_text(p)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => Config::default(),
    };
    let ctx = Ctx {
        json: cli.json || cfg.json.unwrap_or(false),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        dot: cli.dot.clone(),
        cfg,
    };
    match cli.cmd {
        Cmd::Check { graph } => cmd_check(&ctx, &graph),
        Cmd::TraceValidate {
            trace,
            program,
            budget,
        } => cmd_trace_validate(&ctx, &trace, program.as_deref(), budget),
        Cmd::Reduce {
            trace,
            program,
            rmw,
            fixpoint,
            output,
        } => cmd_reduce(&ctx, &trace, &program, rmw, fixpoint, output.as_deref()),
        Cmd::Reach {
            program,
            budget,
            event_cap,
            naive,
            emit_witness,
            jobs,
            max_nodes,
        } => cmd_reach(
            &ctx,
            &program,
            ReachOpts {
                budget,
                event_cap,
                naive,
                emit_witness,
                jobs,
                max_nodes,
            },
        ),
        Cmd::Enumerate {
            program,
            max_events,
        } => cmd_enumerate(&ctx, &program, max_events),
        Cmd::Pcp { cmd } => match cmd {
            PcpCmd::Compile { instance } => cmd_pcp_compile(&ctx, &instance),
            PcpCmd::Witness {
                instance,
                solution,
                check,
            } => cmd_pcp_witness(&ctx, &instance, &solution, check),
            PcpCmd::Audit { graph } => cmd_pcp_audit(&ctx, &graph),
        },
        Cmd::Bound { program, budget } => cmd_bound(&ctx, &program, budget),
    }
}

fn cmd_check(ctx: &Ctx, path: &Path) -> CliResult {
    let g = read_graph(path)?;
    ctx.emit_dot(&g)?;
    let v = check_ra(&g);
    let body = serde_json::to_value(&v).expect("verdicts serialise");
    if v.is_consistent() {
        println!(
            "{}",
            if ctx.json {
                body.to_string()
            } else {
                "consistent".into()
            }
        );
        Ok(0)
    } else {
        println!("{body}");
        Ok(1)
    }
}

fn cmd_trace_validate(ctx: &Ctx, path: &Path, program: Option<&Path>, b: BudgetArgs) -> CliResult {
    let v = read_json(path)?;
    let t = match Trace::from_json(&v) {
        Ok(t) => t,
        Err(e @ (TraceError::Json(_) | TraceError::Graph(_))) => {
            return Err(CliError::Input(format!("{}: {e}", path.display())))
        }
        Err(e) => {
            report(
                ctx,
                json!({"valid": false, "error": e.to_string()}),
                &format!("invalid: {e}"),
            );
            return Ok(1);
        }
    };
    ctx.emit_dot(t.graph())?;
    if let Some(p) = program {
        let prog = read_program(p)?;
        if let Err(e) = check_alphabet(t.graph(), &prog) {
            report(
                ctx,
                json!({"valid": false, "error": e.to_string()}),
                &format!("invalid: {e}"),
            );
            return Ok(1);
        }
    }
    let (l, n) = counts(&t);
    let mut out =
        json!({"valid": true, "contexts": l, "rmws": n, "events": t.graph().non_init_len()});
    let mut code = 0;
    if b.contexts.is_some() || b.rmws.is_some() {
        let budget = ctx.budget(b)?;
        let ok = budget.admits(&t);
        out["withinBudget"] = ok.into();
        if !ok {
            code = 1;
        }
    }
    let human = match out.get("withinBudget") {
        Some(Value::Bool(false)) => format!("valid, {l} contexts, {n} rmws, exceeds budget"),
        _ => format!("valid, {l} contexts, {n} rmws"),
    };
    report(ctx, out, &human);
    Ok(code)
}

fn report(ctx: &Ctx, v: Value, human: &str) {
    if ctx.json {
        println!("{v}");
    } else {
        println!("{human}");
    }
}

fn cmd_reduce(
    ctx: &Ctx,
    path: &Path,
    program: &Path,
    rmw: bool,
    fixpoint: bool,
    output: Option<&Path>,
) -> CliResult {
    let p = read_program(program)?;
    let t = Trace::from_json(&read_json(path)?).map_err(input(path))?;
    check_alphabet(t.graph(), &p).map_err(input(path))?;
    let internal = |e: ra_core::reduction::ReductionError| CliError::Internal(e.to_string());
    let (out, steps) = if fixpoint {
        reduce_fixpoint(&p, &t, rmw).map_err(internal)?
    } else {
        match find_collapsible(&p, &t, rmw).map_err(internal)? {
            Some(pair) => {
                let (r, s) = reduce_logged(&p, &t, pair, rmw).map_err(internal)?;
                (r, vec![s])
            }
            None => (t.clone(), Vec::new()),
        }
    };
    ctx.emit_dot(out.graph())?;
    let trace_json = out.to_json();
    if let Some(o) = output {
        write_file(o, &pretty(&trace_json))?;
    }
    if ctx.json {
        println!("{}", json!({"steps": steps, "trace": trace_json}));
    } else {
        if steps.is_empty() {
            println!("no collapsible pair");
        }
        for (k, s) in steps.iter().enumerate() {
            println!(
                "step {}: pair ({}, {}) in run {}; removed {:?}; rf rewires {:?}; mo swaps {:?}",
                k + 1,
                s.pair.e_i,
                s.pair.e_j,
                s.pair.run_index,
                s.removed,
                s.rewires,
                s.mo_swaps
            );
        }
        println!("{}", pretty(&trace_json));
    }
    Ok(0)
}

struct ReachOpts {
    budget: BudgetArgs,
    event_cap: Option<usize>,
    naive: bool,
    emit_witness: Option<PathBuf>,
    jobs: Option<usize>,
    max_nodes: Option<u64>,
}

fn cmd_reach(ctx: &Ctx, path: &Path, o: ReachOpts) -> CliResult {
    let budget = ctx.budget(o.budget)?;
    let event_cap = o.event_cap.or(ctx.cfg.event_cap);
    let jobs = o.jobs.or(ctx.cfg.jobs).unwrap_or(1);
    let max_nodes = o.max_nodes.or(ctx.cfg.max_nodes);
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    if event_cap == Some(0) {
        return Err(CliError::Usage("--event-cap must be at least 1".into()));
    }
    if o.naive && event_cap.is_none() {
        return Err(CliError::Usage("--naive needs --event-cap".into()));
    }
    let p = read_program(path)?;
    let verdict = if o.naive {
        naive_reach(&p, event_cap.unwrap_or_default())
    } else {
        let mut cfg = SearchConfig::new(budget)
            .with_seed(ctx.seed)
            .with_jobs(jobs);
        if let Some(c) = event_cap {
            cfg = cfg.with_event_cap(c);
        }
        if let Some(n) = max_nodes {
            cfg = cfg.with_max_nodes(n);
        }
        bounded_reach(&p, &cfg).map_err(|e| CliError::Usage(e.to_string()))?
    };
    if let Some(w) = &verdict.witness {
        ctx.emit_dot(w.graph())?;
        if let Some(f) = &o.emit_witness {
            write_file(f, &pretty(&w.to_json()))?;
        }
    }
    let human = match (&verdict.witness, verdict.status) {
        (Some(w), _) => {
            let (l, n) = counts(w);
            format!(
                "reachable ({l} contexts, {n} rmws, {} events)",
                w.graph().non_init_len()
            )
        }
        (None, ra_core::decider::ReachStatus::Inconclusive) => "inconclusive".into(),
        (None, _) => "unreachable within bound".into(),
    };
    report(ctx, verdict.to_json(), &human);
    Ok(verdict.status.exit_code() as u8)
}

fn cmd_enumerate(ctx: &Ctx, path: &Path, max_events: Option<usize>) -> CliResult {
    let max = max_events
        .or(ctx.cfg.event_cap)
        .ok_or_else(|| CliError::Usage("--max-events is required".into()))?;
    let p = read_program(path)?;
    let graphs = enumerate_graphs(&p, max);
    if let Some(d) = &ctx.dot {
        let all: String = graphs.iter().map(|g| g.to_dot()).collect();
        write_file(d, &all)?;
    }
    let target = p.final_vector();
    let reaching = graphs
        .iter()
        .filter(|g| reaches(g, &p, &target).unwrap_or(false))
        .count();
    if ctx.json {
        let list: Vec<Value> = graphs.iter().map(|g| g.to_json()).collect();
        println!(
            "{}",
            json!({"count": graphs.len(), "reachingFinal": reaching, "graphs": list})
        );
    } else {
        println!(
            "{} consistent graphs, {reaching} reach the final vector",
            graphs.len()
        );
    }
    Ok(0)
}

fn pcp_input(path: &Path) -> Result<ra_core::pcp::PcpInstance, CliError> {
    parse_instance(&read_text(path)?).map_err(input(path))
}

fn cmd_pcp_compile(ctx: &Ctx, path: &Path) -> CliResult {
    let gp = compile_pcp(&pcp_input(path)?);
    if ctx.json {
        println!("{}", program_to_json(&gp.program));
    } else {
        print!("{}", program_to_text(&gp.program));
    }
    Ok(0)
}

fn cmd_pcp_witness(ctx: &Ctx, path: &Path, solution: &[usize], check: bool) -> CliResult {
    let inst = pcp_input(path)?;
    let t = match pcp_witness(&inst, solution) {
        Ok(t) => t,
        Err(
            e
            @ (PcpError::InvalidSolution | PcpError::IndexOutOfRange(_) | PcpError::EmptySolution),
        ) => return Err(CliError::Input(e.to_string())),
        Err(e) => return Err(CliError::Internal(e.to_string())),
    };
    ctx.emit_dot(t.graph())?;
    println!("{}", pretty(&t.to_json()));
    if !check {
        return Ok(0);
    }
    let gp = compile_pcp(&inst);
    let g = t.graph();
    let internal = |e: PcpError| CliError::Internal(e.to_string());
    let consistent = check_ra(g).is_consistent();
    let term = reaches(g, &gp.program, &gp.program.final_vector())
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let noskip = check_no_skipping(g).map_err(internal)?.ok();
    let mono = check_monotonicity(g).map_err(internal)?.ok();
    eprintln!("consistent: {consistent}\nreaches all-term: {term}\nno-skipping: {noskip}\nmonotonicity: {mono}");
    Ok(if consistent && term && noskip && mono {
        0
    } else {
        1
    })
}

fn cmd_pcp_audit(ctx: &Ctx, path: &Path) -> CliResult {
    let g = read_graph(path)?;
    ctx.emit_dot(&g)?;
    let ns = check_no_skipping(&g).map_err(input(path))?;
    let mono = check_monotonicity(&g).map_err(input(path))?;
    let ok = ns.ok() && mono.ok();
    if ctx.json {
        println!(
            "{}",
            json!({"noSkipping": ns, "monotonicity": mono, "ok": ok})
        );
    } else {
        println!(
            "no-skipping: {} ({} rf edges, {} violations)",
            pass(ns.ok()),
            ns.edges_checked,
            ns.violations.len()
        );
        for c in &mono.checks {
            println!("{}: {}", c.name, pass(c.passed));
            for v in &c.violations {
                println!("  {v}");
            }
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_bound(ctx: &Ctx, path: &Path, b: BudgetArgs) -> CliResult {
    let budget = ctx.budget(b)?;
    let p = read_program(path)?;
    let bound = small_model_bound(&p, budget.k_c, budget.k_rmw);
    if ctx.json {
        println!(
            "{}",
            json!({"bound": bound.to_string(), "summarySpace": summary_space(&p).to_string(),
                   "contexts": budget.k_c, "rmws": budget.k_rmw})
        );
    } else {
        println!("{bound}");
    }
    Ok(0)
}
