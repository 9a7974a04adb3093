//! Command-line front end.
//!
//! Every subcommand writes one JSON report (or a text table with
//! `--pretty`). Exit status is 0 on success, 1 when the iteration fails or
//! does not converge, and 2 when the input is rejected.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use pipeloop_core::basis::fundamental_basis;
use pipeloop_core::certificates::{kantorovich_certificate, rheinboldt_certificate};
use pipeloop_core::diagnostics::{error_sequence, estimate_order};
use pipeloop_core::reference::tree_reference_flow;
use pipeloop_core::{
    inf_norm, BasisMode, CycleBasis, EdgeCycleMatrix, Error as CoreError, FlowNetwork, HcMode,
    IterationTrace, LoopSystem, Method, NodeOptions, NodeSystem, ReferenceFlow, SolveOptions,
};
use serde::Serialize;

use crate::document::{self, DocumentError, NetworkDocument};
use crate::report::{self, *};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pipeloop",
    version,
    about = "Loop-method analysis of pipe networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Hardy Cross update: all cycles at once, or one after another.
    #[arg(long, value_enum, global = true, default_value_t = HcModeArg::Simultaneous)]
    hc_mode: HcModeArg,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_residual: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_step: f64,
    /// Defaults to 100 for Newton-Raphson and 10000 for Hardy Cross.
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Starting point: a JSON file, a JSON array, or comma-separated numbers.
    #[arg(long, global = true, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Render a text table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Structural checks on a network document.
    Validate { input: String },
    /// Cycle basis, edge-cycle matrix and reference flow.
    Basis { input: String },
    /// Run Newton-Raphson or Hardy Cross on the loop equations.
    Solve {
        input: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Nr)]
        method: MethodArg,
    },
    /// A-priori convergence certificate at the start point.
    Certify {
        input: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Nr)]
        method: MethodArg,
        /// Use the sharper constants for face bases of planar networks.
        #[arg(long)]
        face_basis: bool,
    },
    /// Empirical convergence order of both methods.
    Rate { input: String },
    /// Newton iteration on node pressures; defaults to the two-vertex demo.
    NodeDemo { input: Option<String> },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Nr,
    Hc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HcModeArg {
    Simultaneous,
    Sweep,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Basis { .. } => "basis",
            Command::Solve { .. } => "solve",
            Command::Certify { .. } => "certify",
            Command::Rate { .. } => "rate",
            Command::NodeDemo { .. } => "node-demo",
        }
    }
}

#[derive(Debug)]
struct Failure {
    exit: i32,
    code: String,
    message: String,
}

impl Failure {
    fn input(code: &str, message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_INPUT,
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure {
            exit: if report::is_solver_error(&e) {
                EXIT_SOLVER
            } else {
                EXIT_INPUT
            },
            code: report::core_error_code(&e).to_string(),
            message: e.to_string(),
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        Failure::input(e.code(), e.to_string())
    }
}

/// A rendered report and the exit status it carries.
struct Outcome {
    body: String,
    exit: i32,
}

fn render<R: Serialize + Pretty>(r: &R, pretty: bool, exit: i32) -> Outcome {
    let body = if pretty {
        r.pretty()
    } else {
        let mut s = serde_json::to_string_pretty(r).expect("report serializes");
        s.push('\n');
        s
    };
    Outcome { body, exit }
}

/// Runs the command line with process stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };

    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(f) => {
            let _ = writeln!(err, "pipeloop {}: {}", cli.command.name(), f.message);
            let r = ErrorReport {
                command: cli.command.name().to_string(),
                error: ErrorBody {
                    code: f.code,
                    message: f.message,
                },
            };
            render(&r, cli.pretty, f.exit)
        }
    };

    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.body) {
                let _ = writeln!(err, "pipeloop: cannot write {path}: {e}");
                return EXIT_INPUT;
            }
        }
        None => {
            let _ = out.write_all(outcome.body.as_bytes());
        }
    }
    outcome.exit
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    if !(cli.tol_residual > 0.0) || !(cli.tol_step > 0.0) {
        return Err(Failure::input(
            "invalid_option",
            "tolerances must be positive",
        ));
    }
    if cli.max_iters == Some(0) {
        return Err(Failure::input(
            "invalid_option",
            "--max-iters must be at least 1",
        ));
    }
    match &cli.command {
        Command::Validate { input } => validate(cli, input),
        Command::Basis { input } => basis(cli, input),
        Command::Solve { input, method } => solve(cli, input, *method),
        Command::Certify {
            input,
            method,
            face_basis,
        } => certify(cli, input, *method, *face_basis),
        Command::Rate { input } => rate(cli, input),
        Command::NodeDemo { input } => node_demo(cli, input.as_deref()),
    }
}

fn solve_options(cli: &Cli) -> SolveOptions {
    SolveOptions {
        tol_residual: cli.tol_residual,
        tol_step: cli.tol_step,
        max_iters: cli.max_iters,
        hc_mode: match cli.hc_mode {
            HcModeArg::Simultaneous => HcMode::Simultaneous,
            HcModeArg::Sweep => HcMode::Sweep,
        },
        record_flows: false,
    }
}

fn hc_mode_name(mode: HcMode) -> &'static str {
    match mode {
        HcMode::Simultaneous => "simultaneous",
        HcMode::Sweep => "sweep",
    }
}

fn parse_vector(arg: &str) -> Result<Vec<f64>, Failure> {
    let trimmed = arg.trim();
    let text = if trimmed.starts_with('[') {
        trimmed.to_string()
    } else if std::path::Path::new(trimmed).is_file() {
        std::fs::read_to_string(trimmed)
            .map_err(|e| Failure::input("io_error", format!("cannot read {trimmed}: {e}")))?
    } else {
        format!("[{trimmed}]")
    };
    serde_json::from_str::<Vec<f64>>(&text)
        .map_err(|e| Failure::input("invalid_x0", format!("cannot parse --x0: {e}")))
}

/// The loop system built from a document, together with its start point.
struct Setup {
    doc: NetworkDocument,
    basis: CycleBasis,
    basis_source: &'static str,
    system: LoopSystem,
    x0: Vec<f64>,
}

fn setup(cli: &Cli, input: &str) -> Result<Setup, Failure> {
    let doc = document::load(input)?;
    let net = &doc.network;
    if !net.is_connected() {
        return Err(CoreError::Disconnected.into());
    }
    let (basis, basis_source) = match &doc.cycle_basis {
        Some(b) => (b.clone(), "document"),
        None => (fundamental_basis(net)?, "fundamental"),
    };
    let matrix = EdgeCycleMatrix::new(net, &basis)?;
    let psi = match &doc.reference_flow {
        Some(psi) => ReferenceFlow::new(net, psi.clone())?,
        None => tree_reference_flow(net)?,
    };
    let system = LoopSystem::new(net, matrix, psi)?;
    let x0 = match &cli.x0 {
        Some(arg) => parse_vector(arg)?,
        None => doc.x0.clone().unwrap_or_else(|| vec![0.0; system.dim()]),
    };
    if x0.len() != system.dim() {
        return Err(CoreError::DimensionMismatch {
            what: "x0",
            expected: system.dim(),
            found: x0.len(),
        }
        .into());
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NonFinite("x0").into());
    }
    Ok(Setup {
        doc,
        basis,
        basis_source,
        system,
        x0,
    })
}

fn validate(cli: &Cli, input: &str) -> Result<Outcome, Failure> {
    let doc = document::load(input)?;
    let v = doc.network.validate();
    let r = ValidateReport {
        command: "validate",
        ok: v.is_ok(),
        vertices: v.vertices,
        edges: v.edges,
        balanced: v.balanced,
        imbalance: v.imbalance,
        connected: v.connected,
        biconnected: v.biconnected,
        parallel_edges: v.parallel_edges,
        cycle_rank: v.cycle_rank,
    };
    let exit = if v.is_ok() { EXIT_OK } else { EXIT_INPUT };
    Ok(render(&r, cli.pretty, exit))
}

fn basis(cli: &Cli, input: &str) -> Result<Outcome, Failure> {
    let s = setup(cli, input)?;
    let a = s.system.matrix();
    let r = BasisReport {
        command: "basis",
        source: s.basis_source,
        cycles: a.cycles(),
        total_length: a.total_length(),
        min_cycle_length: a.min_cycle_len(),
        face_basis: a.is_face_basis(),
        basis: s
            .basis
            .cycles()
            .iter()
            .map(|c| {
                c.iter()
                    .map(|oe| CycleEntry {
                        edge: oe.edge,
                        dir: oe.dir,
                    })
                    .collect()
            })
            .collect(),
        matrix: (0..a.edges()).map(|e| a.row(e).to_vec()).collect(),
        reference_flow: s.system.reference_flow().as_slice().to_vec(),
    };
    Ok(render(&r, cli.pretty, EXIT_OK))
}

fn max_conservation_defect(net: &FlowNetwork, sys: &LoopSystem, trace: &IterationTrace) -> f64 {
    trace
        .iterates
        .iter()
        .map(|x| inf_norm(&net.conservation_residual(&sys.flows(x))))
        .fold(0.0, f64::max)
}

fn solve(cli: &Cli, input: &str, method: MethodArg) -> Result<Outcome, Failure> {
    let s = setup(cli, input)?;
    let opts = solve_options(cli);
    let (method, name) = match method {
        MethodArg::Nr => (Method::NewtonRaphson, "nr"),
        MethodArg::Hc => (Method::HardyCross, "hc"),
    };
    let trace = s.system.solve(&s.x0, method, &opts);
    let converged = trace.termination.is_converged();
    let r = SolveReport {
        command: "solve",
        method: name,
        hc_mode: (method == Method::HardyCross).then(|| hc_mode_name(opts.hc_mode)),
        basis_source: s.basis_source,
        termination: trace.termination.as_str(),
        converged,
        iterations: trace.iterations(),
        final_residual: trace.final_residual(),
        final_x: trace.last().to_vec(),
        final_flows: s.system.flows(trace.last()),
        conservation_defect: max_conservation_defect(&s.doc.network, &s.system, &trace),
        trace: trace_steps(&trace),
    };
    Ok(render(
        &r,
        cli.pretty,
        if converged { EXIT_OK } else { EXIT_SOLVER },
    ))
}

fn certify(cli: &Cli, input: &str, method: MethodArg, face: bool) -> Result<Outcome, Failure> {
    let s = setup(cli, input)?;
    let mode = if face {
        BasisMode::Face
    } else {
        BasisMode::General
    };
    let r = match method {
        MethodArg::Nr => {
            let c = kantorovich_certificate(&s.system, &s.x0, mode)?;
            CertificateReport {
                command: "certify",
                method: "nr",
                basis_mode: mode.as_str(),
                x0: s.x0,
                beta: c.beta,
                eta: c.eta,
                lipschitz: c.lipschitz,
                k_const: None,
                delta0: None,
                delta1: None,
                short_cycle_fallback: None,
                h: c.h,
                radius: c.radius,
                satisfied: c.satisfied,
            }
        }
        MethodArg::Hc => {
            let c = rheinboldt_certificate(&s.system, &s.x0, mode)?;
            CertificateReport {
                command: "certify",
                method: "hc",
                basis_mode: mode.as_str(),
                x0: s.x0,
                beta: c.beta,
                eta: c.eta,
                lipschitz: c.lipschitz,
                k_const: Some(c.k_const),
                delta0: Some(c.delta0),
                delta1: Some(c.delta1),
                short_cycle_fallback: Some(c.short_cycle_fallback),
                h: c.h,
                radius: c.radius,
                satisfied: c.satisfied,
            }
        }
    };
    Ok(render(&r, cli.pretty, EXIT_OK))
}

/// Residual accepted for the reference solution of `rate`.
const REFERENCE_RESIDUAL: f64 = 1e-13;

/// A tight solution for measuring errors: Newton from `x0`, or Hardy Cross
/// followed by Newton polishing when Newton alone does not get there.
pub fn reference_solution(sys: &LoopSystem, x0: &[f64]) -> Result<Vec<f64>, CoreError> {
    let tight = SolveOptions {
        tol_residual: REFERENCE_RESIDUAL,
        tol_step: 1e-16,
        ..SolveOptions::default()
    };
    let good = |t: &IterationTrace| t.final_residual() <= 1e-10;
    let nr = sys.solve(x0, Method::NewtonRaphson, &tight);
    if good(&nr) {
        return Ok(nr.last().to_vec());
    }
    let hc = sys.solve(x0, Method::HardyCross, &SolveOptions::default());
    if hc.termination.is_converged() {
        let polished = sys.solve(hc.last(), Method::NewtonRaphson, &tight);
        if good(&polished) {
            return Ok(polished.last().to_vec());
        }
        return Ok(hc.last().to_vec());
    }
    Err(CoreError::SingularJacobian)
}

fn rate(cli: &Cli, input: &str) -> Result<Outcome, Failure> {
    let s = setup(cli, input)?;
    let x_star = reference_solution(&s.system, &s.x0)?;
    let opts = solve_options(cli);
    let mut all_ok = true;
    let methods = [(Method::NewtonRaphson, "nr"), (Method::HardyCross, "hc")]
        .into_iter()
        .map(|(method, name)| {
            let trace = s.system.solve(&s.x0, method, &opts);
            let errors = error_sequence(&trace, &x_star);
            let est = estimate_order(&errors);
            all_ok &= est.is_ok();
            MethodRate::new(name, &trace, errors, est)
        })
        .collect();
    let r = RateReport {
        command: "rate",
        x_star,
        methods,
    };
    Ok(render(
        &r,
        cli.pretty,
        if all_ok { EXIT_OK } else { EXIT_SOLVER },
    ))
}

fn demo_network() -> FlowNetwork {
    FlowNetwork::new(2, [(1, 2, 1.0)], vec![0.0, 0.0]).expect("demo network is valid")
}

fn node_demo(cli: &Cli, input: Option<&str>) -> Result<Outcome, Failure> {
    let (net, default_p0) = match input {
        Some(path) => {
            let net = document::load(path)?.network;
            let n = net.vertex_count();
            // strictly decreasing pressures give every edge a nonzero drop
            let p0: Vec<f64> = (0..n).map(|v| (n - 1 - v) as f64).collect();
            (net, p0)
        }
        None => (demo_network(), vec![5.0, 0.0]),
    };
    if !net.is_connected() {
        return Err(CoreError::Disconnected.into());
    }
    let sys = NodeSystem::with_last_reference(&net);
    let p0 = match &cli.x0 {
        Some(arg) => parse_vector(arg)?,
        None => default_p0,
    };
    let free = if p0.len() == net.vertex_count() {
        sys.restrict(&p0)
    } else if p0.len() == sys.dim() {
        p0
    } else {
        return Err(CoreError::DimensionMismatch {
            what: "x0",
            expected: net.vertex_count(),
            found: p0.len(),
        }
        .into());
    };
    let opts = NodeOptions {
        tol_residual: cli.tol_residual,
        max_iters: cli.max_iters.unwrap_or(NodeOptions::default().max_iters),
        ..NodeOptions::default()
    };
    let trace = sys.nr_node_solve(&free, &opts)?;
    let mut steps = trace_steps(&trace);
    for step in &mut steps {
        step.x = sys.expand(&step.x);
    }
    let r = NodeDemoReport {
        command: "node-demo",
        reference_vertex: sys.reference(),
        termination: trace.termination.as_str(),
        iterations: trace.iterations(),
        trace: steps,
    };
    let exit = match trace.termination {
        t if t.is_converged() => EXIT_OK,
        pipeloop_core::Termination::Oscillating => EXIT_OK,
        _ => EXIT_SOLVER,
    };
    Ok(render(&r, cli.pretty, exit))
}
