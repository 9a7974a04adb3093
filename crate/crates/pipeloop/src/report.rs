//! Serializable reports emitted by the command line, plus a plain-text
//! rendering for `--pretty`.

use std::fmt::Write as _;

use pipeloop_core::{Error as CoreError, IterationTrace, OrderEstimate};
use serde::Serialize;

/// Stable identifier for a core error.
pub fn core_error_code(e: &CoreError) -> &'static str {
    match e {
        CoreError::EmptyNetwork => "empty_network",
        CoreError::VertexOutOfRange { .. } => "vertex_out_of_range",
        CoreError::SelfLoop { .. } => "self_loop",
        CoreError::NonPositiveMu { .. } => "non_positive_mu",
        CoreError::UnbalancedConsumption { .. } => "unbalanced_consumption",
        CoreError::NonConserving { .. } => "non_conserving",
        CoreError::NonFinite(_) => "non_finite",
        CoreError::Disconnected => "disconnected",
        CoreError::DimensionMismatch { .. } => "dimension_mismatch",
        CoreError::NoCycles => "no_cycles",
        CoreError::UnknownEdge { .. } => "unknown_edge",
        CoreError::InconsistentCycle { .. } => "inconsistent_cycle",
        CoreError::DependentCycles => "dependent_cycles",
        CoreError::WrongCycleCount { .. } => "wrong_cycle_count",
        CoreError::NotFaceBasis => "not_face_basis",
        CoreError::Singular => "singular",
        CoreError::SingularJacobian => "singular_jacobian",
        CoreError::SingularH { .. } => "singular_h",
        CoreError::SingularPressureDrop { .. } => "singular_pressure_drop",
        CoreError::InsufficientData { .. } => "insufficient_data",
    }
}

/// Errors that come from the iteration itself rather than from the input.
pub fn is_solver_error(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::Singular
            | CoreError::SingularJacobian
            | CoreError::SingularH { .. }
            | CoreError::SingularPressureDrop { .. }
            | CoreError::InsufficientData { .. }
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub command: String,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub command: &'static str,
    pub ok: bool,
    pub vertices: usize,
    pub edges: usize,
    pub balanced: bool,
    pub imbalance: f64,
    pub connected: bool,
    pub biconnected: bool,
    pub parallel_edges: usize,
    pub cycle_rank: isize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleEntry {
    pub edge: usize,
    pub dir: i8,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisReport {
    pub command: &'static str,
    /// `document` or `fundamental`.
    pub source: &'static str,
    pub cycles: usize,
    pub total_length: usize,
    pub min_cycle_length: usize,
    /// Every edge lies on at most two cycles.
    pub face_basis: bool,
    pub basis: Vec<Vec<CycleEntry>>,
    /// Edge-cycle matrix, one row per edge.
    pub matrix: Vec<Vec<i8>>,
    pub reference_flow: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub t: usize,
    pub x: Vec<f64>,
    pub residual_norm: f64,
    /// Distance to the next iterate; absent on the last one.
    pub step_norm: Option<f64>,
}

pub fn trace_steps(trace: &IterationTrace) -> Vec<TraceStep> {
    trace
        .iterates
        .iter()
        .enumerate()
        .map(|(t, x)| TraceStep {
            t,
            x: x.clone(),
            residual_norm: trace.residual_norms[t],
            step_norm: trace.step_norms.get(t).copied(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hc_mode: Option<&'static str>,
    pub basis_source: &'static str,
    pub termination: &'static str,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub final_x: Vec<f64>,
    pub final_flows: Vec<f64>,
    /// Largest `||D^T q + w||_inf` over all iterates.
    pub conservation_defect: f64,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub command: &'static str,
    pub method: &'static str,
    pub basis_mode: &'static str,
    pub x0: Vec<f64>,
    pub beta: f64,
    pub eta: f64,
    pub lipschitz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_const: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short_cycle_fallback: Option<bool>,
    pub h: f64,
    pub radius: Option<f64>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodRate {
    pub method: &'static str,
    pub termination: &'static str,
    pub iterations: usize,
    pub errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl MethodRate {
    pub fn new(
        method: &'static str,
        trace: &IterationTrace,
        errors: Vec<f64>,
        estimate: Result<OrderEstimate, CoreError>,
    ) -> Self {
        let mut out = MethodRate {
            method,
            termination: trace.termination.as_str(),
            iterations: trace.iterations(),
            errors,
            omega: None,
            rate: None,
            classification: None,
            samples_used: None,
            error: None,
        };
        match estimate {
            Ok(est) => {
                out.omega = Some(est.omega);
                out.rate = Some(est.rate);
                out.classification = Some(est.classification.as_str());
                out.samples_used = Some(est.samples_used);
            }
            Err(e) => {
                out.error = Some(ErrorBody {
                    code: core_error_code(&e).to_string(),
                    message: e.to_string(),
                })
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub command: &'static str,
    pub x_star: Vec<f64>,
    pub methods: Vec<MethodRate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeDemoReport {
    pub command: &'static str,
    pub reference_vertex: usize,
    pub termination: &'static str,
    pub iterations: usize,
    /// Full pressure vectors, reference entry included.
    pub trace: Vec<TraceStep>,
}

/// Plain-text rendering used by `--pretty`.
pub trait Pretty {
    fn pretty(&self) -> String;
}

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("[{}]", parts.join(", "))
}

fn opt_str(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"))
}

fn trace_table(out: &mut String, steps: &[TraceStep]) {
    let _ = writeln!(out, "{:>5}  {:>14}  {:>14}  x", "t", "|F|", "step");
    for s in steps {
        let _ = writeln!(
            out,
            "{:>5}  {:>14.6e}  {:>14}  {}",
            s.t,
            s.residual_norm,
            opt_str(s.step_norm),
            vec_str(&s.x)
        );
    }
}

impl Pretty for ErrorReport {
    fn pretty(&self) -> String {
        format!(
            "{}: error [{}] {}\n",
            self.command, self.error.code, self.error.message
        )
    }
}

impl Pretty for ValidateReport {
    fn pretty(&self) -> String {
        let mut out = String::new();
        let rows: [(&str, String); 9] = [
            ("ok", self.ok.to_string()),
            ("vertices", self.vertices.to_string()),
            ("edges", self.edges.to_string()),
            ("balanced", self.balanced.to_string()),
            ("imbalance", format!("{:e}", self.imbalance)),
            ("connected", self.connected.to_string()),
            ("biconnected", self.biconnected.to_string()),
            ("parallel edges", self.parallel_edges.to_string()),
            ("cycle rank", self.cycle_rank.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<16}{v}");
        }
        out
    }
}

impl Pretty for BasisReport {
    fn pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} basis: k = {}, total length = {}, face basis = {}",
            self.source, self.cycles, self.total_length, self.face_basis
        );
        for (c, cycle) in self.basis.iter().enumerate() {
            let parts: Vec<String> = cycle
                .iter()
                .map(|oe| format!("{}{}", if oe.dir > 0 { '+' } else { '-' }, oe.edge))
                .collect();
            let _ = writeln!(out, "  C{}: {}", c + 1, parts.join(" "));
        }
        let _ = writeln!(out, "edge  psi           A");
        for (e, row) in self.matrix.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|a| format!("{a:>3}")).collect();
            let _ = writeln!(
                out,
                "{:>4}  {:<12.6}  {}",
                e + 1,
                self.reference_flow[e],
                cells.join("")
            );
        }
        out
    }
}

impl Pretty for SolveReport {
    fn pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}{}: {} after {} iterations, |F| = {:e}",
            self.method,
            self.hc_mode.map(|m| format!(" ({m})")).unwrap_or_default(),
            self.termination,
            self.iterations,
            self.final_residual
        );
        trace_table(&mut out, &self.trace);
        let _ = writeln!(out, "final flows {}", vec_str(&self.final_flows));
        let _ = writeln!(out, "conservation defect {:e}", self.conservation_defect);
        out
    }
}

impl Pretty for CertificateReport {
    fn pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} certificate ({} bound)",
            self.method, self.basis_mode
        );
        let mut rows = vec![
            ("beta", format!("{:.6e}", self.beta)),
            ("eta", format!("{:.6e}", self.eta)),
            ("L", format!("{:.6e}", self.lipschitz)),
        ];
        if let (Some(k), Some(d0), Some(d1)) = (self.k_const, self.delta0, self.delta1) {
            rows.push(("K", format!("{k:.6e}")));
            rows.push(("delta0", format!("{d0:.6e}")));
            rows.push(("delta1", format!("{d1:.6e}")));
        }
        rows.push(("h", format!("{:.6e}", self.h)));
        rows.push(("radius", opt_str(self.radius)));
        rows.push(("satisfied", self.satisfied.to_string()));
        for (k, v) in rows {
            let _ = writeln!(out, "  {k:<10}{v}");
        }
        out
    }
}

impl Pretty for RateReport {
    fn pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "x* = {}", vec_str(&self.x_star));
        let _ = writeln!(
            out,
            "{:<4}  {:>10}  {:>10}  {:<14}  termination",
            "", "omega", "rate", "class"
        );
        for m in &self.methods {
            match &m.error {
                None => {
                    let _ = writeln!(
                        out,
                        "{:<4}  {:>10.4}  {:>10.4}  {:<14}  {}",
                        m.method,
                        m.omega.unwrap_or(f64::NAN),
                        m.rate.unwrap_or(f64::NAN),
                        m.classification.unwrap_or("-"),
                        m.termination
                    );
                }
                Some(e) => {
                    let _ = writeln!(out, "{:<4}  error [{}] {}", m.method, e.code, e.message);
                }
            }
        }
        out
    }
}

impl Pretty for NodeDemoReport {
    fn pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "node Newton (reference vertex {}): {} after {} iterations",
            self.reference_vertex, self.termination, self.iterations
        );
        trace_table(&mut out, &self.trace);
        out
    }
}
