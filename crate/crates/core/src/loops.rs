//! The loop equations and their Newton-Raphson and Hardy Cross iterations.
//!
//! With `q(x) = psi + A x` the residual of cycle `c` is
//! `f_c(x) = sum_e A_ec mu_e q_e |q_e|`, the Jacobian is
//! `F'(x) = 2 A^T diag(mu) U(x) A` with `U = diag(|q_e|)`, and the Hardy
//! Cross operator `H(x)` keeps only the diagonal of `F'(x)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::EdgeCycleMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::network::FlowNetwork;
use crate::reference::ReferenceFlow;
use crate::{inf_dist, inf_norm};

/// Residual norm beyond which an iteration is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSystem {
    a: EdgeCycleMatrix,
    psi: ReferenceFlow,
    mu: Vec<f64>,
    vertices: usize,
}

impl LoopSystem {
    pub fn new(net: &FlowNetwork, a: EdgeCycleMatrix, psi: ReferenceFlow) -> Result<Self> {
        Self::from_parts(a, psi, net.mu(), net.vertex_count())
    }

    /// Builds a system without a network; `vertices` is only used by the
    /// face-basis certificate constants.
    pub fn from_parts(
        a: EdgeCycleMatrix,
        psi: ReferenceFlow,
        mu: Vec<f64>,
        vertices: usize,
    ) -> Result<Self> {
        let m = a.edges();
        for (what, len) in [("reference flow", psi.as_slice().len()), ("mu", mu.len())] {
            if len != m {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: m,
                    found: len,
                });
            }
        }
        if let Some(i) = mu.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveMu {
                edge: i + 1,
                mu: mu[i],
            });
        }
        Ok(LoopSystem {
            a,
            psi,
            mu,
            vertices,
        })
    }

    /// Number of loop unknowns `k`.
    pub fn dim(&self) -> usize {
        self.a.cycles()
    }

    pub fn edge_count(&self) -> usize {
        self.a.edges()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn matrix(&self) -> &EdgeCycleMatrix {
        &self.a
    }

    pub fn reference_flow(&self) -> &ReferenceFlow {
        &self.psi
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu_max(&self) -> f64 {
        self.mu.iter().fold(0.0, |acc, &v| acc.max(v))
    }

    fn check_dim(&self, x: &[f64]) {
        assert_eq!(x.len(), self.dim(), "loop vector has wrong length");
    }

    /// `q = psi + A x`.
    pub fn flows(&self, x: &[f64]) -> Vec<f64> {
        self.check_dim(x);
        let mut q = self.a.mul(x);
        for (qe, p) in q.iter_mut().zip(self.psi.as_slice()) {
            *qe += p;
        }
        q
    }

    /// Head loss `mu_e q_e |q_e|` per edge.
    fn head_losses(&self, q: &[f64]) -> Vec<f64> {
        q.iter()
            .zip(&self.mu)
            .map(|(&qe, &mu)| mu * qe * qe.abs())
            .collect()
    }

    /// `F(x)`: the signed head-loss sum around each basis cycle.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let q = self.flows(x);
        self.a.transpose_mul(&self.head_losses(&q))
    }

    /// `F'(x) = 2 A^T diag(mu) U(x) A`. Exactly symmetric.
    pub fn jacobian(&self, x: &[f64]) -> DenseMatrix {
        let q = self.flows(x);
        let k = self.dim();
        let mut jac = DenseMatrix::zeros(k);
        for (e, &qe) in q.iter().enumerate() {
            let weight = 2.0 * self.mu[e] * qe.abs();
            let row = self.a.row(e);
            for (c, &ac) in row.iter().enumerate().filter(|(_, &a)| a != 0) {
                for (d, &ad) in row.iter().enumerate().filter(|(_, &a)| a != 0) {
                    jac[(c, d)] += weight * f64::from(ac * ad);
                }
            }
        }
        jac
    }

    /// Diagonal of `F'(x)`: `2 sum_e A_ec^2 mu_e |q_e|`.
    pub fn hc_diagonal(&self, x: &[f64]) -> Vec<f64> {
        let q = self.flows(x);
        let mut diag = vec![0.0; self.dim()];
        for (e, &qe) in q.iter().enumerate() {
            let weight = 2.0 * self.mu[e] * qe.abs();
            for (c, &ac) in self.a.row(e).iter().enumerate().filter(|(_, &a)| a != 0) {
                diag[c] += weight * f64::from(ac * ac);
            }
        }
        diag
    }

    /// `H(x)` as a dense diagonal matrix.
    pub fn hc_operator(&self, x: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(&self.hc_diagonal(x))
    }

    /// One Newton-Raphson step `x - F'(x)^{-1} F(x)`.
    pub fn nr_step(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.residual(x);
        let delta = self
            .jacobian(x)
            .solve(&f)
            .map_err(|_| Error::SingularJacobian)?;
        Ok(x.iter().zip(delta).map(|(xi, di)| xi - di).collect())
    }

    /// One Hardy Cross pass.
    ///
    /// [`HcMode::Simultaneous`] evaluates every correction at `x`.
    /// [`HcMode::Sweep`] corrects cycles in order, each against the flows
    /// already updated by the cycles before it.
    pub fn hc_step(&self, x: &[f64], mode: HcMode) -> Result<Vec<f64>> {
        match mode {
            HcMode::Simultaneous => {
                let f = self.residual(x);
                let diag = self.hc_diagonal(x);
                let mut next = x.to_vec();
                for c in 0..self.dim() {
                    if !(diag[c] > 0.0) {
                        return Err(Error::SingularH { cycle: c + 1 });
                    }
                    next[c] -= f[c] / diag[c];
                }
                Ok(next)
            }
            HcMode::Sweep => {
                let mut q = self.flows(x);
                let mut next = x.to_vec();
                for c in 0..self.dim() {
                    let (mut f, mut h) = (0.0, 0.0);
                    for (e, &qe) in q.iter().enumerate() {
                        let a = self.a.get(e, c);
                        if a != 0 {
                            f += f64::from(a) * (self.mu[e] * qe * qe.abs());
                            h += 2.0 * self.mu[e] * qe.abs();
                        }
                    }
                    if !(h > 0.0) {
                        return Err(Error::SingularH { cycle: c + 1 });
                    }
                    let delta = f / h;
                    next[c] -= delta;
                    for (e, qe) in q.iter_mut().enumerate() {
                        let a = self.a.get(e, c);
                        if a != 0 {
                            *qe -= f64::from(a) * delta;
                        }
                    }
                }
                Ok(next)
            }
        }
    }

    /// Iterates from `x0` until one of the stopping rules in `opts` fires.
    ///
    /// A singular Jacobian or Hardy Cross diagonal ends the trace rather than
    /// returning an error; the iterates computed so far are kept.
    pub fn solve(&self, x0: &[f64], method: Method, opts: &SolveOptions) -> IterationTrace {
        self.check_dim(x0);
        let max_iters = opts.max_iters.unwrap_or(match method {
            Method::NewtonRaphson => SolveOptions::NR_MAX_ITERS,
            Method::HardyCross => SolveOptions::HC_MAX_ITERS,
        });
        let mut trace = IterationTrace::start(x0.to_vec(), inf_norm(&self.residual(x0)));
        if opts.record_flows {
            trace.flows = Some(vec![self.flows(x0)]);
        }

        let termination = loop {
            let x = trace.last();
            let res = *trace.residual_norms.last().unwrap();
            if res <= opts.tol_residual {
                break Termination::ResidualTol;
            }
            if !res.is_finite() || res > DIVERGENCE_LIMIT {
                break Termination::Diverged;
            }
            if let Some(&step) = trace.step_norms.last() {
                if step <= opts.tol_step {
                    break Termination::StepTol;
                }
            }
            if trace.iterations() >= max_iters {
                break Termination::MaxIters;
            }
            let next = match method {
                Method::NewtonRaphson => self.nr_step(x),
                Method::HardyCross => self.hc_step(x, opts.hc_mode),
            };
            let next = match next {
                Ok(v) => v,
                Err(Error::SingularH { .. }) => break Termination::SingularH,
                Err(_) => break Termination::SingularJacobian,
            };
            let step = inf_dist(&next, x);
            let res = inf_norm(&self.residual(&next));
            if let Some(flows) = trace.flows.as_mut() {
                flows.push(self.flows(&next));
            }
            trace.push(next, res, step);
        };
        trace.termination = termination;
        trace
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HcMode {
    #[default]
    Simultaneous,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NewtonRaphson,
    HardyCross,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol_residual: f64,
    pub tol_step: f64,
    /// `None` selects the per-method default.
    pub max_iters: Option<usize>,
    pub hc_mode: HcMode,
    /// Keep `q(x)` for every iterate.
    pub record_flows: bool,
}

impl SolveOptions {
    pub const NR_MAX_ITERS: usize = 100;
    pub const HC_MAX_ITERS: usize = 10_000;
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_residual: 1e-10,
            tol_step: 1e-12,
            max_iters: None,
            hc_mode: HcMode::Simultaneous,
            record_flows: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ResidualTol,
    StepTol,
    MaxIters,
    SingularJacobian,
    SingularH,
    Diverged,
    Oscillating,
    SingularPressureDrop,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ResidualTol => "residual_tol",
            Termination::StepTol => "step_tol",
            Termination::MaxIters => "max_iters",
            Termination::SingularJacobian => "singular_jacobian",
            Termination::SingularH => "singular_h",
            Termination::Diverged => "diverged",
            Termination::Oscillating => "oscillating",
            Termination::SingularPressureDrop => "singular_pressure_drop",
        }
    }

    /// Whether the iteration reached a solution.
    pub fn is_converged(self) -> bool {
        matches!(self, Termination::ResidualTol | Termination::StepTol)
    }
}

/// Iterates with their residual and step norms.
///
/// `residual_norms[t]` belongs to `iterates[t]`; `step_norms[t]` is the
/// distance from `iterates[t]` to `iterates[t + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub iterates: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub termination: Termination,
    pub flows: Option<Vec<Vec<f64>>>,
}

impl IterationTrace {
    pub(crate) fn start(x0: Vec<f64>, residual: f64) -> Self {
        IterationTrace {
            iterates: vec![x0],
            residual_norms: vec![residual],
            step_norms: Vec::new(),
            termination: Termination::MaxIters,
            flows: None,
        }
    }

    pub(crate) fn push(&mut self, x: Vec<f64>, residual: f64, step: f64) {
        self.iterates.push(x);
        self.residual_norms.push(residual);
        self.step_norms.push(step);
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &[f64] {
        self.iterates
            .last()
            .expect("trace holds the starting point")
    }

    pub fn final_residual(&self) -> f64 {
        *self
            .residual_norms
            .last()
            .expect("trace holds the starting point")
    }
}
