//! Newton iteration on nodal pressures.
//!
//! The unknowns are the pressures at every vertex except a reference vertex,
//! whose pressure is held at zero. The flow on edge `e` follows from its
//! pressure drop `d = p_tail - p_head` as `q_e = sign(d) sqrt(|d| / mu_e)`,
//! and the residual at vertex `v` is `w_v + sum_e D_ev q_e`.
//!
//! The square root makes the residual non-smooth at zero drop, and Newton's
//! method can cycle forever: on a single edge with no inflow the Newton map
//! is exactly `p -> -p`. [`NodeSystem::nr_node_solve`] detects such period-2
//! cycles and stops.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::loops::{IterationTrace, Termination};
use crate::network::FlowNetwork;
use crate::{inf_dist, inf_norm};

/// Pressure drops at or below this magnitude are treated as zero.
pub const DROP_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeOptions {
    pub tol_residual: f64,
    pub max_iters: usize,
    /// `||p(t) - p(t-2)||` at or below this counts as a repeat.
    pub period_tol: f64,
    /// Consecutive repeats needed to report [`Termination::Oscillating`].
    pub oscillation_window: usize,
}

impl Default for NodeOptions {
    fn default() -> Self {
        NodeOptions {
            tol_residual: 1e-10,
            max_iters: 100,
            period_tol: 1e-10,
            oscillation_window: 10,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NodeSystem<'a> {
    net: &'a FlowNetwork,
    reference: usize,
}

impl<'a> NodeSystem<'a> {
    /// `reference` is the 1-based vertex whose pressure is fixed at zero.
    pub fn new(net: &'a FlowNetwork, reference: usize) -> Result<Self> {
        if reference == 0 || reference > net.vertex_count() {
            return Err(Error::VertexOutOfRange {
                edge: 0,
                vertex: reference,
            });
        }
        Ok(NodeSystem { net, reference })
    }

    /// Uses the highest-numbered vertex as reference.
    pub fn with_last_reference(net: &'a FlowNetwork) -> Self {
        NodeSystem {
            net,
            reference: net.vertex_count(),
        }
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    /// Number of unknown pressures, `n - 1`.
    pub fn dim(&self) -> usize {
        self.net.vertex_count() - 1
    }

    /// Inserts the zero reference pressure into a free-vertex vector.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.dim());
        let mut full = free.to_vec();
        full.insert(self.reference - 1, 0.0);
        full
    }

    /// Drops the reference entry from a full pressure vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        assert_eq!(full.len(), self.net.vertex_count());
        full.iter()
            .enumerate()
            .filter(|&(v, _)| v != self.reference - 1)
            .map(|(_, &p)| p)
            .collect()
    }

    fn drops(&self, full: &[f64]) -> Result<Vec<f64>> {
        self.net
            .edges()
            .iter()
            .map(|e| {
                let d = full[e.tail - 1] - full[e.head - 1];
                if d.abs() <= DROP_GUARD {
                    Err(Error::SingularPressureDrop { edge: e.id })
                } else {
                    Ok(d)
                }
            })
            .collect()
    }

    /// Edge flows implied by the pressures.
    pub fn flows(&self, free: &[f64]) -> Result<Vec<f64>> {
        let full = self.expand(free);
        Ok(self
            .drops(&full)?
            .iter()
            .zip(self.net.edges())
            .map(|(&d, e)| libm::copysign(libm::sqrt(d.abs() / e.mu), d))
            .collect())
    }

    /// Conservation residual at each free vertex.
    pub fn residual(&self, free: &[f64]) -> Result<Vec<f64>> {
        let q = self.flows(free)?;
        Ok(self.restrict(&self.net.conservation_residual(&q)))
    }

    pub fn jacobian(&self, free: &[f64]) -> Result<DenseMatrix> {
        let full = self.expand(free);
        let drops = self.drops(&full)?;
        let n = self.net.vertex_count();
        // column/row index of each vertex among the unknowns
        let slot = |v: usize| -> Option<usize> {
            match v.cmp(&(self.reference - 1)) {
                core::cmp::Ordering::Less => Some(v),
                core::cmp::Ordering::Equal => None,
                core::cmp::Ordering::Greater => Some(v - 1),
            }
        };
        let mut jac = DenseMatrix::zeros(n - 1);
        for (e, &d) in self.net.edges().iter().zip(&drops) {
            // dq/dd for q = sign(d) sqrt(|d| / mu)
            let g = 0.5 / libm::sqrt(e.mu * d.abs());
            let (t, h) = (e.tail - 1, e.head - 1);
            // residual at head gains +q, at tail -q; d = p_t - p_h
            for (v, sign_v) in [(h, 1.0), (t, -1.0)] {
                let Some(row) = slot(v) else { continue };
                if let Some(col) = slot(t) {
                    jac[(row, col)] += sign_v * g;
                }
                if let Some(col) = slot(h) {
                    jac[(row, col)] -= sign_v * g;
                }
            }
        }
        Ok(jac)
    }

    /// One Newton step on the free pressures.
    pub fn nr_step(&self, free: &[f64]) -> Result<Vec<f64>> {
        let f = self.residual(free)?;
        let delta = self
            .jacobian(free)?
            .solve(&f)
            .map_err(|_| Error::SingularJacobian)?;
        Ok(free.iter().zip(delta).map(|(p, d)| p - d).collect())
    }

    /// Newton iteration from `p0` (free pressures).
    ///
    /// Fails only if `p0` itself has a zero pressure drop. Later failures end
    /// the trace with the matching [`Termination`].
    pub fn nr_node_solve(&self, p0: &[f64], opts: &NodeOptions) -> Result<IterationTrace> {
        let r0 = inf_norm(&self.residual(p0)?);
        let mut trace = IterationTrace::start(p0.to_vec(), r0);
        let mut repeats = 0;
        let termination = loop {
            let res = trace.final_residual();
            if res <= opts.tol_residual {
                break Termination::ResidualTol;
            }
            if trace.iterations() >= opts.max_iters {
                break Termination::MaxIters;
            }
            let next = match self.nr_step(trace.last()) {
                Ok(p) => p,
                Err(Error::SingularJacobian) => break Termination::SingularJacobian,
                Err(_) => break Termination::SingularPressureDrop,
            };
            let res = match self.residual(&next) {
                Ok(r) => inf_norm(&r),
                Err(_) => break Termination::SingularPressureDrop,
            };
            let step = inf_dist(&next, trace.last());
            trace.push(next, res, step);

            let t = trace.iterations();
            if t >= 2 {
                let back2 = inf_dist(&trace.iterates[t], &trace.iterates[t - 2]);
                let moving = step > 1e-6 * (1.0 + inf_norm(&trace.iterates[t]));
                if back2 <= opts.period_tol && moving {
                    repeats += 1;
                } else {
                    repeats = 0;
                }
                if repeats >= opts.oscillation_window {
                    break Termination::Oscillating;
                }
            }
        };
        trace.termination = termination;
        Ok(trace)
    }
}

/// Pressures (full vector, 0-based) consistent with the flows `q`,
/// integrated over a breadth-first tree from `reference` (1-based) using
/// `p_tail - p_head = mu q |q|`.
pub fn pressures_from_flows(net: &FlowNetwork, q: &[f64], reference: usize) -> Vec<f64> {
    assert_eq!(q.len(), net.edge_count());
    let adj = net.adjacency();
    let mut p = vec![0.0; net.vertex_count()];
    let mut seen = vec![false; net.vertex_count()];
    let mut queue = VecDeque::from([reference - 1]);
    seen[reference - 1] = true;
    while let Some(v) = queue.pop_front() {
        for &(ei, u) in &adj[v] {
            if seen[u] {
                continue;
            }
            seen[u] = true;
            let e = &net.edges()[ei];
            let drop = e.mu * q[ei] * q[ei].abs();
            p[u] = if e.tail - 1 == v {
                p[v] - drop
            } else {
                p[v] + drop
            };
            queue.push_back(u);
        }
    }
    p
}
