//! Loop-method analysis of pipe networks.
//!
//! A pipe network is a multigraph whose edges carry flow `q_e` with the
//! Darcy-Weisbach head loss `mu_e * q_e * |q_e|`. Flow conservation is
//! eliminated by writing `q(x) = psi + A x`, where `psi` is any conserving
//! reference flow and `A` is the edge-cycle matrix of a cycle basis. The
//! remaining unknowns `x` (one per basis cycle) solve the loop equations
//! `F(x) = A^T diag(mu) U(x) q(x) = 0`.
//!
//! This crate provides:
//!
//! * [`network`]: the flow graph, incidence matrix and structural validation.
//! * [`basis`]: fundamental cycle bases, edge-cycle matrices and basis checks.
//! * [`reference`]: conserving reference flows.
//! * [`dense`]: small dense LU with partial pivoting and infinity norms.
//! * [`loops`]: the loop system with Newton-Raphson and Hardy Cross steps.
//! * [`certificates`]: Kantorovich and Rheinboldt a-priori convergence tests.
//! * [`node`]: the nodal-pressure Newton iteration and its oscillation detector.
//! * [`diagnostics`]: empirical convergence order from iteration traces.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod basis;
pub mod certificates;
pub mod dense;
pub mod diagnostics;
mod error;
pub mod loops;
pub mod network;
pub mod node;
pub mod reference;

pub use basis::{CycleBasis, EdgeCycleMatrix, OrientedEdge, SpanningTree};
pub use certificates::{BasisMode, HcCertificate, HcConstants, NrCertificate};
pub use dense::DenseMatrix;
pub use diagnostics::{Classification, OrderEstimate};
pub use error::{Error, Result};
pub use loops::{HcMode, IterationTrace, LoopSystem, Method, SolveOptions, Termination};
pub use network::{Edge, FlowNetwork, IncidenceMatrix, ValidationReport};
pub use node::{NodeOptions, NodeSystem};
pub use reference::ReferenceFlow;

/// Maximum absolute entry of a vector; zero for an empty slice.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `max_i |a_i - b_i|` over two equal-length vectors.
pub fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}
