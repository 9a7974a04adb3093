//! A-priori convergence certificates.
//!
//! Newton-Raphson is certified with the Kantorovich test `h = beta eta L < 1/2`
//! and Hardy Cross with Rheinboldt's test for iterations that replace the
//! Jacobian by an approximation `H`. The constants bound, for all `x, y`:
//!
//! * `||F'(x) - F'(y)|| <= L ||x - y||`
//! * `||H(x) - H(x0)|| <= K ||x - x0||`
//! * `||F'(x) - H(x)|| <= delta0 + delta1 ||x - x0||`
//!
//! in the infinity norm. They depend only on the basis (through `k`, the
//! total length `l`, and for face bases the vertex count `n`), on
//! `psi_max = max |psi_e|`, and on `||x0||`. Every constant is scaled by
//! `mu_max`, since each Jacobian entry carries one factor `mu_e`.

use crate::error::{Error, Result};
use crate::inf_norm;
use crate::loops::LoopSystem;

/// Which family of bounds to use.
///
/// `Face` requires every edge to lie on at most two basis cycles, which is
/// the case for the bounded faces of a planar embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisMode {
    #[default]
    General,
    Face,
}

impl BasisMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisMode::General => "general",
            BasisMode::Face => "face",
        }
    }
}

fn check_mode(sys: &LoopSystem, mode: BasisMode) -> Result<()> {
    if mode == BasisMode::Face && !sys.matrix().is_face_basis() {
        return Err(Error::NotFaceBasis);
    }
    Ok(())
}

/// Lipschitz constant of `F'`: `2 k (l - k + 1)` in general, `8 n` for a
/// face basis, times `mu_max`.
pub fn lipschitz_bound(sys: &LoopSystem, mode: BasisMode) -> Result<f64> {
    check_mode(sys, mode)?;
    let (k, l) = (sys.dim() as f64, sys.matrix().total_length() as f64);
    let base = match mode {
        BasisMode::General => 2.0 * k * (l - k + 1.0),
        BasisMode::Face => 8.0 * sys.vertex_count() as f64,
    };
    Ok(base * sys.mu_max())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrCertificate {
    pub beta: f64,
    pub eta: f64,
    pub lipschitz: f64,
    pub h: f64,
    /// Radius of the ball holding every iterate; present when `h < 1/2`.
    pub radius: Option<f64>,
    pub satisfied: bool,
    pub mode: BasisMode,
}

/// The Kantorovich test for given constants: returns `(h, r, satisfied)`.
pub fn kantorovich_test(beta: f64, eta: f64, lipschitz: f64) -> (f64, Option<f64>, bool) {
    let h = beta * eta * lipschitz;
    if h < 0.5 {
        let r = (1.0 - libm::sqrt(1.0 - 2.0 * h)) / (beta * lipschitz);
        (h, Some(r), true)
    } else {
        (h, None, false)
    }
}

/// Kantorovich certificate for Newton-Raphson started at `x0`, with
/// `beta = ||F'(x0)^{-1}||` and `eta = ||F'(x0)^{-1} F(x0)||`.
pub fn kantorovich_certificate(
    sys: &LoopSystem,
    x0: &[f64],
    mode: BasisMode,
) -> Result<NrCertificate> {
    let lipschitz = lipschitz_bound(sys, mode)?;
    let jac = sys.jacobian(x0);
    let inv = jac.inverse().map_err(|_| Error::SingularJacobian)?;
    let beta = inv.inf_norm();
    let eta = inf_norm(&inv.mul_vec(&sys.residual(x0)));
    let (h, radius, satisfied) = kantorovich_test(beta, eta, lipschitz);
    Ok(NrCertificate {
        beta,
        eta,
        lipschitz,
        h,
        radius,
        satisfied,
        mode,
    })
}

/// The constants `K`, `delta0`, `delta1` for a start point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcConstants {
    pub k_const: f64,
    pub delta0: f64,
    pub delta1: f64,
    /// The overlap factor used in the delta bounds: `l - k - 2`, or
    /// `l - k + 1` when some basis cycle has fewer than three edges.
    pub overlap: f64,
    pub short_cycle_fallback: bool,
}

pub fn hc_constants(sys: &LoopSystem, x0: &[f64], mode: BasisMode) -> Result<HcConstants> {
    check_mode(sys, mode)?;
    let a = sys.matrix();
    let (k, l) = (sys.dim() as f64, a.total_length() as f64);
    let n = sys.vertex_count() as f64;
    let mu = sys.mu_max();
    let psi_max = sys.reference_flow().max_abs();
    let x0_norm = inf_norm(x0);

    let short_cycle_fallback = a.min_cycle_len() < 3;
    let overlap = if short_cycle_fallback {
        l - k + 1.0
    } else {
        l - k - 2.0
    };
    let (k_const, delta0, delta1) = match mode {
        BasisMode::General => (
            2.0 * (l - k + 1.0),
            2.0 * overlap * (psi_max + k * x0_norm),
            2.0 * k * overlap,
        ),
        BasisMode::Face => (
            4.0 * n,
            2.0 * overlap * (psi_max + 2.0 * x0_norm),
            4.0 * overlap,
        ),
    };
    Ok(HcConstants {
        k_const: k_const * mu,
        delta0: delta0 * mu,
        delta1: delta1 * mu,
        overlap,
        short_cycle_fallback,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcCertificate {
    pub beta: f64,
    pub eta: f64,
    pub lipschitz: f64,
    pub k_const: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub h: f64,
    pub radius: Option<f64>,
    pub satisfied: bool,
    pub mode: BasisMode,
    pub short_cycle_fallback: bool,
}

/// Rheinboldt's test: returns `(h, r, satisfied)` where
/// `h = beta eta L max(1, (K + delta1) / L) / (1 - beta delta0)^2`.
///
/// At `h = 0` the radius takes its limit `eta / (1 - beta delta0)`.
pub fn rheinboldt_test(
    beta: f64,
    eta: f64,
    lipschitz: f64,
    k_const: f64,
    delta0: f64,
    delta1: f64,
) -> (f64, Option<f64>, bool) {
    let contraction = 1.0 - beta * delta0;
    let h = beta * eta * lipschitz * f64::max(1.0, (k_const + delta1) / lipschitz)
        / (contraction * contraction);
    let satisfied = contraction > 0.0 && h <= 0.5;
    if !satisfied {
        return (h, None, false);
    }
    let r = if h == 0.0 {
        eta / contraction
    } else {
        eta * (1.0 - libm::sqrt(1.0 - 2.0 * h)) / (h * contraction)
    };
    (h, Some(r), true)
}

/// Rheinboldt certificate for simultaneous Hardy Cross started at `x0`,
/// with `beta = max_c 1 / H_cc(x0)` and `eta = ||H(x0)^{-1} F(x0)||`.
pub fn rheinboldt_certificate(
    sys: &LoopSystem,
    x0: &[f64],
    mode: BasisMode,
) -> Result<HcCertificate> {
    let lipschitz = lipschitz_bound(sys, mode)?;
    let consts = hc_constants(sys, x0, mode)?;
    let diag = sys.hc_diagonal(x0);
    if let Some(c) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::SingularH { cycle: c + 1 });
    }
    let beta = diag.iter().fold(0.0_f64, |acc, &d| acc.max(1.0 / d));
    let eta = sys
        .residual(x0)
        .iter()
        .zip(&diag)
        .fold(0.0_f64, |acc, (f, d)| acc.max((f / d).abs()));
    let (h, radius, satisfied) = rheinboldt_test(
        beta,
        eta,
        lipschitz,
        consts.k_const,
        consts.delta0,
        consts.delta1,
    );
    Ok(HcCertificate {
        beta,
        eta,
        lipschitz,
        k_const: consts.k_const,
        delta0: consts.delta0,
        delta1: consts.delta1,
        h,
        radius,
        satisfied,
        mode,
        short_cycle_fallback: consts.short_cycle_fallback,
    })
}
