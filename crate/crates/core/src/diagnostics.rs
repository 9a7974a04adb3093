//! Empirical convergence order.
//!
//! A sequence converges with order `omega` when `e(t+1) <= c e(t)^omega` for
//! large `t`. Taking logs, `omega` is the slope of `log e(t+1)` against
//! `log e(t)`, which is fitted by least squares over the tail of the trace.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::inf_dist;
use crate::loops::IterationTrace;

/// Errors below this are rounding noise and are trimmed from the tail.
pub const NOISE_FLOOR: f64 = 1e-14;
/// Number of trailing `(e(t), e(t+1))` pairs used by the fit.
pub const WINDOW: usize = 6;
/// Fewest error values accepted by [`estimate_order`].
pub const MIN_SAMPLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Quadratic,
    Linear,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Quadratic => "quadratic",
            Classification::Linear => "linear",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub omega: f64,
    /// Geometric mean of `e(t+1) / e(t)` over the fitted window.
    pub rate: f64,
    pub classification: Classification,
    /// Number of `(e(t), e(t+1))` pairs in the fit.
    pub samples_used: usize,
}

/// `||x(t) - x*||_inf` for every iterate, with trailing values below the
/// noise floor removed.
pub fn error_sequence(trace: &IterationTrace, x_star: &[f64]) -> Vec<f64> {
    let mut errors: Vec<f64> = trace.iterates.iter().map(|x| inf_dist(x, x_star)).collect();
    while errors.last().is_some_and(|&e| e < NOISE_FLOOR) {
        errors.pop();
    }
    errors
}

pub fn estimate_order(errors: &[f64]) -> Result<OrderEstimate> {
    let usable = errors.iter().filter(|e| e.is_finite() && **e > 0.0).count();
    if errors.len() < MIN_SAMPLES || usable != errors.len() {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            found: usable.min(errors.len()),
        });
    }
    let pairs = (errors.len() - 1).min(WINDOW);
    let tail = &errors[errors.len() - pairs - 1..];
    let xs: Vec<f64> = tail[..pairs].iter().map(|&e| libm::log(e)).collect();
    let ys: Vec<f64> = tail[1..].iter().map(|&e| libm::log(e)).collect();

    let count = pairs as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    // a flat sequence satisfies e(t+1) = e(t), i.e. order one
    let omega = if sxx > 1e-24 * (1.0 + mean_x * mean_x) {
        sxy / sxx
    } else {
        1.0
    };
    let rate = libm::exp(mean_y - mean_x);

    let classification = if omega >= 1.8 {
        Classification::Quadratic
    } else if (0.8..=1.2).contains(&omega) && rate < 0.95 {
        Classification::Linear
    } else {
        Classification::Inconclusive
    };
    Ok(OrderEstimate {
        omega,
        rate,
        classification,
        samples_used: pairs,
    })
}
