use core::fmt;

/// Errors raised by the analysis routines.
///
/// Vertex and edge identifiers in payloads are 1-based, matching the
/// network document.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyNetwork,
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
    },
    SelfLoop {
        edge: usize,
    },
    NonPositiveMu {
        edge: usize,
        mu: f64,
    },
    UnbalancedConsumption {
        sum: f64,
    },
    NonConserving {
        defect: f64,
    },
    NonFinite(&'static str),
    Disconnected,
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    NoCycles,
    UnknownEdge {
        cycle: usize,
        edge: usize,
    },
    InconsistentCycle {
        cycle: usize,
    },
    DependentCycles,
    WrongCycleCount {
        expected: usize,
        found: usize,
    },
    NotFaceBasis,
    Singular,
    SingularJacobian,
    SingularH {
        cycle: usize,
    },
    SingularPressureDrop {
        edge: usize,
    },
    InsufficientData {
        needed: usize,
        found: usize,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyNetwork => f.write_str("network has no vertices"),
            Error::VertexOutOfRange { edge, vertex } => {
                write!(f, "edge {edge} references unknown vertex {vertex}")
            }
            Error::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            Error::NonPositiveMu { edge, mu } => {
                write!(f, "edge {edge} has non-positive coefficient mu = {mu}")
            }
            Error::UnbalancedConsumption { sum } => {
                write!(f, "external inflows do not balance (sum = {sum:e})")
            }
            Error::NonConserving { defect } => {
                write!(
                    f,
                    "reference flow violates conservation (defect {defect:e})"
                )
            }
            Error::NonFinite(what) => write!(f, "{what} contains a non-finite value"),
            Error::Disconnected => f.write_str("network is not connected"),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => {
                write!(f, "{what}: expected length {expected}, found {found}")
            }
            Error::NoCycles => f.write_str("network has no cycles (m - n + 1 = 0)"),
            Error::UnknownEdge { cycle, edge } => {
                write!(f, "cycle {cycle} references unknown edge {edge}")
            }
            Error::InconsistentCycle { cycle } => {
                write!(f, "cycle {cycle} is not a simple closed walk")
            }
            Error::DependentCycles => f.write_str("basis cycles are linearly dependent"),
            Error::WrongCycleCount { expected, found } => {
                write!(
                    f,
                    "basis has {found} cycles, expected m - n + 1 = {expected}"
                )
            }
            Error::NotFaceBasis => f.write_str("some edge lies on more than two basis cycles"),
            Error::Singular => f.write_str("matrix is singular"),
            Error::SingularJacobian => f.write_str("Jacobian is singular"),
            Error::SingularH { cycle } => {
                write!(f, "Hardy Cross diagonal vanishes on cycle {cycle}")
            }
            Error::SingularPressureDrop { edge } => {
                write!(f, "pressure drop on edge {edge} is zero")
            }
            Error::InsufficientData { needed, found } => {
                write!(f, "need at least {needed} error values, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
