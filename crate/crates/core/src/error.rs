use thiserror::Error;

use crate::solver::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input document.
    Parse,
    /// Inputs parse but violate a mathematical precondition.
    Domain,
    /// An iterative solver stopped without certifying its fixed point.
    Convergence,
    /// Linear algebra kernel failure.
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (largest asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive definite (spectrum in [{min:e}, {max:e}])")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("eigensolver failed (dim {dim}, condition estimate {condition:e})")]
    NumericalFailure { dim: usize, condition: f64 },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error(
        "solver stopped with status {} after {} iterations (residual {:e})",
        .0.status, .0.iterations, .0.final_residual
    )]
    Solver(Box<SolverReport>),

    #[error("unknown theorem id `{id}`; known ids: {}", known.join(", "))]
    UnknownTheorem { id: String, known: Vec<String> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_) => ErrorKind::Parse,
            Error::Solver(_) => ErrorKind::Convergence,
            Error::NumericalFailure { .. } => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
            Error::DimensionMismatch { .. }
            | Error::LengthMismatch { .. }
            | Error::NotSquare { .. }
            | Error::NotHermitian { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::Domain(_)
            | Error::UnknownTheorem { .. }
            | Error::Precondition(_) => ErrorKind::Domain,
        }
    }

    pub fn solver_report(&self) -> Option<&SolverReport> {
        match self {
            Error::Solver(report) => Some(report),
            _ => None,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
