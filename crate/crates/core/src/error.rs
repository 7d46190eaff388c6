use num_complex::Complex64;
use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The input itself is malformed (bad model, unknown target, bad range).
    Input,
    /// A numerical routine failed on otherwise valid input.
    Numeric,
    /// The input is valid but outside the operation's domain (e.g. SP side).
    Precondition,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hamiltonian: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("target not found: {0}")]
    UnknownTarget(String),

    #[error("QR iteration did not converge after {iterations} iterations ({} of {dim} eigenvalues found)", .partial.len())]
    NonConvergence {
        iterations: usize,
        dim: usize,
        partial: Vec<Complex64>,
    },

    #[error("determinant has a non-negligible imaginary part: {re} + {im}i")]
    ComplexDeterminant { re: f64, im: f64 },

    #[error("spectrum is not ±E symmetric: best partner of {value} leaves defect {defect:.3e}")]
    BrokenPairing { value: Complex64, defect: f64 },

    #[error("inverse iteration failed to converge for eigenvalue {value} (residual {residual:.3e})")]
    InverseIteration { value: Complex64, residual: f64 },

    #[error("Jacobi diagonalization did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    JacobiNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("Fock space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("operation supports at most {max} modes, got {got}")]
    UnsupportedSize { got: usize, max: usize },

    #[error("at or beyond the exceptional point: {0}")]
    ExceptionalPoint(String),

    #[error("too close to the exceptional point: gap {gap:.3e} < 10 x step {step:.3e}")]
    NearExceptionalPoint { gap: f64, step: f64 },

    #[error("truncation n_max={n_max} leaves tail mass {tail:.3e}; increase n_max")]
    Truncation { n_max: usize, tail: f64 },

    #[error("worker pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidModel(_) | Error::InvalidParameter { .. } | Error::UnknownTarget(_) => ErrorClass::Input,
            Error::ExceptionalPoint(_)
            | Error::NearExceptionalPoint { .. }
            | Error::UnsupportedSize { .. }
            | Error::DimensionCap { .. } => ErrorClass::Precondition,
            Error::NonConvergence { .. }
            | Error::ComplexDeterminant { .. }
            | Error::BrokenPairing { .. }
            | Error::InverseIteration { .. }
            | Error::JacobiNonConvergence { .. }
            | Error::Truncation { .. }
            | Error::ThreadPool(_) => ErrorClass::Numeric,
        }
    }

    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
