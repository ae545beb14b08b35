//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by matrix kernels, circuit construction and evaluation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("capacity exceeded: dimension {dim} is above the supported maximum {max}")]
    Capacity { dim: usize, max: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("state vector is not normalized (|1 - norm^2| = {deviation:.3e})")]
    NotNormalized { deviation: f64 },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("duplicate qubit index {index}")]
    DuplicateQubit { index: usize },

    #[error("duplicate interaction term at position {position}")]
    DuplicateTerm { position: usize },

    #[error("a local field has no second qubit; coupling term expected")]
    NotACoupling,

    #[error("mixed-axis coupling {found} not allowed when the term set is restricted to equal axes")]
    HeisenbergViolation { found: String },

    #[error("parameter vector has {got} entries but the term set has {expected}")]
    ParamLengthMismatch { expected: usize, got: usize },

    #[error("Trotter step count must be at least 1")]
    InvalidTrotterSteps,

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("preset '{name}' is fixed at {expected} qubits, got {got}")]
    PresetQubitCount {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("unknown target gate '{0}'")]
    UnknownTarget(String),

    #[error("unitary diagonalization did not converge")]
    DiagonalizationFailed,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
