use thiserror::Error;

/// Errors produced by validation in `eprsim-core`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("direction ({x}, {y}, {z}) is not unit-norm (|v|² = {norm_sq})")]
    NonUnitDirection {
        x: f64,
        y: f64,
        z: f64,
        norm_sq: f64,
    },

    #[error("cannot normalize a zero or non-finite vector")]
    DegenerateVector,

    #[error("invalid probability table: {0}")]
    InvalidDistribution(String),

    #[error("hidden state was prepared for {state} but measured with {spec}")]
    ModelMismatch {
        spec: &'static str,
        state: &'static str,
    },

    #[error("{operation} requires the {expected} model, got {got}")]
    WrongModel {
        operation: &'static str,
        expected: &'static str,
        got: &'static str,
    },

    #[error("at least {min} trials are required, got {got}")]
    InsufficientTrials { got: u64, min: u64 },

    #[error("invalid angle grid: {0}")]
    InvalidGrid(String),

    #[error("finite-difference step {0} is outside (0, 0.1]")]
    InvalidEpsilon(f64),

    #[error("cannot estimate a correlation from zero trials")]
    ZeroTotal,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
