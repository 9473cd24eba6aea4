use thiserror::Error;

/// Errors raised by the procedures, the theory routines and the simulation
/// harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdrError {
    /// A parameter lies outside its admissible range.
    #[error("configuration error: {0}")]
    Config(String),

    /// The model lacks a capability the operation needs (e.g. a density).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Truth labels were required but the batch carries none.
    #[error("batch has no null/alternative labels")]
    MissingLabels,

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    /// A text specification (model string, CSV cell, JSON config) did not parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// The premise of an asymptotic result does not hold for the inputs.
    #[error("premise violated: {0}")]
    PremiseViolated(String),
}

pub type Result<T> = std::result::Result<T, FdrError>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(FdrError::Config(msg.into()))
}
