//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulator and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: unknown gate, malformed parameter, bad qubit
    /// count, and similar caller mistakes.
    #[error("configuration error: {0}")]
    Config(String),

    /// Dimension or index mismatch between operands.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A measurement outcome with (numerically) zero probability was
    /// requested.
    #[error("requested measurement outcome has zero probability")]
    ImpossibleOutcome,

    /// A numeric parameter lies outside its admissible range.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    /// Statistical estimation failed (degenerate counts, no data, ...).
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Underlying I/O failure.
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// A data file did not match the expected format.
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
