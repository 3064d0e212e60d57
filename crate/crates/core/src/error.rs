//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes do not agree for an operation.
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    Dimension {
        context: String,
        left: String,
        right: String,
    },

    /// An API contract was violated (e.g. backward on a non-scalar).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid configuration value or combination.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid input data (corpora, mentions, tag ids).
    #[error("data error: {0}")]
    Data(String),

    /// Malformed text input with a 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Invalid argument to a feature extractor (e.g. empty token).
    #[error("input error: {0}")]
    Input(String),

    /// Checkpoint file carries an unsupported format version.
    #[error("checkpoint version mismatch: found {found:?}, supported {supported:?}")]
    CheckpointVersion { found: String, supported: String },

    /// Checkpoint tensor directory disagrees with the expected model shape.
    #[error("checkpoint shape mismatch for {name}: file has {file}, expected {expected}")]
    CheckpointShape {
        name: String,
        file: String,
        expected: String,
    },

    /// Checkpoint payload is shorter than the directory promises.
    #[error("checkpoint payload truncated: expected {expected} bytes, got {got}")]
    CheckpointTruncated { expected: usize, got: usize },

    /// Training produced a non-finite loss.
    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    /// Invariant broken inside the library itself.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable one-word category, used by the CLI for machine-parsable
    /// failure lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Contract(_) => "contract",
            Error::Config(_) => "config",
            Error::Data(_) => "data",
            Error::Parse { .. } => "parse",
            Error::Precondition(_) => "precondition",
            Error::Input(_) => "input",
            Error::CheckpointVersion { .. } => "checkpoint-version",
            Error::CheckpointShape { .. } => "checkpoint-shape",
            Error::CheckpointTruncated { .. } => "checkpoint-truncated",
            Error::Diverged { .. } => "diverged",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn dim_err(context: &str, left: impl std::fmt::Debug, right: impl std::fmt::Debug) -> Error {
    Error::Dimension {
        context: context.to_string(),
        left: format!("{left:?}"),
        right: format!("{right:?}"),
    }
}
