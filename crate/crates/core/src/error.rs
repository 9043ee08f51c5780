use std::io;

use thiserror::Error;

/// Errors raised by trace parsing, analysis and the benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("nothing to localize: no suspicious invocation block carries a stack")]
    NothingToLocalize,

    #[error("coverage matrix: {0}")]
    Coverage(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
