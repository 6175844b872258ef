use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum MpfError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch in {op}: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("precision mismatch in {op}: {left} vs {right}")]
    PrecisionMismatch {
        op: &'static str,
        left: crate::Precision,
        right: crate::Precision,
    },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },

    /// Relative error was requested against an exact zero while the
    /// approximation is nonzero.
    #[error("exact value is zero; use absolute error")]
    AbsoluteErrorRequired,

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported floating-point environment: {0}")]
    Environment(String),
}

pub type Result<T, E = MpfError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> MpfError {
    MpfError::InvalidArgument(msg.into())
}
