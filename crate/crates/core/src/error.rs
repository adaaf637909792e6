use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the factorization, evaluation and I/O layers.
#[derive(Debug, Error)]
pub enum NmfError {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("rank {rank} out of range for a {rows}x{cols} matrix (need 1 <= r < min(m, n))")]
    Rank { rank: usize, rows: usize, cols: usize },

    #[error("degenerate factor: column {column} of W is all zero")]
    DegenerateFactor { column: usize },

    #[error("class {class} has {size} samples, fewer than the {folds} folds requested")]
    ClassTooSmall { class: usize, size: usize, folds: usize },

    #[error("{path}: row {row}, column {column}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("objective became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    CsvLib(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NmfError>;

impl NmfError {
    pub(crate) fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        NmfError::Dimension {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        NmfError::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
