use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GscError> = std::result::Result<T, E>;

/// Errors raised by the library.
///
/// Variants fall in two families: input errors (bad files, malformed
/// records) and parameter/feasibility errors (block lengths that do not fit,
/// degenerate statistics). [`GscError::is_input_error`] separates them so the
/// command-line front end can map them to stable exit codes.
#[derive(Debug, Error)]
pub enum GscError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: unknown sequence name '{name}'")]
    UnknownSequence {
        path: PathBuf,
        line: usize,
        name: String,
    },

    #[error("invalid coordinate space: {0}")]
    InvalidSpace(String),

    #[error("window [{lo}, {hi}) is outside [0, {n})")]
    OutOfRange { lo: u64, hi: u64, n: u64 },

    #[error("empty window")]
    EmptyWindow,

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(&'static str),

    #[error("tracks are defined over different coordinate spaces")]
    SpaceMismatch,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("infeasible block layout: {0}")]
    Infeasible(String),

    #[error("not enough replicates: have {have}, need {need}")]
    InsufficientReplicates { have: usize, need: usize },
}

impl GscError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        GscError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by unreadable or malformed input data.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            GscError::Io { .. }
                | GscError::Parse { .. }
                | GscError::UnknownSequence { .. }
                | GscError::InvalidSpace(_)
                | GscError::SpaceMismatch
        )
    }
}
