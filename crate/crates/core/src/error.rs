use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("total attractiveness is zero at step {step}")]
    ZeroTotalWeight { step: usize },

    #[error("vertex {vertex} is outside the admissible range {lo}..={hi}")]
    VertexOutOfRange { vertex: usize, lo: usize, hi: usize },

    #[error("operation requires {required} mode, graph uses `{actual}`")]
    WrongKind { required: &'static str, actual: String },

    #[error("no theory prediction exists for exploratory kind `{0}`")]
    NoPrediction(String),

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("replica {stream_id} failed: {source}")]
    Replica {
        stream_id: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than the runtime.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Config(_) | Error::NoPrediction(_)
        )
    }
}
