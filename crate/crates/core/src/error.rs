use std::path::PathBuf;

use crate::agents::AgentError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed proposal: {0}")]
    MalformedProposal(String),

    #[error("design has no cells")]
    EmptyDesign,

    #[error("progress history is empty")]
    EmptyHistory,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("batch contains no runs")]
    EmptyBatch,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Agent(#[from] AgentError),

    #[error("template {template}: {message}")]
    Template { template: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("batch finished with {failed} of {total} runs in error: {details}")]
    PartialBatch {
        failed: usize,
        total: usize,
        details: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
