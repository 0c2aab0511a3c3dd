use thiserror::Error;

use crate::walk::PartialRun;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no connected sample after {retries} attempts")]
    GenerationFailure { retries: u32 },

    /// The walk hit its step cap before covering the graph.
    #[error("step cap {cap} reached with {} of {} nodes covered", .partial.covered, .partial.visit_counts.len())]
    CapExceeded { cap: u64, partial: Box<PartialRun> },

    #[error("walk stuck at isolated node {node}")]
    StuckWalk { node: usize },

    #[error("graph with {n} nodes exceeds the exact-oracle limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("graph is disconnected; expected cover time is infinite")]
    Disconnected,

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// Innermost error, with context wrappers peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
