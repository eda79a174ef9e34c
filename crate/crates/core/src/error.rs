use std::io;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("unknown community id {0}")]
    UnknownCommunity(u32),

    #[error("unknown node token `{0}`")]
    UnknownNode(String),

    #[error("empty dendrogram")]
    EmptyDendrogram,

    #[error("both node sets are empty")]
    EmptySets,

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("not enough samples: need {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("regression needs {need} points above the size threshold, got {got}")]
    InsufficientPoints { need: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("synthesis failed: {0}")]
    Synthesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
