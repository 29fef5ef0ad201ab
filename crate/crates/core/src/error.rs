use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("validation: {0}")]
    Validation(String),

    #[error("unknown word `{0}` (not in lexicon)")]
    UnknownWord(String),

    #[error("word `{0}` has no category entry")]
    Uncategorized(String),

    #[error("vector dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("all-zero vector for `{0}`")]
    ZeroVector(String),

    #[error("cue word `{0}` not present in the vector table")]
    CueMissing(String),

    #[error("small-worldness undefined: {0}")]
    UndefinedSigma(String),

    #[error("walk stranded at `{node}` after step {step} (no incident edges, jump probability 0)")]
    Stranded { node: String, step: usize },

    #[error("corpus pair {index}: {source}")]
    AtPair {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
