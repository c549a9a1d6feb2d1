use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed input file. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid vocabulary: {0}")]
    InvalidVocab(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("word {0:?} has no segmentation under the current vocabulary")]
    Unsegmentable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("rank-deficient design matrix: predictor {0:?} is collinear with the others")]
    RankDeficient(String),

    #[error("{0}")]
    InvalidInput(String),

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A pipeline stage failed for one experimental condition.
    #[error("stage {stage} failed for {condition}: {source}")]
    Stage {
        stage: String,
        condition: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// The innermost error, looking through [`Error::Stage`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }


    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
