use std::path::PathBuf;

/// Unified error type for the whole crate. The CLI maps variants onto process
/// exit codes, so variant choice is part of the contract: data and
/// configuration problems are distinct from numeric faults and from checkpoint
/// format violations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("no interactions survived loading")]
    EmptyDataset,

    #[error("empty walk corpus")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Loss or parameters went non-finite during training.
    #[error("numeric fault at epoch {epoch}: {msg}")]
    NumericFault { epoch: usize, msg: String },

    /// Checkpoint could not be read or decoded. Unreadable files are format
    /// errors too: callers of `load_checkpoint` get one error class.
    #[error("checkpoint: {0}")]
    Format(String),

    /// A friend distribution needs at least two users to exclude the self.
    #[error("friend distribution is degenerate: need at least 2 users")]
    DegenerateDistribution,

    /// Every entry of a Gumbel-Softmax input was masked.
    #[error("gumbel-softmax input has no unmasked entries")]
    EmptySupport,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
