use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("invalid shape spec: {0}")]
    InvalidSpec(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("unexpected end of file")]
    UnexpectedEof,

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn mismatch(what: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            got,
        }
    }

    /// True for failures of the numerics (divergence, non-convergence) as
    /// opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::Diverged { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
