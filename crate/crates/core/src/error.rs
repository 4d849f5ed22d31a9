use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported format_version {found} in {context} (supported: {supported})")]
    FormatVersion {
        context: String,
        found: u64,
        supported: u64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("weight matrix is all zero: nothing observed")]
    NothingObserved,

    #[error("non-finite value in {factor} after iteration {iteration}")]
    NonFinite { factor: &'static str, iteration: usize },

    #[error("{skills} skills exceed the brute-force limit of {limit}; use the co-factorization solver instead")]
    TooManySkills { skills: usize, limit: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("simulation failed: {0}")]
    Simulation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code for the CLI: 2 for usage/input problems, 1 for
    /// failures that happen while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Validation(_)
            | Error::Dimension(_)
            | Error::InvalidConfig(_)
            | Error::FormatVersion { .. }
            | Error::Precondition(_)
            | Error::NothingObserved
            | Error::TooManySkills { .. } => 2,
            Error::NonFinite { .. } | Error::Degenerate(_) | Error::Simulation(_) => 1,
        }
    }
}
