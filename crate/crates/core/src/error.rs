use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Problems with the measured data itself.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("missing or malformed header (expected `{expected}`)")]
    MissingHeader { expected: String },
    #[error("unbalanced design: laboratory `{lab}` has {found} replicates, expected {expected}")]
    Unbalanced {
        lab: String,
        found: usize,
        expected: usize,
    },
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("non-numeric value `{value}` at line {line}")]
    NonNumeric { line: usize, value: String },
    #[error("non-finite value at laboratory {lab}, replicate {replicate}")]
    NonFinite { lab: usize, replicate: usize },
    #[error("duplicate replicate `{replicate}` for laboratory `{lab}`")]
    DuplicateReplicate { lab: String, replicate: String },
    #[error("at least 2 laboratories are required, found {0}")]
    TooFewLabs(usize),
    #[error("at least 2 replicates per laboratory are required, found {0}")]
    TooFewReplicates(usize),
    #[error("dataset is empty")]
    Empty,
}

impl DataError {
    /// Stable numeric code, one per failure kind.
    pub fn code(&self) -> u32 {
        match self {
            DataError::MissingHeader { .. } => 10,
            DataError::Unbalanced { .. } => 11,
            DataError::Ragged { .. } => 12,
            DataError::NonNumeric { .. } => 13,
            DataError::NonFinite { .. } => 14,
            DataError::DuplicateReplicate { .. } => 15,
            DataError::TooFewLabs(_) => 16,
            DataError::TooFewReplicates(_) => 17,
            DataError::Empty => 18,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("invalid probability {0}; must lie strictly between 0 and 1")]
    InvalidProbability(f64),
    #[error("invalid degrees of freedom {0}")]
    InvalidDegreesOfFreedom(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidProbability(_) | Error::InvalidDegreesOfFreedom(_) => 2,
            Error::Data(_) | Error::Io { .. } => 3,
            Error::Numeric(_) => 4,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}
