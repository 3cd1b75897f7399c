use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A domain or surface description was rejected at construction.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// The input carries too little information (e.g. a constant function).
    #[error("degenerate input in {op}: {reason}")]
    Degenerate { op: &'static str, reason: String },

    /// Solver configuration rejected.
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn degenerate(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            op,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
