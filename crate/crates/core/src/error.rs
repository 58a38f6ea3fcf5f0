use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A table lookup failed (e.g. no clock or calibration row for a V_DD).
    #[error("lookup failed: {0}")]
    Lookup(String),

    /// A trace line could not be parsed.
    #[error("trace line {line}: {reason}")]
    Ingestion { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn lookup(msg: impl Into<String>) -> Self {
        Error::Lookup(msg.into())
    }
}
