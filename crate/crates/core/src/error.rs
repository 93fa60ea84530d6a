use thiserror::Error;

/// Errors raised by the library. Conditions that are part of the
/// classification itself (a failed structure condition, a rejected family
/// parameter) are reported as data, not through this type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid weight system: {0}")]
    InvalidWeightSystem(String),

    #[error("invalid series support: {0}")]
    InvalidSupport(String),

    #[error("counterexample: {0}")]
    Counterexample(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("incompatible record versions: {0}")]
    VersionMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
