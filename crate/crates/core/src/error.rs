//! Error types shared across the toolkit.
//!
//! Every fallible operation returns [`Error`]. The variants separate the
//! caller's concerns: `Domain` and `Input` mean the request itself was bad,
//! `Numeric` means a computation broke down on valid-looking input, and
//! `UndefinedDeviation` signals a quantity that has no value under the
//! current release policy (division by a zero optimum).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric argument lies outside the mathematical domain of the
    /// requested quantity (negative time, point past the lifecycle, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violates a structural invariant (empty dataset,
    /// non-increasing timestamps, dimension mismatch, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A computation produced non-finite intermediate values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The requested deviation is undefined because the reference value is
    /// zero; callers should consult the release policy case instead.
    #[error("deviation undefined: {0}")]
    UndefinedDeviation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
