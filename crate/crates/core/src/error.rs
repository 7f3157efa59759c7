use thiserror::Error;

/// Errors raised by the numerical kernels and the verification harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two inputs that must agree (cell alignment, interval length) do not.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An iterative solver failed to reach its tolerance.
    #[error("solver failure: {0}")]
    Solver(String),
    /// The requested quantity is not available on this geometry.
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
