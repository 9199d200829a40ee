use thiserror::Error;

/// Errors shared across the crate.
///
/// The CLI maps these onto exit codes: domain/pole problems exit with 2,
/// convergence and quadrature failures with 3.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at (or too close to) a pole of a meromorphic expression.
    #[error("pole error: {0}")]
    Pole(String),

    /// An iterative scheme failed to reach its tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Adaptive quadrature could not meet the requested tolerance.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// A configured resource cap (jump count, cell count, ...) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn pole(msg: impl Into<String>) -> Self {
        Error::Pole(msg.into())
    }
}
