use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A density matrix failed the Hermiticity, trace or positivity checks.
    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    /// A linear-algebra routine did not converge.
    #[error("numeric failure: {message}")]
    Numeric { message: String, matrix: Option<String> },

    /// A quantity is undefined for the given inputs (e.g. a vanishing integral).
    #[error("undefined: {0}")]
    Undefined(String),

    /// The Fock-space oracle did not converge in the cutoff.
    #[error(
        "oracle not converged: cutoff {cutoff} vs {reference} differ by {difference:.3e} (tolerance {tolerance:.1e})"
    )]
    NotConverged {
        cutoff: usize,
        reference: usize,
        difference: f64,
        tolerance: f64,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
