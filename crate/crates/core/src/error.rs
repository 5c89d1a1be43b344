use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid parameters or configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine failed to meet its accuracy or stability contract.
    #[error("numerical failure at phi = {phi}: {reason}")]
    Numerical { phi: f64, reason: String },

    /// Eigenvalues of the reduced state coincide, so the eigenvector branch is undefined.
    #[error("degenerate spectrum at phi = {phi}")]
    Degenerate { phi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numerical(phi: f64, reason: impl Into<String>) -> Self {
        Error::Numerical {
            phi,
            reason: reason.into(),
        }
    }
}
