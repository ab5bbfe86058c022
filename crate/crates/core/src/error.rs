use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to converge or violated its accuracy contract.
    #[error("numeric error: {message} ({diagnostics})")]
    Numeric { message: String, diagnostics: String },

    /// The requested size exceeds what the chosen method supports.
    #[error("capacity error: N = {n} exceeds the exact-QFI cap of {cap}; use the bound method instead")]
    Capacity { n: usize, cap: usize },

    #[error("state document error: {0}")]
    Document(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, diagnostics: impl Into<String>) -> Self {
        Error::Numeric {
            message: msg.into(),
            diagnostics: diagnostics.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
