use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: String, detail: String },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("overflow: log-magnitude {log_magnitude} exceeds threshold")]
    Overflow { log_magnitude: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{func} did not converge: {detail}")]
    Convergence { func: &'static str, detail: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("truncation gate: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            detail: detail.into(),
        }
    }
}
