use thiserror::Error;

/// Errors raised by the numeric and arithmetic kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation
    /// (non-unit residue, composite modulus, `q | n` for a Kloosterman sum).
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed call: mismatched lengths, bad configuration, out-of-table access.
    #[error("usage error: {0}")]
    Usage(String),
    /// A stated parameter range of a bound or theorem is violated.
    #[error("range error: {0}")]
    Range(String),
    /// Quadrature or other numerical procedure failed to converge.
    #[error("numerics error: {0}")]
    Numerics(String),
    /// Requested computation exceeds the configured resource envelope.
    #[error("resource error: {0}")]
    Resource(String),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Usage(_) => "usage",
            Error::Range(_) => "range",
            Error::Numerics(_) => "numerics",
            Error::Resource(_) => "resource",
        }
    }

    /// The message without the variant prefix.
    pub fn message(&self) -> &str {
        match self {
            Error::Domain(m) | Error::Usage(m) | Error::Range(m) | Error::Numerics(m) | Error::Resource(m) => m,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
