/// Error type shared across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested point is a genuine singularity of the function.
    #[error("singularity: {0}")]
    Singularity(String),
    /// Exact integer arithmetic left the representable range.
    #[error("integer overflow: {0}")]
    Overflow(String),
    /// Inconsistent or invalid configuration of a system object.
    #[error("configuration error: {0}")]
    Config(String),
    /// Underlying I/O failure, with the offending path echoed by the caller.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed structured input (profile or experiment files).
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
