use thiserror::Error;

/// Errors raised by tensor construction, structured algebra and the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied inconsistent shapes, indices or parameters.
    #[error("usage error: {0}")]
    Usage(String),
    /// An operation would exceed a configured size or work cap.
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    /// A generator submatrix or factor block is numerically singular.
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
