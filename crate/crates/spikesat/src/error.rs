use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric input that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// Matrix/vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A value fell outside its documented domain.
    #[error("value out of range: {0}")]
    Range(String),
    /// Serialized data (raster file, CSV, model JSON) is malformed.
    #[error("malformed data: {0}")]
    Format(String),
    /// A scenario or parameter combination that cannot be run.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
