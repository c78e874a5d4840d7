use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidInput(&'static str),
    /// Two shapes that must agree do not.
    DimensionMismatch { expected: usize, actual: usize },
    /// A statistic is undefined for the given data (e.g. zero variance).
    Degenerate(&'static str),
    /// A classifier was used with descriptors it was not trained for.
    ModelMismatch(&'static str),
    /// A serialized model could not be decoded.
    CorruptModel(&'static str),
    /// A serialized model carries an unsupported format version.
    UnsupportedVersion(u16),
    /// An internal invariant was broken; the caller should halt.
    Internal(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::ModelMismatch(msg) => write!(f, "model mismatch: {msg}"),
            Error::CorruptModel(msg) => write!(f, "corrupt model file: {msg}"),
            Error::UnsupportedVersion(v) => write!(f, "unsupported model format version {v}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for Error {}
