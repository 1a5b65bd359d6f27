use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} needs {requested} entries, above the cap of {cap}")]
    ResourceLimit {
        what: String,
        requested: usize,
        cap: usize,
    },

    #[error("normal matrix is numerically singular (set sigma > 0)")]
    Singular,

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("malformed DTF data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for the precondition-violation family (bad index, shape, argument).
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::IndexOutOfRange(_) | Error::DimensionMismatch(_) | Error::InvalidArgument(_)
        )
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
