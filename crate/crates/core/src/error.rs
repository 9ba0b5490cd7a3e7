use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants follow the failure classes callers need to distinguish:
/// malformed inputs (`Structural`), mathematically undefined requests
/// (`Domain`), out-of-range parameters (`Validation`) and truncation or size
/// limits (`Capacity`).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("capacity error: {0}")]
    Capacity(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}
pub(crate) use bail;
