use alloc::string::String;
use alloc::vec::Vec;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("singular or ill-conditioned system (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("no convergence after {iterations} iterations (residual history {residual_history:?})")]
    NoConvergence {
        iterations: usize,
        residual_history: Vec<f64>,
    },
    #[error("missing derivative table entry: {0}")]
    MissingDerivative(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
