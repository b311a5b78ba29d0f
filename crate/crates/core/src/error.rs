use alloc::string::String;

/// Errors raised by the estimation and bootstrap routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter outside the admissible region: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("matrix is ill-conditioned: smallest eigenvalue {eigenvalue:e} (trace {trace:e})")]
    IllConditioned { eigenvalue: f64, trace: f64 },

    #[error("matrix is singular: condition number {0:e}")]
    Singular(f64),

    #[error("too many discarded bootstrap replicates: {discarded} of {requested}")]
    TooManyDiscarded { discarded: usize, requested: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidInput(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
