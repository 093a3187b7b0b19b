use alloc::string::String;
use core::fmt;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Vector or matrix dimensions do not agree.
    DimensionMismatch { expected: usize, found: usize },
    /// A parameter or input violates its documented contract.
    InvalidInput(String),
    /// NaN or infinity appeared while solving.
    NumericalFailure { outer_iteration: usize, what: &'static str },
    /// Training produced no usable support vectors.
    DegenerateModel(String),
    /// A reference oracle failed to reach its tolerance.
    OracleFailure(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NumericalFailure { outer_iteration, what } => write!(
                f,
                "non-finite {what} encountered at outer iteration {outer_iteration}"
            ),
            Error::DegenerateModel(msg) => write!(f, "degenerate model: {msg}"),
            Error::OracleFailure(msg) => write!(f, "oracle failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
