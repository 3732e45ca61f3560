//! Error type shared by every module.

use alloc::string::String;

/// Errors reported by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A point or configuration has the wrong ambient dimension.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// A point lies outside the space (or region) it is used with.
    #[error("point outside {0}")]
    OutsideSpace(String),
    /// A parameter is out of its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The requested combination is not available in closed form.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Too few points for the requested statistic.
    #[error("need at least {needed} points, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    /// More than the allowed number of extra points were inserted.
    #[error("at most {max} extra points may be inserted, got {found}")]
    TooManyExtras { max: usize, found: usize },
    /// A sample has zero variance and cannot be standardized.
    #[error("sample has zero variance")]
    ZeroVariance,
    /// An empty sample was supplied.
    #[error("empty sample")]
    EmptySample,
    /// A regression or tail fit has too few usable points.
    #[error("unfittable: {0}")]
    Unfittable(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidParameter(String::from(msg))
}
