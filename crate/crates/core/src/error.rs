use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid discriminant {0}: need D > 0, D = 0 or 1 (mod 4), nonsquare")]
    InvalidDiscriminant(i64),
    #[error("{0} is not a fundamental discriminant > 1")]
    NotFundamental(i64),
    #[error("invalid quadratic form [{0},{1},{2}]")]
    InvalidForm(i64, i64, i64),
    #[error("form discriminant {form} does not match Pell discriminant {pell}")]
    DiscriminantMismatch { form: i64, pell: i64 },
    #[error("invalid strip point: {0}")]
    InvalidStripPoint(String),
    #[error("cutoff x = {0:e} exceeds the geodesic-side enumeration cap 1e8")]
    CapExceeded(f64),
    #[error("Re s = {0} is too small for the trace Dirichlet series (need >= 1.05)")]
    NonConvergent(f64),
    #[error("tail tolerance {0:e} is unreachable within the trace cutoff cap")]
    TailUnreachable(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
