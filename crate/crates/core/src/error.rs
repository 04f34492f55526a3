//! Error type shared by every module of the engine.

use thiserror::Error;

use crate::timeseries::Quarter;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad parameters or configuration supplied by the caller.
    Config,
    /// Input data is malformed, missing or too short.
    Data,
    /// An estimator failed numerically (rank loss, non-convergence).
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed quarter '{0}' (expected YYYYQd)")]
    MalformedQuarter(String),

    #[error("invalid quarter digit in '{0}' (must be 1..4)")]
    InvalidQuarter(String),

    #[error("series must contain at least one observation")]
    EmptySeries,

    #[error("non-positive value {value} in '{label}' at {quarter} under a log transform")]
    NonPositive {
        label: String,
        quarter: Quarter,
        value: f64,
    },

    #[error("interior missing value in '{label}' at {quarter}")]
    InteriorGap { label: String, quarter: Quarter },

    #[error("horizon {horizon} is not shorter than the series length {len}")]
    HorizonTooLong { horizon: usize, len: usize },

    #[error("splice proxy has no value at {0}")]
    ProxyGap(Quarter),

    #[error("splice proxy is zero at {0}")]
    ZeroProxy(Quarter),

    #[error("splice proxy does not overlap the base series start {0}")]
    ProxyNoOverlap(Quarter),

    #[error("duplicate label '{0}'")]
    DuplicateLabel(String),

    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error("unknown transform code '{0}'")]
    UnknownTransform(String),

    #[error("no quarter reaches coverage threshold {0}")]
    NoCoverage(f64),

    #[error("missing value for '{label}' at {quarter}")]
    MissingValue { label: String, quarter: Quarter },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient observations: need {needed}, have {available}")]
    InsufficientObservations { needed: usize, available: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("design matrix is rank deficient at column '{0}'")]
    RankDeficient(String),

    #[error("residual sum of squares is not positive (perfect fit)")]
    DegenerateFit,

    #[error("coordinate descent did not converge after {0} sweeps")]
    NonConvergence(usize),

    #[error("column '{0}' has zero variance")]
    ConstantColumn(String),

    #[error("residual covariance is singular")]
    SingularCovariance,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("record sets are misaligned: {0}")]
    Misaligned(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) | Error::UnknownTransform(_) => ErrorClass::Config,
            Error::RankDeficient(_) | Error::DegenerateFit | Error::NonConvergence(_) | Error::SingularCovariance => {
                ErrorClass::Numerical
            }
            _ => ErrorClass::Data,
        }
    }

    /// True when the failure only means the data cannot support this fit yet,
    /// e.g. a predictor whose history is too short for an early window.
    pub fn is_data_shortage(&self) -> bool {
        matches!(
            self,
            Error::InsufficientObservations { .. } | Error::MissingValue { .. }
        )
    }
}
