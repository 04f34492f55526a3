//! Quarterly macro forecasting engine.
//!
//! Builds financial-cycle indicators from raw quarterly series, fits
//! single-predictor ARDL and VAR models alongside shrinkage competitors
//! (Minnesota-prior BVAR, LASSO VAR, factor VAR), and runs recursive
//! pseudo-out-of-sample backtests that rank predictors by MSFE.

pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod models;
pub mod simulate;
pub mod timeseries;

pub use error::{Error, ErrorClass, Result};
