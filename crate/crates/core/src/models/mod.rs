//! Forecasting models: direct ARDL regressions, iterated VARs and their
//! high-dimensional variants, and growth-to-level reconstruction.

mod ardl;
mod factor;
mod level;
mod sample;
mod var;

pub use ardl::{fit_ardl, forecast_direct, select_lags_ardl, ArdlInputs, ArdlSpec, FittedArdl, MAX_LAG};
pub use factor::{fit_factor_var, forecast_factor_var, FittedFactorVar, MAX_FACTORS};
pub use level::{cumulate_path, cumulate_to_level};
pub use var::{
    fit_lasso_var, fit_lbvar, fit_var, fit_var_selected, iterate_var_forecast, minnesota_dummies, select_var_lags,
    FittedVar, VarEstimator, VarSpec, LBVAR_CONSTANT_PRECISION,
};
