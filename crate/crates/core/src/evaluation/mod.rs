//! Pseudo-out-of-sample evaluation: window schemes, the backtest harness,
//! accuracy rankings, forecast combinations and encompassing tests.

mod combine;
mod encf;
mod external;
mod harness;
mod insample;
mod metrics;
mod records;
mod windows;

pub use combine::{bma_weights, combine_forecasts, complete_models, Combination, CombinationScheme};
pub use encf::enc_f;
pub use external::{convert_annual_forecasts, external_records, AnnualVintage};
pub use harness::{origins_for, run_pseudo_oos, ModelSpec, OosData, OosRun, GDP_GROWTH};
pub use insample::{rank_insample, InSampleRanking, InSampleRow};
pub use metrics::{evaluate, msfe, relative_msfe, restrict_to, rmsfe, EvaluationReport, HorizonReport, ReportRow};
pub use records::{sort_records, ForecastKind, ForecastRecord};
pub use windows::{WindowKind, WindowScheme};
