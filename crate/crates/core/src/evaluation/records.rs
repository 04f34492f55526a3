use std::fmt;

use crate::timeseries::Quarter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ForecastKind {
    /// Forecast of cumulative log growth over `(origin, origin + h]`.
    Direct,
    /// Forecast of the log level at `origin + h`.
    Iterated,
}

impl ForecastKind {
    pub fn tag(self) -> &'static str {
        match self {
            ForecastKind::Direct => "direct",
            ForecastKind::Iterated => "iterated",
        }
    }
}

impl fmt::Display for ForecastKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One forecast of one model for one target. Direct and iterated errors are
/// both log-level errors at the target, so they are comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub model: String,
    /// Empty for models without a single predictor.
    pub predictor: String,
    pub origin: Quarter,
    pub horizon: usize,
    pub kind: ForecastKind,
    pub forecast: f64,
    pub realized: f64,
    /// `realized - forecast`.
    pub error: f64,
    /// Information criterion of the fit that produced the forecast.
    pub bic: Option<f64>,
}

impl ForecastRecord {
    pub fn target(&self) -> Quarter {
        self.origin + self.horizon as i64
    }

    pub fn key(&self) -> (Quarter, usize) {
        (self.origin, self.horizon)
    }
}

/// Deterministic order used for every emitted record set.
pub fn sort_records(records: &mut [ForecastRecord]) {
    records.sort_by(|a, b| (&a.model, a.origin, a.horizon).cmp(&(&b.model, b.origin, b.horizon)));
}
