//! Annual growth forecasts from an external source, mapped onto the
//! quarterly log-level target.

use crate::error::{Error, Result};
use crate::timeseries::{Quarter, QuarterRange, Series};

use super::records::{ForecastKind, ForecastRecord};

/// Compound annual rates (decimals) from a base log level:
/// `ln L_n = ln L_0 + Σ_{j<=n} ln(1 + r_j)`. Entry `n - 1` is the log level
/// at the Q4 that ends forecast year `n`.
pub fn convert_annual_forecasts(base_log_level: f64, annual_rates: &[f64]) -> Result<Vec<f64>> {
    if !base_log_level.is_finite() {
        return Err(Error::NonFinite("base level"));
    }
    let mut level = base_log_level;
    annual_rates
        .iter()
        .map(|&r| {
            if !r.is_finite() {
                return Err(Error::NonFinite("annual growth rate"));
            }
            if r <= -1.0 {
                return Err(Error::InvalidParameter(format!("growth rate {r} <= -100%")));
            }
            level += r.ln_1p();
            Ok(level)
        })
        .collect()
}

/// One forecast issue: growth rates for `year`, `year + 1`, ...
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualVintage {
    pub year: i32,
    pub rates: Vec<f64>,
}

/// Records for an external source. The issue of year `V` is anchored at
/// the observed level of `(V-1)Q4`; its `n`-th rate gives the forecast for
/// `(V-1+n)Q4`, i.e. origin `(V-1)Q4` and horizon `4n`. Only horizons in
/// `horizons` with targets inside `eval` are kept.
pub fn external_records(
    model: &str,
    vintages: &[AnnualVintage],
    log_gdp: &Series,
    horizons: &[usize],
    eval: QuarterRange,
) -> Result<Vec<ForecastRecord>> {
    let mut out = Vec::new();
    for v in vintages {
        let origin = Quarter::new(v.year - 1, 4)?;
        let base = log_gdp.require(origin, "gdp")?;
        for (n, level) in convert_annual_forecasts(base, &v.rates)?.into_iter().enumerate() {
            let h = 4 * (n + 1);
            let target = origin + h as i64;
            if !horizons.contains(&h) || !eval.contains(target) {
                continue;
            }
            let realized = log_gdp.require(target, "gdp")?;
            out.push(ForecastRecord {
                model: model.to_string(),
                predictor: String::new(),
                origin,
                horizon: h,
                kind: ForecastKind::Iterated,
                forecast: level,
                realized,
                error: realized - level,
                bic: None,
            });
        }
    }
    super::records::sort_records(&mut out);
    Ok(out)
}
