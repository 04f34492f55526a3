use crate::error::{Error, Result};

/// Forecast-encompassing statistic of a nesting model (errors `model`) over
/// its nested benchmark (errors `benchmark`):
/// `P · mean(u1 (u1 - u2)) / mean(u2²)` with `P` the number of forecasts.
pub fn enc_f(benchmark: &[f64], model: &[f64]) -> Result<f64> {
    if benchmark.len() != model.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} benchmark errors, {} model errors",
            benchmark.len(),
            model.len()
        )));
    }
    if benchmark.is_empty() {
        return Err(Error::EmptyInput("forecast errors"));
    }
    let p = benchmark.len() as f64;
    let msfe2 = model.iter().map(|e| e * e).sum::<f64>() / p;
    if msfe2 == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let c = benchmark.iter().zip(model).map(|(u1, u2)| u1 * (u1 - u2)).sum::<f64>() / p;
    Ok(p * c / msfe2)
}
