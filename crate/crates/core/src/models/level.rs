use crate::error::{Error, Result};

/// Rebuild log levels from year-on-year log growth forecasts:
/// `L(o+s) = g(o+s) + L(o+s-4)`, seeded with observed levels for `s <= 4`.
///
/// `log_levels` ends at the origin and must hold at least four values.
/// Returns the levels for `o+1 ..= o+h`.
pub fn cumulate_path(yoy_forecasts: &[f64], log_levels: &[f64]) -> Result<Vec<f64>> {
    if yoy_forecasts.is_empty() {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    if log_levels.len() < 4 {
        return Err(Error::InsufficientObservations {
            needed: 4,
            available: log_levels.len(),
        });
    }
    let mut path: Vec<f64> = log_levels[log_levels.len() - 4..].to_vec();
    for g in yoy_forecasts {
        let lagged = path[path.len() - 4];
        path.push(g + lagged);
    }
    Ok(path.split_off(4))
}

/// Log level at `origin + h` with `h = yoy_forecasts.len()`.
pub fn cumulate_to_level(yoy_forecasts: &[f64], log_levels: &[f64]) -> Result<f64> {
    Ok(*cumulate_path(yoy_forecasts, log_levels)?
        .last()
        .expect("non-empty horizon"))
}
