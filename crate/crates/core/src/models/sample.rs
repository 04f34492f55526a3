use crate::error::{Error, Result};
use crate::timeseries::{QuarterRange, Series};

/// A series that must be observed at `t - lag` for every `lag` in
/// `min_lag..=max_lag` whenever observation `t` is used.
pub(crate) struct Term<'a> {
    pub series: &'a Series,
    pub min_lag: i64,
    pub max_lag: i64,
}

impl<'a> Term<'a> {
    pub fn new(series: &'a Series, min_lag: usize, max_lag: usize) -> Self {
        Self {
            series,
            min_lag: min_lag as i64,
            max_lag: max_lag as i64,
        }
    }
}

/// Dependent-variable dates inside `requested` for which every term is
/// observed. Series are contiguous, so the feasible set is an interval.
pub(crate) fn effective_sample(requested: QuarterRange, terms: &[Term<'_>]) -> Result<QuarterRange> {
    let mut start = requested.start;
    let mut end = requested.end;
    for term in terms {
        let valid = term.series.valid_range().ok_or(Error::InsufficientObservations {
            needed: 1,
            available: 0,
        })?;
        start = start.max(valid.start + term.max_lag);
        end = end.min(valid.end + term.min_lag);
    }
    if end < start {
        return Err(Error::InsufficientObservations {
            needed: 1,
            available: 0,
        });
    }
    Ok(QuarterRange { start, end })
}

pub(crate) fn require_rows(range: QuarterRange, needed: usize) -> Result<()> {
    if range.len() < needed {
        return Err(Error::InsufficientObservations {
            needed,
            available: range.len(),
        });
    }
    Ok(())
}
