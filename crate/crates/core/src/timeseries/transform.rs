use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{Quarter, QuarterRange, Series};

/// Rule mapping a raw series to its model-ready form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformCode {
    Level,
    Log,
    /// `ln x(t) - ln x(t-4)`
    YoyLogDiff,
    /// `x(t) - x(t-4)`
    YoyDiff,
    /// `ln x(t) - ln x(t-1)`
    QoqLogDiff,
}

impl TransformCode {
    pub const ALL: [TransformCode; 5] = [
        TransformCode::Level,
        TransformCode::Log,
        TransformCode::YoyLogDiff,
        TransformCode::YoyDiff,
        TransformCode::QoqLogDiff,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TransformCode::Level => "level",
            TransformCode::Log => "log",
            TransformCode::YoyLogDiff => "yoy_log_diff",
            TransformCode::YoyDiff => "yoy_diff",
            TransformCode::QoqLogDiff => "qoq_log_diff",
        }
    }

    /// Number of leading observations consumed by differencing.
    pub fn lag(self) -> usize {
        match self {
            TransformCode::Level | TransformCode::Log => 0,
            TransformCode::YoyLogDiff | TransformCode::YoyDiff => 4,
            TransformCode::QoqLogDiff => 1,
        }
    }

    fn takes_log(self) -> bool {
        matches!(
            self,
            TransformCode::Log | TransformCode::YoyLogDiff | TransformCode::QoqLogDiff
        )
    }
}

impl fmt::Display for TransformCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TransformCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        TransformCode::ALL
            .into_iter()
            .find(|c| c.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTransform(s.to_string()))
    }
}

fn checked_ln(value: f64, label: &str, quarter: Quarter) -> Result<f64> {
    if value > 0.0 {
        Ok(value.ln())
    } else {
        Err(Error::NonPositive {
            label: label.to_string(),
            quarter,
            value,
        })
    }
}

/// Apply `code` to `s`. The output keeps the input calendar; differenced
/// variants leave `code.lag()` extra leading values missing.
pub fn apply_transform(s: &Series, code: TransformCode, label: &str) -> Result<Series> {
    let base: Vec<Option<f64>> = if code.takes_log() {
        s.iter()
            .map(|(q, v)| v.map(|x| checked_ln(x, label, q)).transpose())
            .collect::<Result<_>>()?
    } else {
        s.values().to_vec()
    };
    let lag = code.lag();
    let values = match code {
        TransformCode::Level | TransformCode::Log => base,
        _ => (0..base.len())
            .map(|i| {
                if i < lag {
                    return None;
                }
                Some(base[i]? - base[i - lag]?)
            })
            .collect(),
    };
    Series::new(s.start(), values)
}

/// `ln s(q) - ln s(q-h)`: log approximation of cumulative growth over `h` quarters.
pub fn cumulative_log_growth(s: &Series, h: usize) -> Result<Series> {
    if h == 0 {
        return Err(Error::InvalidParameter("growth horizon must be >= 1".into()));
    }
    if h >= s.len() {
        return Err(Error::HorizonTooLong {
            horizon: h,
            len: s.len(),
        });
    }
    let logs: Vec<Option<f64>> = s
        .iter()
        .map(|(q, v)| v.map(|x| checked_ln(x, "series", q)).transpose())
        .collect::<Result<_>>()?;
    let values = (0..logs.len())
        .map(|i| {
            if i < h {
                return None;
            }
            Some(logs[i]? - logs[i - h]?)
        })
        .collect();
    Series::new(s.start(), values)
}

/// Cyclically-adjusted price-to-rent ratio: price at `q` over the mean rent of
/// the `window` quarters `q-window ..= q-1`. Quarters without a full rent
/// history are missing.
pub fn capr(hpi_real: &Series, rent_real: &Series, window: usize) -> Result<Series> {
    if window == 0 {
        return Err(Error::InvalidParameter("CAPR window must be >= 1".into()));
    }
    for (label, s) in [("hpi", hpi_real), ("rent", rent_real)] {
        if let Some((q, v)) = s.iter().find(|(_, v)| v.is_some_and(|x| x <= 0.0)) {
            return Err(Error::NonPositive {
                label: label.into(),
                quarter: q,
                value: v.unwrap_or_default(),
            });
        }
    }
    Series::from_fn(hpi_real.range(), |q| {
        let price = hpi_real.get(q)?;
        let mut total = 0.0;
        for lag in 1..=window as i64 {
            total += rent_real.get(q - lag)?;
        }
        Some(price / (total / window as f64))
    })
}

/// Extend `base` backwards using the quarterly growth of `proxy`:
/// `value(q) = value(q+1) / (proxy(q+1) / proxy(q))` for every quarter from
/// the proxy's first observation up to the base's first observation.
pub fn splice_backward(base: &Series, proxy: &Series) -> Result<Series> {
    let base_first = base.first_valid().ok_or(Error::EmptySeries)?;
    let proxy_first = proxy.first_valid().ok_or(Error::EmptySeries)?;
    if proxy.get(base_first).is_none() {
        return Err(Error::ProxyNoOverlap(base_first));
    }
    if proxy_first >= base_first {
        return Ok(base.clone());
    }
    let ext = QuarterRange::new(proxy_first, base_first.pred())?;
    for q in ext.iter() {
        match proxy.get(q) {
            None => return Err(Error::ProxyGap(q)),
            Some(0.0) => return Err(Error::ZeroProxy(q)),
            Some(_) => {}
        }
    }
    let mut extended = vec![0.0; ext.len()];
    let mut next = base.get(base_first).unwrap_or_default();
    for (i, q) in ext.iter().enumerate().rev() {
        let growth = proxy.get(q.succ()).unwrap_or_default() / proxy.get(q).unwrap_or_default();
        next /= growth;
        extended[i] = next;
    }
    let mut values: Vec<Option<f64>> = extended.into_iter().map(Some).collect();
    values.extend(QuarterRange::new(base_first, base.end())?.iter().map(|q| base.get(q)));
    Series::new(proxy_first, values)
}

/// Elementwise `a / b` on the common calendar; missing where either side is.
pub fn ratio(a: &Series, b: &Series) -> Result<Series> {
    let start = a.start().max(b.start());
    let end = a.end().min(b.end());
    let range =
        QuarterRange::new(start, end).map_err(|_| Error::DimensionMismatch("ratio operands do not overlap".into()))?;
    let values: Vec<Option<f64>> = range
        .iter()
        .map(|q| match (a.get(q), b.get(q)) {
            (Some(x), Some(y)) if y != 0.0 => Ok(Some(x / y)),
            (Some(_), Some(_)) => Err(Error::NonFinite("ratio denominator")),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    Series::new(start, values)
}
