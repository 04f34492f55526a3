//! Direct multi-step ARDL regressions of cumulative growth on lagged
//! year-on-year growth and one predictor.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::{bic, ols_fit, DesignMatrix, LsFit};
use crate::timeseries::{Quarter, QuarterRange, Series};

use super::sample::{effective_sample, require_rows, Term};

pub const MAX_LAG: usize = 5;

/// `y^h(t) = b0 + Σ_{j≤p} a_j y(t-h-j+1) + Σ_{j≤q} c_j x(t-h-j+1) + u(t)`.
/// `q == 0` and no predictor gives the autoregressive benchmark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArdlSpec {
    pub horizon: usize,
    pub p: usize,
    pub q: usize,
    pub predictor: Option<String>,
}

impl ArdlSpec {
    pub fn new(horizon: usize, p: usize, q: usize, predictor: Option<String>) -> Result<Self> {
        let spec = Self {
            horizon,
            p,
            q,
            predictor,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn benchmark(horizon: usize, p: usize) -> Result<Self> {
        Self::new(horizon, p, 0, None)
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be >= 1".into()));
        }
        if !(1..=MAX_LAG).contains(&self.p) {
            return Err(Error::InvalidParameter(format!(
                "AR lag count {} outside 1..={MAX_LAG}",
                self.p
            )));
        }
        match (&self.predictor, self.q) {
            (None, 0) => Ok(()),
            (Some(_), q) if (1..=MAX_LAG).contains(&q) => Ok(()),
            (None, _) => Err(Error::InvalidParameter(
                "predictor lags given without a predictor".into(),
            )),
            (Some(_), q) => Err(Error::InvalidParameter(format!(
                "predictor lag count {q} outside 1..={MAX_LAG}"
            ))),
        }
    }

    pub fn ncoef(&self) -> usize {
        1 + self.p + self.q
    }
}

/// Series an ARDL draws on: the `h`-quarter cumulative growth target, the
/// year-on-year growth it lags, and an optional predictor.
#[derive(Debug, Clone, Copy)]
pub struct ArdlInputs<'a> {
    pub target: &'a Series,
    pub own: &'a Series,
    pub predictor: Option<&'a Series>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedArdl {
    pub spec: ArdlSpec,
    pub intercept: f64,
    pub own_lags: Vec<f64>,
    pub predictor_lags: Vec<f64>,
    /// Dependent-variable dates actually used.
    pub sample: QuarterRange,
    pub fit: LsFit,
    pub bic: f64,
}

impl FittedArdl {
    pub fn r_squared(&self) -> f64 {
        self.fit.r_squared
    }
}

fn terms<'a>(inputs: &ArdlInputs<'a>, h: usize, p: usize, q: usize) -> Result<Vec<Term<'a>>> {
    let mut terms = vec![Term::new(inputs.target, 0, 0), Term::new(inputs.own, h, h + p - 1)];
    if q > 0 {
        let x = inputs
            .predictor
            .ok_or_else(|| Error::InvalidParameter("predictor series missing".into()))?;
        terms.push(Term::new(x, h, h + q - 1));
    }
    Ok(terms)
}

fn design(
    inputs: &ArdlInputs<'_>,
    h: usize,
    p: usize,
    q: usize,
    sample: QuarterRange,
) -> Result<(DesignMatrix, Vec<f64>)> {
    let n = sample.len();
    let k = 1 + p + q;
    let mut data = DMatrix::zeros(n, k);
    let mut y = Vec::with_capacity(n);
    for (i, t) in sample.iter().enumerate() {
        y.push(inputs.target.require(t, "target")?);
        data[(i, 0)] = 1.0;
        let base = t - h as i64;
        for j in 0..p {
            data[(i, 1 + j)] = inputs.own.require(base - j as i64, "own growth")?;
        }
        if q > 0 {
            let x = inputs.predictor.expect("checked by terms");
            for j in 0..q {
                data[(i, 1 + p + j)] = x.require(base - j as i64, "predictor")?;
            }
        }
    }
    let mut labels = vec!["const".to_string()];
    labels.extend((1..=p).map(|j| format!("y_lag{j}")));
    labels.extend((1..=q).map(|j| format!("x_lag{j}")));
    Ok((DesignMatrix::new(data, labels)?, y))
}

fn fit_on(inputs: &ArdlInputs<'_>, h: usize, p: usize, q: usize, sample: QuarterRange) -> Result<LsFit> {
    let (x, y) = design(inputs, h, p, q, sample)?;
    ols_fit(&x, &y)
}

/// BIC for a candidate; a perfect fit ranks ahead of everything else.
fn score(fit: &LsFit) -> Result<f64> {
    match bic(fit.rss, fit.nobs(), fit.ncoef()) {
        Ok(v) => Ok(v),
        Err(Error::DegenerateFit) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

fn argmin_bic(candidates: impl Iterator<Item = usize>, mut fit: impl FnMut(usize) -> Result<LsFit>) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for c in candidates {
        let s = score(&fit(c)?)?;
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((c, s));
        }
    }
    best.map(|b| b.0).ok_or(Error::EmptyInput("lag candidates"))
}

/// Sequential BIC selection: `p` among pure AR fits, then `q` given `p`.
/// Every candidate is estimated on the sample feasible at `(pmax, qmax)`.
/// Returns `q = 0` when `inputs` has no predictor.
pub fn select_lags_ardl(
    inputs: &ArdlInputs<'_>,
    horizon: usize,
    pmax: usize,
    qmax: usize,
    sample: QuarterRange,
) -> Result<(usize, usize)> {
    if pmax == 0 || pmax > MAX_LAG || qmax > MAX_LAG || (inputs.predictor.is_some() && qmax == 0) {
        return Err(Error::InvalidParameter(format!(
            "lag bounds ({pmax}, {qmax}) outside 1..={MAX_LAG}"
        )));
    }
    let qmax = if inputs.predictor.is_some() { qmax } else { 0 };
    let common = effective_sample(sample, &terms(inputs, horizon, pmax, qmax)?)?;
    require_rows(common, 2 + pmax + qmax)?;
    let p = argmin_bic(1..=pmax, |p| fit_on(inputs, horizon, p, 0, common))?;
    if qmax == 0 {
        return Ok((p, 0));
    }
    let q = argmin_bic(1..=qmax, |q| fit_on(inputs, horizon, p, q, common))?;
    Ok((p, q))
}

/// Least-squares ARDL on every feasible dependent date inside `sample`.
pub fn fit_ardl(spec: &ArdlSpec, inputs: &ArdlInputs<'_>, sample: QuarterRange) -> Result<FittedArdl> {
    spec.validate()?;
    if spec.predictor.is_some() && inputs.predictor.is_none() {
        return Err(Error::InvalidParameter("predictor series missing".into()));
    }
    let (h, p, q) = (spec.horizon, spec.p, spec.q);
    let used = effective_sample(sample, &terms(inputs, h, p, q)?)?;
    require_rows(used, p + q + 2)?;
    let fit = fit_on(inputs, h, p, q, used)?;
    let bic_value = score(&fit)?;
    Ok(FittedArdl {
        spec: spec.clone(),
        intercept: fit.coefficients[0],
        own_lags: fit.coefficients[1..1 + p].to_vec(),
        predictor_lags: fit.coefficients[1 + p..].to_vec(),
        sample: used,
        fit,
        bic: bic_value,
    })
}

/// Forecast of cumulative growth over `(origin, origin + h]` from data
/// observed through `origin`.
pub fn forecast_direct(model: &FittedArdl, inputs: &ArdlInputs<'_>, origin: Quarter) -> Result<f64> {
    let mut value = model.intercept;
    for (j, b) in model.own_lags.iter().enumerate() {
        value += b * inputs.own.require(origin - j as i64, "own growth")?;
    }
    if !model.predictor_lags.is_empty() {
        let x = inputs
            .predictor
            .ok_or_else(|| Error::InvalidParameter("predictor series missing".into()))?;
        let label = model.spec.predictor.as_deref().unwrap_or("predictor");
        for (j, b) in model.predictor_lags.iter().enumerate() {
            value += b * x.require(origin - j as i64, label)?;
        }
    }
    Ok(value)
}
