//! Reduced-form VARs estimated by least squares, a Minnesota-type prior
//! with dummy observations, or per-equation LASSO.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::{dummy_obs_bayes_fit, ols_fit, DesignMatrix, LassoProblem, QrSolver};
use crate::timeseries::{Quarter, QuarterRange, Series};

use super::sample::{effective_sample, require_rows, Term};

/// Precision of the single dummy observation on the intercepts; small
/// enough to leave the constants effectively unrestricted.
pub const LBVAR_CONSTANT_PRECISION: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarEstimator {
    Ols,
    Lbvar { lambda: f64, tau: f64 },
    Lasso { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarSpec {
    /// Variable order; GDP growth comes first.
    pub labels: Vec<String>,
    pub p: usize,
    pub estimator: VarEstimator,
}

impl VarSpec {
    pub fn new(labels: Vec<String>, p: usize, estimator: VarEstimator) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidParameter("a VAR needs at least two variables".into()));
        }
        Self::build(labels, p, estimator)
    }

    /// Univariate autoregression sharing the VAR machinery; this is the
    /// iterated benchmark.
    pub fn autoregression(label: impl Into<String>, p: usize) -> Result<Self> {
        Self::build(vec![label.into()], p, VarEstimator::Ols)
    }

    fn build(labels: Vec<String>, p: usize, estimator: VarEstimator) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("VAR lag count must be >= 1".into()));
        }
        match estimator {
            VarEstimator::Lbvar { lambda, tau } if !(lambda > 0.0 && tau > 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "shrinkage parameters must be positive, got lambda={lambda}, tau={tau}"
                )))
            }
            VarEstimator::Lasso { lambda } if lambda.is_nan() || lambda < 0.0 => {
                return Err(Error::InvalidParameter(format!(
                    "LASSO penalty must be >= 0, got {lambda}"
                )))
            }
            _ => {}
        }
        Ok(Self { labels, p, estimator })
    }

    pub fn nvars(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedVar {
    pub spec: VarSpec,
    /// (1 + m·p) × m; row 0 holds intercepts, row `1 + (j-1)m + k` the
    /// coefficient on variable `k` at lag `j`, column `i` is equation `i`.
    pub coefficients: DMatrix<f64>,
    pub sample: QuarterRange,
    pub residual_cov: DMatrix<f64>,
    /// System BIC; `None` when the residual covariance is singular.
    pub bic: Option<f64>,
}

impl FittedVar {
    pub fn nvars(&self) -> usize {
        self.spec.nvars()
    }

    pub fn nobs(&self) -> usize {
        self.sample.len()
    }

    pub fn intercept(&self) -> Vec<f64> {
        self.coefficients.row(0).iter().copied().collect()
    }

    /// `B_j` with `B_j[(i, k)]` the effect of variable `k` at lag `j` on `i`.
    pub fn lag_matrix(&self, j: usize) -> DMatrix<f64> {
        assert!((1..=self.spec.p).contains(&j), "lag {j} out of range");
        let m = self.nvars();
        let block = self.coefficients.rows(1 + (j - 1) * m, m);
        block.transpose()
    }
}

pub(crate) struct VarData {
    pub y: DMatrix<f64>,
    /// Lag regressors without the constant column.
    pub x: DMatrix<f64>,
    pub sample: QuarterRange,
}

pub(crate) fn var_terms<'a>(series: &[&'a Series], p: usize) -> Vec<Term<'a>> {
    series.iter().map(|s| Term::new(s, 0, p)).collect()
}

/// Stacked observations on the given dependent-date range, which must be
/// feasible for lag depth `p`.
pub(crate) fn var_data_on(series: &[&Series], labels: &[String], p: usize, sample: QuarterRange) -> Result<VarData> {
    let m = series.len();
    let n = sample.len();
    let mut y = DMatrix::zeros(n, m);
    let mut x = DMatrix::zeros(n, m * p);
    for (i, t) in sample.iter().enumerate() {
        for (k, s) in series.iter().enumerate() {
            y[(i, k)] = s.require(t, &labels[k])?;
            for j in 1..=p {
                x[(i, (j - 1) * m + k)] = s.require(t - j as i64, &labels[k])?;
            }
        }
    }
    Ok(VarData { y, x, sample })
}

fn var_data(series: &[&Series], spec: &VarSpec, sample: QuarterRange) -> Result<VarData> {
    if series.len() != spec.nvars() {
        return Err(Error::DimensionMismatch(format!(
            "{} series for {} VAR variables",
            series.len(),
            spec.nvars()
        )));
    }
    let used = effective_sample(sample, &var_terms(series, spec.p))?;
    var_data_on(series, &spec.labels, spec.p, used)
}

fn with_constant(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.clone().insert_column(0, 1.0)
}

fn regressor_labels(spec: &VarSpec) -> Vec<String> {
    let mut labels = vec!["const".to_string()];
    for j in 1..=spec.p {
        labels.extend(spec.labels.iter().map(|l| format!("{l}_lag{j}")));
    }
    labels
}

/// `ln det` of a symmetric positive definite matrix.
fn log_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if !d.is_finite() || d <= 0.0 {
            return None;
        }
        acc += 2.0 * d.ln();
    }
    acc.is_finite().then_some(acc)
}

fn finish(spec: &VarSpec, data: &VarData, coefficients: DMatrix<f64>) -> FittedVar {
    let n = data.y.nrows();
    let m = spec.nvars();
    let resid = &data.y - with_constant(&data.x) * &coefficients;
    let residual_cov = resid.transpose() * &resid / n as f64;
    let k_total = (m * (1 + m * spec.p)) as f64;
    let nf = n as f64;
    let bic = log_det_spd(&residual_cov).map(|ld| nf * ld + k_total * nf.ln());
    FittedVar {
        spec: spec.clone(),
        coefficients,
        sample: data.sample,
        residual_cov,
        bic,
    }
}

fn ols_coefficients(spec: &VarSpec, data: &VarData) -> Result<DMatrix<f64>> {
    require_rows(data.sample, 1 + spec.nvars() * spec.p + 1)?;
    let solver = QrSolver::new(&with_constant(&data.x), &regressor_labels(spec))?;
    Ok(solver.solve(&data.y))
}

/// Residual standard deviations of univariate AR(p) fits, one per variable.
fn ar_scales(spec: &VarSpec, data: &VarData) -> Result<Vec<f64>> {
    let m = spec.nvars();
    let p = spec.p;
    let n = data.y.nrows();
    (0..m)
        .map(|k| {
            let mut design = DMatrix::zeros(n, 1 + p);
            for i in 0..n {
                design[(i, 0)] = 1.0;
                for j in 0..p {
                    design[(i, 1 + j)] = data.x[(i, j * m + k)];
                }
            }
            let mut labels = vec!["const".to_string()];
            labels.extend((1..=p).map(|j| format!("{}_lag{j}", spec.labels[k])));
            let y: Vec<f64> = data.y.column(k).iter().copied().collect();
            let fit = ols_fit(&DesignMatrix::new(design, labels)?, &y)?;
            Ok(fit.sigma2.sqrt())
        })
        .collect()
}

/// Dummy observations `(Yd, Xd)` for the Minnesota prior with zero prior
/// mean, residual-scale rows, a weak intercept prior and sum-of-coefficients
/// rows. `sigma` and `mu` are per-variable scales and sample means.
pub fn minnesota_dummies(sigma: &[f64], mu: &[f64], p: usize, lambda: f64, tau: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = sigma.len();
    let k = 1 + m * p;
    let rows = m * p + m + 1 + m;
    let mut yd = DMatrix::zeros(rows, m);
    let mut xd = DMatrix::zeros(rows, k);
    for j in 1..=p {
        for (i, s) in sigma.iter().enumerate() {
            let r = (j - 1) * m + i;
            xd[(r, 1 + r)] = j as f64 * s / lambda;
        }
    }
    for (i, s) in sigma.iter().enumerate() {
        yd[(m * p + i, i)] = *s;
    }
    xd[(m * p + m, 0)] = LBVAR_CONSTANT_PRECISION;
    for i in 0..m {
        let r = m * p + m + 1 + i;
        for j in 0..p {
            xd[(r, 1 + j * m + i)] = mu[i] / tau;
        }
    }
    (yd, xd)
}

/// Least-squares VAR; `Lbvar` and `Lasso` specs are routed to their
/// estimators.
pub fn fit_var(spec: &VarSpec, series: &[&Series], sample: QuarterRange) -> Result<FittedVar> {
    let data = var_data(series, spec, sample)?;
    let coefficients = match spec.estimator {
        VarEstimator::Ols => ols_coefficients(spec, &data)?,
        VarEstimator::Lbvar { lambda, tau } => lbvar_coefficients(spec, &data, lambda, tau)?,
        VarEstimator::Lasso { lambda } => lasso_coefficients(spec, &data, lambda)?,
    };
    Ok(finish(spec, &data, coefficients))
}

fn lbvar_coefficients(spec: &VarSpec, data: &VarData, lambda: f64, tau: f64) -> Result<DMatrix<f64>> {
    require_rows(data.sample, spec.p + 2)?;
    let sigma = ar_scales(spec, data)?;
    let n = data.y.nrows() as f64;
    let mu: Vec<f64> = data.y.column_iter().map(|c| c.sum() / n).collect();
    let (yd, xd) = minnesota_dummies(&sigma, &mu, spec.p, lambda, tau);
    dummy_obs_bayes_fit(&data.y, &with_constant(&data.x), &yd, &xd)
}

fn lasso_coefficients(spec: &VarSpec, data: &VarData, lambda: f64) -> Result<DMatrix<f64>> {
    let labels = regressor_labels(spec)[1..].to_vec();
    let problem = LassoProblem::new(&DesignMatrix::new(data.x.clone(), labels)?)?;
    let m = spec.nvars();
    let mut coefficients = DMatrix::zeros(1 + m * spec.p, m);
    for i in 0..m {
        let y: Vec<f64> = data.y.column(i).iter().copied().collect();
        let fit = problem.solve(&y, lambda)?;
        coefficients[(0, i)] = fit.intercept;
        for (r, b) in fit.coefficients.iter().enumerate() {
            coefficients[(1 + r, i)] = *b;
        }
    }
    Ok(coefficients)
}

/// Large Bayesian VAR under the Minnesota dummy-observation prior.
pub fn fit_lbvar(
    labels: Vec<String>,
    series: &[&Series],
    p: usize,
    lambda: f64,
    tau: f64,
    sample: QuarterRange,
) -> Result<FittedVar> {
    let spec = VarSpec::new(labels, p, VarEstimator::Lbvar { lambda, tau })?;
    fit_var(&spec, series, sample)
}

/// VAR with each equation estimated by LASSO on the common lag design.
pub fn fit_lasso_var(
    labels: Vec<String>,
    series: &[&Series],
    p: usize,
    lambda: f64,
    sample: QuarterRange,
) -> Result<FittedVar> {
    let spec = VarSpec::new(labels, p, VarEstimator::Lasso { lambda })?;
    fit_var(&spec, series, sample)
}

/// System-BIC lag choice among least-squares VAR(1..=pmax), all estimated on
/// the sample feasible at `pmax`.
pub fn select_var_lags(labels: &[String], series: &[&Series], pmax: usize, sample: QuarterRange) -> Result<usize> {
    if pmax == 0 {
        return Err(Error::InvalidParameter("maximum lag must be >= 1".into()));
    }
    let common = effective_sample(sample, &var_terms(series, pmax))?;
    let mut best: Option<(usize, f64)> = None;
    for p in 1..=pmax {
        let spec = VarSpec::build(labels.to_vec(), p, VarEstimator::Ols)?;
        let data = var_data_on(series, labels, p, common)?;
        let fit = finish(&spec, &data, ols_coefficients(&spec, &data)?);
        let score = fit.bic.ok_or(Error::SingularCovariance)?;
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((p, score));
        }
    }
    Ok(best.expect("pmax >= 1").0)
}

/// Least-squares VAR with BIC-selected lag length, refit on the sample
/// feasible for the chosen lag.
pub fn fit_var_selected(
    labels: Vec<String>,
    series: &[&Series],
    pmax: usize,
    sample: QuarterRange,
) -> Result<FittedVar> {
    let p = select_var_lags(&labels, series, pmax, sample)?;
    let spec = VarSpec::build(labels, p, VarEstimator::Ols)?;
    fit_var(&spec, series, sample)
}

/// Iterated forecasts for `origin + 1 ..= origin + steps`; row `s - 1` holds
/// the `s`-step-ahead forecast of every variable.
pub fn iterate_var_forecast(
    model: &FittedVar,
    series: &[&Series],
    origin: Quarter,
    steps: usize,
) -> Result<DMatrix<f64>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("forecast steps must be >= 1".into()));
    }
    let m = model.nvars();
    let p = model.spec.p;
    if series.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} series for {m} VAR variables",
            series.len()
        )));
    }
    // history[l] holds the vector at origin - l; forecasts are prepended
    let mut history: Vec<Vec<f64>> = (0..p)
        .map(|l| {
            series
                .iter()
                .zip(&model.spec.labels)
                .map(|(s, label)| s.require(origin - l as i64, label))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let b = &model.coefficients;
    let mut out = DMatrix::zeros(steps, m);
    for s in 0..steps {
        let mut next = vec![0.0; m];
        for (i, v) in next.iter_mut().enumerate() {
            let mut acc = b[(0, i)];
            for (j, lagged) in history.iter().take(p).enumerate() {
                for (k, x) in lagged.iter().enumerate() {
                    acc += b[(1 + j * m + k, i)] * x;
                }
            }
            *v = acc;
        }
        for (i, v) in next.iter().enumerate() {
            out[(s, i)] = *v;
        }
        history.insert(0, next);
        history.truncate(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Quarter {
        s.parse().unwrap()
    }

    /// Bivariate VAR(1) path; `shocks` scales deterministic innovations.
    fn simulate(b: [[f64; 2]; 2], c: [f64; 2], n: usize, shocks: f64) -> (Series, Series) {
        let mut a = vec![1.0; n];
        let mut z = vec![-0.5; n];
        for t in 1..n {
            let e1 = ((t * 37 % 17) as f64 - 8.0) / 8.0;
            let e2 = ((t * 11 % 13) as f64 - 6.0) / 6.0;
            a[t] = c[0] + b[0][0] * a[t - 1] + b[0][1] * z[t - 1] + shocks * e1;
            z[t] = c[1] + b[1][0] * a[t - 1] + b[1][1] * z[t - 1] + shocks * e2;
        }
        (
            Series::from_values(q("1980Q1"), &a).unwrap(),
            Series::from_values(q("1980Q1"), &z).unwrap(),
        )
    }

    fn labels() -> Vec<String> {
        vec!["g".into(), "x".into()]
    }

    #[test]
    fn coefficients_equal_per_equation_ols() {
        let (a, z) = simulate([[0.5, 0.1], [0.2, 0.3]], [0.1, -0.2], 60, 1.0);
        let spec = VarSpec::new(labels(), 2, VarEstimator::Ols).unwrap();
        let m = fit_var(&spec, &[&a, &z], a.range()).unwrap();
        assert_eq!(m.sample.start, q("1980Q3"));
        let data = var_data_on(&[&a, &z], &spec.labels, 2, m.sample).unwrap();
        let design = DesignMatrix::new(with_constant(&data.x), regressor_labels(&spec)).unwrap();
        for i in 0..2 {
            let y: Vec<f64> = data.y.column(i).iter().copied().collect();
            let fit = ols_fit(&design, &y).unwrap();
            for (r, c) in fit.coefficients.iter().enumerate() {
                assert!((m.coefficients[(r, i)] - c).abs() < 1e-12);
            }
        }
        assert!(m.bic.is_some());
    }

    #[test]
    fn noiseless_var_recovered() {
        let b = [[0.5, 0.2], [-0.3, 0.4]];
        let (g, x) = simulate(b, [0.05, 0.1], 20, 0.0);
        let spec = VarSpec::new(labels(), 1, VarEstimator::Ols).unwrap();
        let m = fit_var(&spec, &[&g, &x], g.range()).unwrap();
        let b1 = m.lag_matrix(1);
        for i in 0..2 {
            for k in 0..2 {
                assert!((b1[(i, k)] - b[i][k]).abs() < 1e-8);
            }
        }
        assert!((m.intercept()[0] - 0.05).abs() < 1e-8);
        assert!((m.intercept()[1] - 0.1).abs() < 1e-8);
    }

    fn handmade(p: usize, m: usize, entries: &[f64]) -> FittedVar {
        let names: Vec<String> = (0..m).map(|i| format!("v{i}")).collect();
        let spec = VarSpec::build(names, p, VarEstimator::Ols).unwrap();
        FittedVar {
            spec,
            coefficients: DMatrix::from_row_slice(1 + m * p, m, entries),
            sample: QuarterRange::new(q("2000Q1"), q("2000Q1")).unwrap(),
            residual_cov: DMatrix::zeros(m, m),
            bic: None,
        }
    }

    #[test]
    fn zero_dynamics_forecast_is_intercept() {
        let m = handmade(1, 2, &[0.3, -0.1, 0.0, 0.0, 0.0, 0.0]);
        let s = Series::from_values(q("2000Q1"), &[5.0]).unwrap();
        let f = iterate_var_forecast(&m, &[&s, &s], q("2000Q1"), 4).unwrap();
        for r in 0..4 {
            assert_eq!(f[(r, 0)], 0.3);
            assert_eq!(f[(r, 1)], -0.1);
        }
    }

    #[test]
    fn scalar_ar_closed_form() {
        let phi: f64 = 0.85;
        let m = handmade(1, 1, &[0.0, phi]);
        let y = Series::from_values(q("2000Q1"), &[2.0]).unwrap();
        let f = iterate_var_forecast(&m, &[&y], q("2000Q1"), 12).unwrap();
        for s in 1..=12 {
            assert!((f[(s - 1, 0)] - phi.powi(s as i32) * 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unconditional_mean_limit() {
        // rows: const, lag1(v0, v1), lag2(v0, v1); columns: equations
        let m = handmade(2, 2, &[0.1, 0.2, 0.5, 0.1, 0.2, 0.3, 0.1, 0.0, -0.1, 0.2]);
        let a = Series::from_values(q("2000Q1"), &[3.0, -1.0]).unwrap();
        let b = Series::from_values(q("2000Q1"), &[0.0, 4.0]).unwrap();
        let f = iterate_var_forecast(&m, &[&a, &b], q("2000Q2"), 400).unwrap();
        let sum_b = m.lag_matrix(1) + m.lag_matrix(2);
        let lhs = DMatrix::identity(2, 2) - sum_b;
        let mean = lhs.lu().solve(&DMatrix::from_column_slice(2, 1, &[0.1, 0.2])).unwrap();
        assert!((f[(399, 0)] - mean[0]).abs() < 1e-6);
        assert!((f[(399, 1)] - mean[1]).abs() < 1e-6);
    }

    #[test]
    fn forecast_errors() {
        let m = handmade(2, 1, &[0.0, 0.5, 0.2]);
        let y = Series::from_values(q("2000Q1"), &[1.0, 2.0]).unwrap();
        assert!(matches!(
            iterate_var_forecast(&m, &[&y], q("2000Q2"), 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            iterate_var_forecast(&m, &[&y], q("2000Q1"), 1),
            Err(Error::MissingValue { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(VarSpec::new(vec!["a".into()], 1, VarEstimator::Ols).is_err());
        assert!(VarSpec::new(labels(), 0, VarEstimator::Ols).is_err());
        assert!(VarSpec::new(labels(), 1, VarEstimator::Lbvar { lambda: 0.0, tau: 1.0 }).is_err());
        assert!(VarSpec::new(labels(), 1, VarEstimator::Lbvar { lambda: 0.1, tau: -1.0 }).is_err());
        assert!(VarSpec::new(labels(), 1, VarEstimator::Lasso { lambda: -0.1 }).is_err());
        assert!(VarSpec::autoregression("g", 2).is_ok());
    }

    #[test]
    fn dummy_layout() {
        let (yd, xd) = minnesota_dummies(&[2.0, 4.0], &[1.0, 3.0], 2, 0.5, 10.0);
        assert_eq!(yd.shape(), (2 * 2 + 2 + 1 + 2, 2));
        assert_eq!(xd.ncols(), 5);
        assert_eq!(xd[(0, 1)], 4.0);
        assert_eq!(xd[(1, 2)], 8.0);
        assert_eq!(xd[(2, 3)], 8.0);
        assert_eq!(xd[(3, 4)], 16.0);
        assert_eq!(yd[(4, 0)], 2.0);
        assert_eq!(yd[(5, 1)], 4.0);
        assert_eq!(xd[(6, 0)], LBVAR_CONSTANT_PRECISION);
        assert_eq!(xd[(7, 1)], 0.1);
        assert_eq!(xd[(7, 3)], 0.1);
        assert_eq!(xd[(8, 2)], 0.3);
        assert_eq!(xd[(8, 4)], 0.3);
    }
}
