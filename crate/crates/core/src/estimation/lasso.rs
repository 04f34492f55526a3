use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::DesignMatrix;

/// Sweeps between attempts to solve the KKT system on a stable support.
const POLISH_GAP: usize = 10;

/// Relative slack allowed in the optimality check of a homotopy solution.
const KKT_SLACK: f64 = 1e-9;

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    /// Follow the exact solution path first; coordinate descent only runs
    /// if the path breaks down (singular active set).
    pub homotopy: bool,
    /// Stop coordinate descent once the largest coefficient change in a
    /// sweep (standardized scale) falls below this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            homotopy: true,
            tolerance: 1e-8,
            max_sweeps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub intercept: f64,
    /// Slopes on the original column scale.
    pub coefficients: Vec<f64>,
    /// Coordinate-descent sweeps; zero when the homotopy path was exact.
    pub sweeps: usize,
}

impl LassoFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum::<f64>()
    }
}

/// Column means and population standard deviations.
pub(crate) fn column_moments(x: &DesignMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    x.data()
        .column_iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        })
        .unzip()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

enum Event {
    End,
    Add(usize),
    Drop(usize),
}

/// A standardized design, reusable across responses (e.g. the equations
/// of a VAR).
///
/// The objective is `(1/2n)‖y - b0 - Zγ‖² + λ‖γ‖₁` where `Z` holds the
/// columns centred and scaled to unit (population) variance; `y` is only
/// centred, so `lambda` is in units of `y`. Slopes are mapped back to the
/// original scale on return.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    means: Vec<f64>,
    scales: Vec<f64>,
    columns: Vec<Vec<f64>>,
    /// `Z'Z / n`
    gram: DMatrix<f64>,
}

impl LassoProblem {
    /// `x` must not contain a constant column.
    pub fn new(x: &DesignMatrix) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyInput("LASSO sample"));
        }
        let (means, scales) = column_moments(x);
        for (j, (&m, &s)) in means.iter().zip(&scales).enumerate() {
            if s <= 1e-13 * m.abs().max(1.0) {
                return Err(Error::ConstantColumn(x.labels()[j].clone()));
            }
        }
        let columns: Vec<Vec<f64>> = x
            .data()
            .column_iter()
            .enumerate()
            .map(|(j, c)| c.iter().map(|v| (v - means[j]) / scales[j]).collect())
            .collect();
        let n = x.nrows() as f64;
        let k = columns.len();
        let mut gram = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let g = dot(&columns[i], &columns[j]) / n;
                gram[(i, j)] = g;
                gram[(j, i)] = g;
            }
        }
        Ok(Self {
            means,
            scales,
            columns,
            gram,
        })
    }

    fn nrows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn solve(&self, y: &[f64], lambda: f64) -> Result<LassoFit> {
        self.solve_with(y, lambda, LassoOptions::default())
    }

    pub fn solve_with(&self, y: &[f64], lambda: f64, options: LassoOptions) -> Result<LassoFit> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "LASSO penalty must be finite and >= 0, got {lambda}"
            )));
        }
        let n = self.nrows();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} observations for {n} design rows",
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dependent variable"));
        }
        let nf = n as f64;
        let y_mean = y.iter().sum::<f64>() / nf;
        let centred: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
        let c0: Vec<f64> = self.columns.iter().map(|z| dot(z, &centred) / nf).collect();

        let mut gamma = vec![0.0; self.columns.len()];
        let mut sweeps = 0;
        let exact = options.homotopy
            && match self.homotopy(&c0, lambda) {
                Some(g) => {
                    let ok = self.satisfies_kkt(&c0, &g, lambda);
                    gamma = g;
                    ok
                }
                None => false,
            };
        if !exact {
            sweeps = self.descend(&centred, &mut gamma, lambda, options)?;
        }

        let coefficients: Vec<f64> = gamma.iter().zip(&self.scales).map(|(g, s)| g / s).collect();
        let intercept = y_mean - coefficients.iter().zip(&self.means).map(|(b, m)| b * m).sum::<f64>();
        Ok(LassoFit {
            intercept,
            coefficients,
            sweeps,
        })
    }

    /// Correlations `Z'(y - Zγ)/n` from `c0 = Z'y/n`.
    fn correlations(&self, c0: &[f64], gamma: &[f64]) -> Vec<f64> {
        let active: Vec<(usize, f64)> = gamma
            .iter()
            .enumerate()
            .filter(|(_, g)| **g != 0.0)
            .map(|(j, g)| (j, *g))
            .collect();
        (0..c0.len())
            .map(|j| c0[j] - active.iter().map(|&(i, g)| self.gram[(j, i)] * g).sum::<f64>())
            .collect()
    }

    fn satisfies_kkt(&self, c0: &[f64], gamma: &[f64], lambda: f64) -> bool {
        let scale = c0.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let slack = KKT_SLACK * scale.max(lambda);
        self.correlations(c0, gamma).iter().zip(gamma).all(|(c, g)| {
            if *g == 0.0 {
                c.abs() <= lambda + slack
            } else {
                (c - lambda * g.signum()).abs() <= slack
            }
        })
    }

    /// Follow the piecewise-linear solution path from the all-zero
    /// solution at `max|c0|` down to `lambda`, adding a column when its
    /// correlation reaches the current penalty and dropping one when its
    /// coefficient crosses zero. `None` if the active Gram matrix turns
    /// singular or the path does not terminate.
    fn homotopy(&self, c0: &[f64], lambda: f64) -> Option<Vec<f64>> {
        let k = c0.len();
        let mut gamma = vec![0.0; k];
        let (first, mut mu) =
            c0.iter().enumerate().fold(
                (0, 0.0_f64),
                |best, (j, c)| if c.abs() > best.1 { (j, c.abs()) } else { best },
            );
        if mu <= lambda {
            return Some(gamma);
        }
        let mut active = vec![first];
        let mut signs = vec![c0[first].signum()];
        let mut is_active = vec![false; k];
        is_active[first] = true;
        let mut dropped = None;
        for _ in 0..20 * (k + 1) {
            let a = active.len();
            let gaa = DMatrix::from_fn(a, a, |i, j| self.gram[(active[i], active[j])]);
            let dir = gaa.cholesky()?.solve(&DVector::from_column_slice(&signs));
            let c = self.correlations(c0, &gamma);
            let slope: Vec<f64> = (0..k)
                .map(|j| active.iter().zip(dir.iter()).map(|(&i, d)| self.gram[(j, i)] * d).sum())
                .collect();

            let mut step = mu - lambda;
            let mut event = Event::End;
            for j in (0..k).filter(|&j| !is_active[j] && Some(j) != dropped) {
                for (num, den) in [(mu - c[j], 1.0 - slope[j]), (mu + c[j], 1.0 + slope[j])] {
                    if den > 1e-12 {
                        let t = num / den;
                        if t >= 0.0 && t < step {
                            step = t;
                            event = Event::Add(j);
                        }
                    }
                }
            }
            for (i, (&j, d)) in active.iter().zip(dir.iter()).enumerate() {
                if *d != 0.0 {
                    let t = -gamma[j] / d;
                    if t > 0.0 && t < step {
                        step = t;
                        event = Event::Drop(i);
                    }
                }
            }

            for (&j, d) in active.iter().zip(dir.iter()) {
                gamma[j] += step * d;
            }
            mu -= step;
            dropped = None;
            match event {
                Event::End => return Some(gamma),
                Event::Add(j) => {
                    active.push(j);
                    signs.push((c[j] - step * slope[j]).signum());
                    is_active[j] = true;
                }
                Event::Drop(i) => {
                    let j = active.remove(i);
                    signs.remove(i);
                    is_active[j] = false;
                    gamma[j] = 0.0;
                    dropped = Some(j);
                }
            }
        }
        None
    }

    /// Cyclic coordinate descent from `gamma`. Once the support and signs
    /// survive a full sweep unchanged, the KKT system on that support is
    /// solved directly and kept if it satisfies every optimality condition.
    fn descend(&self, centred: &[f64], gamma: &mut Vec<f64>, lambda: f64, options: LassoOptions) -> Result<usize> {
        let nf = centred.len() as f64;
        let mut resid = centred.to_vec();
        for (z, g) in self.columns.iter().zip(gamma.iter()) {
            if *g != 0.0 {
                for (r, zi) in resid.iter_mut().zip(z) {
                    *r -= zi * g;
                }
            }
        }
        let mut sweeps = 0;
        let mut last_polish = 0;
        loop {
            if sweeps == options.max_sweeps {
                return Err(Error::NonConvergence(sweeps));
            }
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            let mut support_stable = true;
            for (j, z) in self.columns.iter().enumerate() {
                let old = gamma[j];
                let rho = dot(z, &resid) / nf + old;
                let new = soft_threshold(rho, lambda);
                let delta = new - old;
                if delta != 0.0 {
                    for (r, zi) in resid.iter_mut().zip(z) {
                        *r -= zi * delta;
                    }
                    gamma[j] = new;
                    max_change = max_change.max(delta.abs());
                    support_stable &= old.signum() == new.signum() && old != 0.0 && new != 0.0;
                }
            }
            if max_change < options.tolerance {
                return Ok(sweeps);
            }
            if support_stable && sweeps - last_polish >= POLISH_GAP {
                last_polish = sweeps;
                if let Some(exact) = self.polish(centred, gamma, lambda) {
                    *gamma = exact;
                    return Ok(sweeps);
                }
            }
        }
    }

    /// Exact solution for the support and signs of `gamma`, if they are the
    /// right ones: solve `Z_A'Z_A b = Z_A'y - n·λ·s` and accept when the
    /// signs hold and every excluded column satisfies `|z_j'r| <= n·λ`.
    fn polish(&self, centred: &[f64], gamma: &[f64], lambda: f64) -> Option<Vec<f64>> {
        let active: Vec<usize> = (0..gamma.len()).filter(|&j| gamma[j] != 0.0).collect();
        if active.is_empty() {
            return None;
        }
        let nf = centred.len() as f64;
        let a = active.len();
        let gaa = DMatrix::from_fn(a, a, |i, k| self.gram[(active[i], active[k])]);
        let rhs = DVector::from_fn(a, |i, _| {
            let j = active[i];
            dot(&self.columns[j], centred) / nf - lambda * gamma[j].signum()
        });
        let b = gaa.cholesky()?.solve(&rhs);
        if active
            .iter()
            .zip(b.iter())
            .any(|(&j, v)| v.signum() != gamma[j].signum() || *v == 0.0)
        {
            return None;
        }
        let mut resid = centred.to_vec();
        for (&j, v) in active.iter().zip(b.iter()) {
            for (r, z) in resid.iter_mut().zip(&self.columns[j]) {
                *r -= z * v;
            }
        }
        let bound = lambda * (1.0 + KKT_SLACK);
        let inactive_ok = (0..gamma.len())
            .filter(|j| gamma[*j] == 0.0)
            .all(|j| (dot(&self.columns[j], &resid) / nf).abs() <= bound);
        if !inactive_ok {
            return None;
        }
        let mut out = vec![0.0; gamma.len()];
        for (&j, v) in active.iter().zip(b.iter()) {
            out[j] = *v;
        }
        Some(out)
    }
}

/// L1-penalized least squares with an unpenalized intercept; see
/// [`LassoProblem`] for the objective.
pub fn lasso_fit(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<LassoFit> {
    lasso_fit_with(x, y, lambda, LassoOptions::default())
}

pub fn lasso_fit_with(x: &DesignMatrix, y: &[f64], lambda: f64, options: LassoOptions) -> Result<LassoFit> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations for {} design rows",
            y.len(),
            x.nrows()
        )));
    }
    LassoProblem::new(x)?.solve_with(y, lambda, options)
}
