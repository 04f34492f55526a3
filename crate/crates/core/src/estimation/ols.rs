use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Regressor matrix with one label per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    data: DMatrix<f64>,
    labels: Vec<String>,
}

impl DesignMatrix {
    pub fn new(data: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != data.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} columns",
                labels.len(),
                data.ncols()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::DuplicateLabel(dup.clone()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        Ok(Self { data, labels })
    }

    /// Columns named `x0, x1, ...`.
    pub fn unlabeled(data: DMatrix<f64>) -> Result<Self> {
        let labels = (0..data.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(data, labels)
    }

    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.1.len());
        if columns.iter().any(|c| c.1.len() != n) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        let (labels, cols): (Vec<_>, Vec<_>) = columns.into_iter().unzip();
        let data = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        Self::new(data, labels)
    }

    /// Prepend a column of ones labelled `const`.
    pub fn with_intercept(&self) -> Result<Self> {
        let n = self.nrows();
        let data = DMatrix::from_fn(
            n,
            self.ncols() + 1,
            |i, j| {
                if j == 0 {
                    1.0
                } else {
                    self.data[(i, j - 1)]
                }
            },
        );
        let mut labels = vec!["const".to_string()];
        labels.extend(self.labels.iter().cloned());
        Self::new(data, labels)
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Least-squares fit summary.
#[derive(Debug, Clone, PartialEq)]
pub struct LsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Centred R²; zero when the dependent variable has no variation.
    pub r_squared: f64,
    /// `rss / (n - k)`, zero for an exactly identified system.
    pub sigma2: f64,
}

impl LsFit {
    pub fn nobs(&self) -> usize {
        self.residuals.len()
    }

    pub fn ncoef(&self) -> usize {
        self.coefficients.len()
    }
}

/// Householder QR of a tall matrix, reusable across right-hand sides.
pub(crate) struct QrSolver {
    qr: nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<f64>,
}

impl QrSolver {
    /// Factorize `x`, rejecting rank-deficient designs. `labels` name the
    /// columns for error reporting.
    pub(crate) fn new(x: &DMatrix<f64>, labels: &[String]) -> Result<Self> {
        let (n, k) = x.shape();
        if n < k {
            return Err(Error::InsufficientObservations {
                needed: k,
                available: n,
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        let qr = x.clone().qr();
        let r = qr.r();
        for j in 0..k {
            let norm = x.column(j).norm();
            if norm == 0.0 || r[(j, j)].abs() <= 1e-10 * norm {
                let label = labels.get(j).cloned().unwrap_or_else(|| format!("x{j}"));
                return Err(Error::RankDeficient(label));
            }
        }
        Ok(Self { qr, r })
    }

    pub(crate) fn solve(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut qty = y.clone();
        self.qr.q_tr_mul(&mut qty);
        let k = self.r.ncols();
        let top = qty.rows(0, k).into_owned();
        self.r.solve_upper_triangular(&top).expect("diagonal checked non-zero")
    }
}

/// Ordinary least squares via orthogonal decomposition.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<LsFit> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations for {} design rows",
            y.len(),
            x.nrows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dependent variable"));
    }
    let solver = QrSolver::new(x.data(), x.labels())?;
    let yv = DMatrix::from_column_slice(y.len(), 1, y);
    let beta = solver.solve(&yv);
    Ok(summarize(x.data(), y, beta.column(0).iter().copied().collect()))
}

pub(crate) fn summarize(x: &DMatrix<f64>, y: &[f64], coefficients: Vec<f64>) -> LsFit {
    let (n, k) = x.shape();
    let beta = DVector::from_column_slice(&coefficients);
    let fitted = x * beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let mean = y.iter().sum::<f64>() / n.max(1) as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let sigma2 = if n > k { rss / (n - k) as f64 } else { 0.0 };
    LsFit {
        coefficients,
        residuals,
        rss,
        r_squared,
        sigma2,
    }
}

/// Bayes information criterion without additive constants:
/// `n ln(rss / n) + k ln n`.
pub fn bic(rss: f64, n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("BIC needs n > 0".into()));
    }
    if rss.is_nan() || rss <= 0.0 {
        return Err(Error::DegenerateFit);
    }
    let n = n as f64;
    Ok(n * (rss / n).ln() + k as f64 * n.ln())
}
