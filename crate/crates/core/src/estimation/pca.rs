use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

use super::DesignMatrix;

/// Principal components of a standardized panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    /// n × k component scores.
    pub factors: DMatrix<f64>,
    /// p × k eigenvectors of the sample correlation matrix.
    pub loadings: DMatrix<f64>,
    /// Eigenvalues, descending.
    pub explained_variance: Vec<f64>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Sum of all p eigenvalues (equals p up to rounding).
    pub total_variance: f64,
}

impl Pca {
    pub fn explained_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect()
    }

    /// Scores for new rows, standardized with the fitted moments.
    pub fn project(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns, expected {}",
                rows.ncols(),
                self.means.len()
            )));
        }
        let z = DMatrix::from_fn(rows.nrows(), rows.ncols(), |i, j| {
            (rows[(i, j)] - self.means[j]) / self.scales[j]
        });
        Ok(z * &self.loadings)
    }
}

fn argmax_abs(v: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, 0.0_f64);
    for (i, x) in v.enumerate() {
        if x.abs() > best.1.abs() {
            best = (i, x);
        }
    }
    best
}

/// First `k` principal components of `x` after standardizing each column to
/// mean zero and unit sample variance. Components are ordered by descending
/// eigenvalue (ties by the position of their dominant loading); each loading
/// vector's largest-magnitude entry is made positive.
pub fn pca(x: &DesignMatrix, k: usize) -> Result<Pca> {
    let (n, p) = (x.nrows(), x.ncols());
    if k == 0 || k > n.min(p) {
        return Err(Error::InvalidParameter(format!(
            "component count {k} outside 1..={}",
            n.min(p)
        )));
    }
    if n < 2 {
        return Err(Error::InsufficientObservations {
            needed: 2,
            available: n,
        });
    }
    let nf = n as f64;
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for (j, c) in x.data().column_iter().enumerate() {
        let m = c.iter().sum::<f64>() / nf;
        let s = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
        if s <= 1e-13 * m.abs().max(1.0) {
            return Err(Error::ConstantColumn(x.labels()[j].clone()));
        }
        means.push(m);
        scales.push(s);
    }
    let z = DMatrix::from_fn(n, p, |i, j| (x.data()[(i, j)] - means[j]) / scales[j]);
    let corr = (z.transpose() * &z) / (nf - 1.0);
    let eig = SymmetricEigen::new(corr);

    let mut order: Vec<(f64, usize, usize)> = (0..p)
        .map(|c| {
            let (pos, _) = argmax_abs(eig.eigenvectors.column(c).iter().copied());
            (eig.eigenvalues[c], pos, c)
        })
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    // near-equal eigenvalues: order by dominant loading position
    let tol = 1e-10 * order.first().map_or(1.0, |o| o.0.abs().max(1.0));
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && (order[i].0 - order[j].0).abs() <= tol {
            j += 1;
        }
        order[i..j].sort_by_key(|o| o.1);
        i = j;
    }

    let total_variance: f64 = eig.eigenvalues.iter().sum();
    let mut loadings = DMatrix::zeros(p, k);
    let mut explained_variance = Vec::with_capacity(k);
    for (out, &(value, _, c)) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(c);
        let (_, dominant) = argmax_abs(v.iter().copied());
        let sign = if dominant < 0.0 { -1.0 } else { 1.0 };
        loadings.set_column(out, &(v * sign));
        explained_variance.push(value.max(0.0));
    }
    let factors = &z * &loadings;
    Ok(Pca {
        factors,
        loadings,
        explained_variance,
        means,
        scales,
        total_variance,
    })
}
