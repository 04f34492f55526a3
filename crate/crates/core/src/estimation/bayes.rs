use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::ols::QrSolver;

/// Posterior-mean coefficients of a multivariate regression `Y = XB + E`
/// under the conjugate prior encoded by dummy observations `(dummy_y, dummy_x)`:
/// least squares on the stacked system `[Y; Yd] = [X; Xd] B`.
///
/// Returns the k × m coefficient matrix (one column per equation).
pub fn dummy_obs_bayes_fit(
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    dummy_y: &DMatrix<f64>,
    dummy_x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (n, k) = x.shape();
    let m = y.ncols();
    if y.nrows() != n {
        return Err(Error::DimensionMismatch(format!("Y has {} rows, X has {n}", y.nrows())));
    }
    if dummy_y.nrows() != dummy_x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "dummy blocks have {} and {} rows",
            dummy_y.nrows(),
            dummy_x.nrows()
        )));
    }
    let d = dummy_x.nrows();
    if d > 0 && (dummy_x.ncols() != k || dummy_y.ncols() != m) {
        return Err(Error::DimensionMismatch(
            "dummy blocks do not match the regression dimensions".into(),
        ));
    }
    let stacked_x = DMatrix::from_fn(n + d, k, |i, j| if i < n { x[(i, j)] } else { dummy_x[(i - n, j)] });
    let stacked_y = DMatrix::from_fn(n + d, m, |i, j| if i < n { y[(i, j)] } else { dummy_y[(i - n, j)] });
    let labels: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
    let solver = QrSolver::new(&stacked_x, &labels)?;
    Ok(solver.solve(&stacked_y))
}
