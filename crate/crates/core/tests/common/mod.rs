//! Independent reference implementations used by the integration suites.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use cyclecast_core::timeseries::{Quarter, Series};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn q(s: &str) -> Quarter {
    s.parse().unwrap()
}

pub fn series(start: &str, values: &[f64]) -> Series {
    Series::from_values(q(start), values).unwrap()
}

/// AR(2) path after a burn-in.
pub fn ar2(rng: &mut ChaCha8Rng, n: usize, phi: (f64, f64)) -> Vec<f64> {
    let burn = 200;
    let e = normals(rng, n + burn);
    let mut y = vec![0.0; n + burn];
    for t in 2..n + burn {
        y[t] = phi.0 * y[t - 1] + phi.1 * y[t - 2] + e[t];
    }
    y.split_off(burn)
}

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite input")
}

/// Least squares solved exactly: normal equations in rational arithmetic,
/// Gauss–Jordan elimination, then rounded to f64.
pub fn rational_ols(x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let (n, k) = x.shape();
    let xr: Vec<Vec<BigRational>> = (0..n).map(|i| (0..k).map(|j| rational(x[(i, j)])).collect()).collect();
    let yr: Vec<BigRational> = y.iter().map(|v| rational(*v)).collect();
    let zero = BigRational::from_integer(BigInt::from(0));
    let mut a: Vec<Vec<BigRational>> = vec![vec![zero.clone(); k + 1]; k];
    for r in 0..k {
        for c in 0..k {
            let mut acc = zero.clone();
            for row in &xr {
                acc += &row[r] * &row[c];
            }
            a[r][c] = acc;
        }
        let mut acc = zero.clone();
        for (row, yi) in xr.iter().zip(&yr) {
            acc += &row[r] * yi;
        }
        a[r][k] = acc;
    }
    for col in 0..k {
        let pivot = (col..k).find(|&r| a[r][col] != zero).expect("full rank");
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for c in col..=k {
            a[col][c] = &a[col][c] / &p;
        }
        for r in 0..k {
            if r != col && a[r][col] != zero {
                let f = a[r][col].clone();
                for c in col..=k {
                    let delta = &f * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    a.iter().map(|row| to_f64(&row[k])).collect()
}

fn to_f64(r: &BigRational) -> f64 {
    // scale to keep 60 significant bits before the integer division
    let num = r.numer();
    let den = r.denom();
    let shift = num.bits() as i64 - den.bits() as i64 - 60;
    let (n, d) = if shift > 0 {
        (num.clone(), den.clone() << shift as usize)
    } else {
        (num.clone() << (-shift) as usize, den.clone())
    };
    let q: BigInt = n / d;
    let mant: f64 = q.to_string().parse().unwrap();
    mant * 2f64.powi(shift as i32)
}

/// Cyclic Jacobi eigenvalue iteration for symmetric matrices.
/// Returns eigenvalues (descending) and matching unit eigenvectors.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                if a[(p, r)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * a[(p, r)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akr = a[(k, r)];
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let ark = a[(r, k)];
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkr = v[(k, r)];
                    v[(k, p)] = c * vkp - s * vkr;
                    v[(k, r)] = s * vkp + c * vkr;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Sample correlation matrix of the columns of `x`.
pub fn correlation_matrix(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let mut z = x.clone();
    for j in 0..p {
        let m = z.column(j).sum() / n as f64;
        let s = (z.column(j).iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        for i in 0..n {
            z[(i, j)] = (z[(i, j)] - m) / s;
        }
    }
    z.transpose() * &z / (n - 1) as f64
}

/// `(X'X + Xd'Xd)^{-1} (X'Y + Xd'Yd)` through a plain linear solve.
pub fn ridge_closed_form(y: &DMatrix<f64>, x: &DMatrix<f64>, yd: &DMatrix<f64>, xd: &DMatrix<f64>) -> DMatrix<f64> {
    let lhs = x.transpose() * x + xd.transpose() * xd;
    let rhs = x.transpose() * y + xd.transpose() * yd;
    lhs.lu().solve(&rhs).expect("non-singular")
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1e-12))
        .fold(0.0, f64::max)
}

pub mod oracles {
    //! Randomized estimator checks shared by the oracle and acceptance
    //! suites. Each returns the worst discrepancy found.

    use super::*;
    use cyclecast_core::estimation::{dummy_obs_bayes_fit, lasso_fit, ols_fit, pca, DesignMatrix};

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
        DMatrix::from_vec(n, k, normals(rng, n * k))
    }

    fn dims(rng: &mut ChaCha8Rng) -> (usize, usize) {
        let k = rng.random_range(1..=5);
        let n = rng.random_range(k + 2..=30);
        (n, k)
    }

    /// OLS against exact rational normal equations; relative error.
    pub fn ols_vs_rational(seed: u64) -> f64 {
        let mut rng = rng(seed);
        let (n, k) = dims(&mut rng);
        let mut x = random_matrix(&mut rng, n, k);
        x.column_mut(0).fill(1.0);
        let y = normals(&mut rng, n);
        let fit = ols_fit(&DesignMatrix::unlabeled(x.clone()).unwrap(), &y).unwrap();
        let exact = rational_ols(&x, &y);
        fit.coefficients
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// Worst KKT violation on the standardized scale.
    pub fn lasso_kkt(seed: u64) -> f64 {
        let mut rng = rng(seed);
        let (n, k) = dims(&mut rng);
        let x = random_matrix(&mut rng, n, k);
        let y = normals(&mut rng, n);
        let lambda = rng.random_range(0.01..0.5);
        let fit = lasso_fit(&DesignMatrix::unlabeled(x.clone()).unwrap(), &y, lambda).unwrap();
        let nf = n as f64;
        let resid: Vec<f64> = (0..n)
            .map(|i| {
                let row: Vec<f64> = x.row(i).iter().copied().collect();
                y[i] - fit.predict_row(&row)
            })
            .collect();
        let mut worst: f64 = resid.iter().sum::<f64>().abs() / nf;
        for j in 0..k {
            let col = x.column(j);
            let m = col.sum() / nf;
            let s = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / nf).sqrt();
            let grad = col.iter().zip(&resid).map(|(v, r)| (v - m) / s * r).sum::<f64>() / nf;
            let gamma = fit.coefficients[j] * s;
            let violation = if gamma == 0.0 {
                (grad.abs() - lambda).max(0.0)
            } else {
                (grad - lambda * gamma.signum()).abs()
            };
            worst = worst.max(violation);
        }
        worst
    }

    /// LASSO on centred orthonormal columns against soft-thresholding.
    pub fn lasso_orthonormal(seed: u64) -> f64 {
        let mut rng = rng(seed);
        let (n, k) = dims(&mut rng);
        let mut raw = random_matrix(&mut rng, n, k + 1);
        raw.column_mut(0).fill(1.0);
        let qmat = raw.qr().q();
        let nf = n as f64;
        let x = DMatrix::from_fn(n, k, |i, j| qmat[(i, j + 1)] * nf.sqrt());
        let y = normals(&mut rng, n);
        let lambda = rng.random_range(0.0..0.4);
        let fit = lasso_fit(&DesignMatrix::unlabeled(x.clone()).unwrap(), &y, lambda).unwrap();
        let ybar = y.iter().sum::<f64>() / nf;
        (0..k)
            .map(|j| {
                let z = x.column(j).iter().zip(&y).map(|(a, b)| a * (b - ybar)).sum::<f64>() / nf;
                let expected = z.signum() * (z.abs() - lambda).max(0.0);
                (fit.coefficients[j] - expected).abs()
            })
            .fold(0.0, f64::max)
    }

    /// PCA loadings and eigenvalues against a Jacobi eigensolver, up to sign.
    pub fn pca_vs_jacobi(seed: u64) -> f64 {
        let mut rng = rng(seed);
        let p = rng.random_range(2..=5);
        let n = rng.random_range(p + 3..=30);
        let x = random_matrix(&mut rng, n, p);
        let fit = pca(&DesignMatrix::unlabeled(x.clone()).unwrap(), p).unwrap();
        let (values, vectors) = jacobi_eigen(&correlation_matrix(&x));
        let mut worst: f64 = 0.0;
        for c in 0..p {
            worst = worst.max((fit.explained_variance[c] - values[c]).abs());
            let dot: f64 = (0..p).map(|r| fit.loadings[(r, c)] * vectors[(r, c)]).sum();
            let sign = dot.signum();
            for r in 0..p {
                worst = worst.max((fit.loadings[(r, c)] - sign * vectors[(r, c)]).abs());
            }
        }
        worst
    }

    /// Stacked dummy-observation regression against the ridge closed form.
    pub fn bayes_vs_ridge(seed: u64) -> f64 {
        let mut rng = rng(seed);
        let (n, k) = dims(&mut rng);
        let m = rng.random_range(1..=3);
        let d = rng.random_range(1..=6);
        let x = random_matrix(&mut rng, n, k);
        let y = random_matrix(&mut rng, n, m);
        let xd = random_matrix(&mut rng, d, k);
        let yd = random_matrix(&mut rng, d, m);
        let b = dummy_obs_bayes_fit(&y, &x, &yd, &xd).unwrap();
        let r = ridge_closed_form(&y, &x, &yd, &xd);
        (b - &r).abs().max() / r.abs().max().max(1.0)
    }
}
