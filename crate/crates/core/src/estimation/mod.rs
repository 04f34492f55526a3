//! Estimators shared by every model family.

mod bayes;
mod lasso;
mod ols;
mod pca;

pub use bayes::dummy_obs_bayes_fit;
pub use lasso::{lasso_fit, lasso_fit_with, LassoFit, LassoOptions, LassoProblem};
pub use ols::{bic, ols_fit, DesignMatrix, LsFit};
pub use pca::{pca, Pca};

pub(crate) use ols::QrSolver;
