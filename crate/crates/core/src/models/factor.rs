use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::{pca, DesignMatrix, Pca};
use crate::timeseries::{Quarter, QuarterRange, Series};

use super::sample::effective_sample;
use super::var::{fit_var, iterate_var_forecast, var_terms, FittedVar, VarEstimator, VarSpec};

pub const MAX_FACTORS: usize = 10;

/// VAR in GDP growth and principal components of a predictor panel.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFactorVar {
    pub var: FittedVar,
    /// Factor scores on `[sample.start - p, sample.end]`.
    pub factors: Vec<Series>,
    pub pca: Pca,
}

impl FittedFactorVar {
    pub fn nfactors(&self) -> usize {
        self.factors.len()
    }
}

/// Extract `k` components from `panel` over the rows the VAR needs, then
/// fit a least-squares VAR(p) of `(gdp_growth, f_1, ..., f_k)`.
pub fn fit_factor_var(
    gdp_growth: &Series,
    panel: &[&Series],
    k: usize,
    p: usize,
    sample: QuarterRange,
) -> Result<FittedFactorVar> {
    if !(1..=MAX_FACTORS).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "factor count {k} outside 1..={MAX_FACTORS}"
        )));
    }
    if panel.is_empty() {
        return Err(Error::EmptyInput("predictor panel"));
    }
    let mut all = vec![gdp_growth];
    all.extend_from_slice(panel);
    let used = effective_sample(sample, &var_terms(&all, p))?;
    let rows = QuarterRange::new(used.start - p as i64, used.end)?;

    let mut data = DMatrix::zeros(rows.len(), panel.len());
    for (j, s) in panel.iter().enumerate() {
        let label = format!("predictor{j}");
        for (i, t) in rows.iter().enumerate() {
            data[(i, j)] = s.require(t, &label)?;
        }
    }
    let labels = (0..panel.len()).map(|j| format!("predictor{j}")).collect();
    let fit = pca(&DesignMatrix::new(data, labels)?, k)?;

    let factors: Vec<Series> = (0..k)
        .map(|c| {
            let col: Vec<f64> = fit.factors.column(c).iter().copied().collect();
            Series::from_values(rows.start, &col)
        })
        .collect::<Result<_>>()?;
    let mut names = vec!["gdp".to_string()];
    names.extend((1..=k).map(|c| format!("factor{c}")));
    let spec = VarSpec::new(names, p, VarEstimator::Ols)?;
    let mut vars = vec![gdp_growth];
    vars.extend(factors.iter());
    let var = fit_var(&spec, &vars, used)?;
    Ok(FittedFactorVar { var, factors, pca: fit })
}

/// Iterated GDP-growth path for `origin + 1 ..= origin + steps`. The origin
/// must lie inside the span the factors were extracted on.
pub fn forecast_factor_var(
    model: &FittedFactorVar,
    gdp_growth: &Series,
    origin: Quarter,
    steps: usize,
) -> Result<Vec<f64>> {
    let mut vars = vec![gdp_growth];
    vars.extend(model.factors.iter());
    let path = iterate_var_forecast(&model.var, &vars, origin, steps)?;
    Ok(path.column(0).iter().copied().collect())
}
