//! Recursive (or rolling) pseudo-out-of-sample forecasting.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{
    cumulate_path, fit_ardl, fit_factor_var, fit_lasso_var, fit_lbvar, fit_var_selected, forecast_direct,
    forecast_factor_var, iterate_var_forecast, select_lags_ardl, ArdlInputs, ArdlSpec, FittedVar, MAX_LAG,
};
use crate::timeseries::{apply_transform, Dataset, Quarter, QuarterRange, Series, TransformCode};

use super::records::{sort_records, ForecastKind, ForecastRecord};
use super::windows::WindowScheme;

pub const GDP_GROWTH: &str = "gdp_growth";

/// A forecasting model as the harness refits it in every window.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Direct AR benchmark, lag chosen by BIC.
    DirectAr,
    /// Direct ARDL with one predictor, lags chosen by sequential BIC.
    DirectArdl {
        predictor: String,
    },
    /// Iterated AR benchmark on year-on-year growth.
    IteratedAr,
    /// Bivariate VAR in GDP growth and one predictor.
    IteratedVar {
        predictor: String,
    },
    Lbvar {
        lambda: f64,
        tau: f64,
    },
    LassoVar {
        lambda: f64,
    },
    FactorVar {
        factors: usize,
    },
    /// Reports the realized value; a harness sanity check.
    PerfectForesight,
}

impl ModelSpec {
    pub fn id(&self) -> String {
        match self {
            ModelSpec::DirectAr => "ar_direct".into(),
            ModelSpec::DirectArdl { predictor } => format!("ardl:{predictor}"),
            ModelSpec::IteratedAr => "ar_iterated".into(),
            ModelSpec::IteratedVar { predictor } => format!("var:{predictor}"),
            ModelSpec::Lbvar { lambda, tau } => format!("lbvar:{lambda}:{tau}"),
            ModelSpec::LassoVar { lambda } => format!("lasso_var:{lambda}"),
            ModelSpec::FactorVar { factors } => format!("factor_var:{factors}"),
            ModelSpec::PerfectForesight => "perfect_foresight".into(),
        }
    }

    pub fn kind(&self) -> ForecastKind {
        match self {
            ModelSpec::DirectAr | ModelSpec::DirectArdl { .. } | ModelSpec::PerfectForesight => ForecastKind::Direct,
            _ => ForecastKind::Iterated,
        }
    }

    pub fn predictor(&self) -> &str {
        match self {
            ModelSpec::DirectArdl { predictor } | ModelSpec::IteratedVar { predictor } => predictor,
            _ => "",
        }
    }

    /// Single-predictor models skip windows where their predictor has too
    /// little history instead of being dropped.
    fn skips_short_windows(&self) -> bool {
        matches!(self, ModelSpec::DirectArdl { .. } | ModelSpec::IteratedVar { .. })
    }
}

/// Everything the harness reads: GDP in logs and year-on-year growth, the
/// transformed predictor panel, and the subset used by high-dimensional
/// models.
#[derive(Debug, Clone)]
pub struct OosData {
    log_gdp: Series,
    yoy: Series,
    predictors: Dataset,
    hd_labels: Vec<String>,
    max_lag: usize,
}

impl OosData {
    /// `gdp_level` is the untransformed (positive) GDP series.
    pub fn new(gdp_level: &Series, predictors: Dataset, hd_labels: Vec<String>) -> Result<Self> {
        gdp_level.check_contiguous("gdp")?;
        for label in &hd_labels {
            predictors.series(label)?;
        }
        Ok(Self {
            log_gdp: apply_transform(gdp_level, TransformCode::Log, "gdp")?,
            yoy: apply_transform(gdp_level, TransformCode::YoyLogDiff, "gdp")?,
            predictors,
            hd_labels,
            max_lag: MAX_LAG,
        })
    }

    /// Upper bound for BIC lag searches and the fixed lag of the
    /// high-dimensional VARs.
    pub fn with_max_lag(mut self, max_lag: usize) -> Result<Self> {
        if !(1..=MAX_LAG).contains(&max_lag) {
            return Err(Error::InvalidParameter(format!(
                "maximum lag {max_lag} outside 1..={MAX_LAG}"
            )));
        }
        self.max_lag = max_lag;
        Ok(self)
    }

    pub fn log_gdp(&self) -> &Series {
        &self.log_gdp
    }

    pub fn yoy(&self) -> &Series {
        &self.yoy
    }

    pub fn predictors(&self) -> &Dataset {
        &self.predictors
    }

    pub fn hd_labels(&self) -> &[String] {
        &self.hd_labels
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// `ln GDP(t) - ln GDP(t-h)`.
    pub fn cumulative(&self, h: usize) -> Result<Series> {
        if h == 0 {
            return Err(Error::InvalidParameter("growth horizon must be >= 1".into()));
        }
        let log = &self.log_gdp;
        Series::from_fn(log.range(), |t| Some(log.get(t)? - log.get(t - h as i64)?))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OosRun {
    /// Sorted by (model id, origin, horizon).
    pub records: Vec<ForecastRecord>,
    pub notices: Vec<String>,
    pub dropped: Vec<String>,
}

struct Context<'a> {
    data: &'a OosData,
    cumulative: BTreeMap<usize, Series>,
    scheme: &'a WindowScheme,
}

type CellResult = Vec<(usize, Result<ForecastRecord>)>;

/// Origins whose `h`-step target falls in `eval`.
pub fn origins_for(eval: QuarterRange, h: usize) -> QuarterRange {
    QuarterRange {
        start: eval.start - h as i64,
        end: eval.end - h as i64,
    }
}

/// Refit every model in every window and forecast each target in `eval`.
///
/// For horizon `h` the origins are `eval` shifted back by `h`, so each model
/// contributes one record per target quarter. A data shortage in one window
/// skips that forecast for single-predictor models; for other models, and
/// for any other failure, the model is dropped with a notice.
pub fn run_pseudo_oos(
    models: &[ModelSpec],
    data: &OosData,
    scheme: &WindowScheme,
    horizons: &[usize],
    eval: QuarterRange,
) -> Result<OosRun> {
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(Error::InvalidParameter("horizons must be non-empty and >= 1".into()));
    }
    let mut seen = HashSet::new();
    for m in models {
        if !seen.insert(m.id()) {
            return Err(Error::InvalidParameter(format!("duplicate model {}", m.id())));
        }
    }
    data.log_gdp.require(eval.end, "gdp")?;

    let mut horizons = horizons.to_vec();
    horizons.sort_unstable();
    horizons.dedup();
    let cumulative = horizons
        .iter()
        .map(|&h| Ok((h, data.cumulative(h)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let ctx = Context {
        data,
        cumulative,
        scheme,
    };

    let mut notices = Vec::new();
    let mut origins = BTreeSet::new();
    for &h in &horizons {
        let all = origins_for(eval, h);
        let outside = all.iter().filter(|o| !scheme.contains_end(*o)).count();
        if outside > 0 {
            notices.push(format!(
                "h={h}: {outside} origins fall outside the window ends {}..{}",
                scheme.first_end, scheme.last_end
            ));
        }
        origins.extend(all.iter().filter(|o| scheme.contains_end(*o)));
    }

    let cells: Vec<(usize, Quarter)> = (0..models.len())
        .flat_map(|m| origins.iter().map(move |&o| (m, o)))
        .collect();
    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|&(m, origin)| {
            let wanted: Vec<usize> = horizons
                .iter()
                .copied()
                .filter(|&h| origins_for(eval, h).contains(origin))
                .collect();
            run_cell(&ctx, &models[m], origin, &wanted)
        })
        .collect();

    let mut run = OosRun {
        notices,
        ..OosRun::default()
    };
    let mut per_model: Vec<Vec<ForecastRecord>> = vec![Vec::new(); models.len()];
    let mut skipped = vec![0usize; models.len()];
    let mut failure: Vec<Option<String>> = vec![None; models.len()];
    for (&(m, origin), cell) in cells.iter().zip(results) {
        if failure[m].is_some() {
            continue;
        }
        for (h, outcome) in cell {
            match outcome {
                Ok(record) => per_model[m].push(record),
                Err(e) if e.is_data_shortage() && models[m].skips_short_windows() => skipped[m] += 1,
                Err(e) => {
                    failure[m] = Some(format!("origin {origin}, h={h}: {e}"));
                    break;
                }
            }
        }
    }
    for (m, model) in models.iter().enumerate() {
        let id = model.id();
        if let Some(reason) = &failure[m] {
            run.notices.push(format!("{id} dropped ({reason})"));
            run.dropped.push(id);
            continue;
        }
        if per_model[m].is_empty() {
            run.notices.push(format!("{id} dropped (no feasible forecasts)"));
            run.dropped.push(id);
            continue;
        }
        if skipped[m] > 0 {
            run.notices
                .push(format!("{id}: {} forecasts skipped for short history", skipped[m]));
        }
        run.records.append(&mut per_model[m]);
    }
    sort_records(&mut run.records);
    Ok(run)
}

fn run_cell(ctx: &Context<'_>, model: &ModelSpec, origin: Quarter, horizons: &[usize]) -> CellResult {
    let window = ctx
        .scheme
        .window_ending(origin)
        .expect("origins filtered to the scheme");
    match model.kind() {
        ForecastKind::Direct => horizons
            .iter()
            .map(|&h| (h, direct_record(ctx, model, origin, h, window)))
            .collect(),
        ForecastKind::Iterated => match iterated_levels(ctx, model, origin, horizons, window) {
            Ok((levels, bic)) => horizons
                .iter()
                .map(|&h| {
                    let record = ctx
                        .data
                        .log_gdp
                        .require(origin + h as i64, "gdp")
                        .map(|realized| make_record(model, origin, h, levels[h - 1], realized, bic));
                    (h, record)
                })
                .collect(),
            Err(e) => horizons.iter().map(|&h| (h, Err(e.clone()))).collect(),
        },
    }
}

fn make_record(
    model: &ModelSpec,
    origin: Quarter,
    horizon: usize,
    forecast: f64,
    realized: f64,
    bic: Option<f64>,
) -> ForecastRecord {
    ForecastRecord {
        model: model.id(),
        predictor: model.predictor().to_string(),
        origin,
        horizon,
        kind: model.kind(),
        forecast,
        realized,
        error: realized - forecast,
        bic,
    }
}

fn direct_record(
    ctx: &Context<'_>,
    model: &ModelSpec,
    origin: Quarter,
    h: usize,
    window: QuarterRange,
) -> Result<ForecastRecord> {
    let target = &ctx.cumulative[&h];
    let realized = target.require(origin + h as i64, "gdp")?;
    if let ModelSpec::PerfectForesight = model {
        return Ok(make_record(model, origin, h, realized, realized, None));
    }
    let predictor = match model {
        ModelSpec::DirectArdl { predictor } => Some(ctx.data.predictors.series(predictor)?),
        _ => None,
    };
    let inputs = ArdlInputs {
        target,
        own: &ctx.data.yoy,
        predictor,
    };
    let max = ctx.data.max_lag;
    let (p, q) = select_lags_ardl(&inputs, h, max, max, window)?;
    let label = predictor.map(|_| model.predictor().to_string());
    let spec = ArdlSpec::new(h, p, q, label)?;
    let fit = fit_ardl(&spec, &inputs, window)?;
    let forecast = forecast_direct(&fit, &inputs, origin)?;
    Ok(make_record(model, origin, h, forecast, realized, Some(fit.bic)))
}

/// Log-level forecasts for `origin + 1 ..= origin + max(horizons)`.
fn iterated_levels(
    ctx: &Context<'_>,
    model: &ModelSpec,
    origin: Quarter,
    horizons: &[usize],
    window: QuarterRange,
) -> Result<(Vec<f64>, Option<f64>)> {
    let steps = *horizons.iter().max().expect("non-empty horizons");
    let data = ctx.data;
    let p = data.max_lag;
    let hd = || -> Result<(Vec<String>, Vec<&Series>)> {
        let mut labels = vec![GDP_GROWTH.to_string()];
        let mut series = vec![&data.yoy];
        for label in &data.hd_labels {
            labels.push(label.clone());
            series.push(data.predictors.series(label)?);
        }
        Ok((labels, series))
    };
    let var_path = |fit: &FittedVar, series: &[&Series]| -> Result<(Vec<f64>, Option<f64>)> {
        let path = iterate_var_forecast(fit, series, origin, steps)?;
        Ok((path.column(0).iter().copied().collect(), fit.bic))
    };
    let (growth, bic) = match model {
        ModelSpec::IteratedAr => {
            let series = [&data.yoy];
            let fit = fit_var_selected(vec![GDP_GROWTH.into()], &series, p, window)?;
            var_path(&fit, &series)?
        }
        ModelSpec::IteratedVar { predictor } => {
            let series = [&data.yoy, data.predictors.series(predictor)?];
            let labels = vec![GDP_GROWTH.into(), predictor.clone()];
            let fit = fit_var_selected(labels, &series, p, window)?;
            var_path(&fit, &series)?
        }
        ModelSpec::Lbvar { lambda, tau } => {
            let (labels, series) = hd()?;
            let fit = fit_lbvar(labels, &series, p, *lambda, *tau, window)?;
            var_path(&fit, &series)?
        }
        ModelSpec::LassoVar { lambda } => {
            let (labels, series) = hd()?;
            let fit = fit_lasso_var(labels, &series, p, *lambda, window)?;
            var_path(&fit, &series)?
        }
        ModelSpec::FactorVar { factors } => {
            let (_, series) = hd()?;
            let fit = fit_factor_var(&data.yoy, &series[1..], *factors, p, window)?;
            let path = forecast_factor_var(&fit, &data.yoy, origin, steps)?;
            (path, fit.var.bic)
        }
        ModelSpec::DirectAr | ModelSpec::DirectArdl { .. } | ModelSpec::PerfectForesight => {
            unreachable!("direct models handled separately")
        }
    };
    let history = QuarterRange::new(origin - 3, origin)?;
    let levels = data.log_gdp.window(history, "gdp")?;
    Ok((cumulate_path(&growth, &levels)?, bic))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Quarter {
        s.parse().unwrap()
    }

    fn gdp() -> Series {
        let range = QuarterRange::new(q("1960Q1"), q("2017Q4")).unwrap();
        let mut level: f64 = 100.0;
        Series::from_fn(range, |t| {
            let k = t.index() as f64;
            level *= 1.0 + 0.006 + 0.004 * (k * 0.7).sin();
            Some(level)
        })
        .unwrap()
    }

    #[test]
    fn perfect_foresight_has_zero_errors() {
        let data = OosData::new(&gdp(), Dataset::new(), vec![]).unwrap();
        let scheme = WindowScheme::recursive(q("1968Q2"), q("1985Q1"), q("2016Q4")).unwrap();
        let eval = QuarterRange::new(q("1990Q1"), q("2017Q4")).unwrap();
        let run = run_pseudo_oos(&[ModelSpec::PerfectForesight], &data, &scheme, &[4, 20], eval).unwrap();
        assert_eq!(run.records.len(), 224);
        assert!(run.records.iter().all(|r| r.error == 0.0));
    }

    #[test]
    fn origin_ranges() {
        let eval = QuarterRange::new(q("1990Q1"), q("2017Q4")).unwrap();
        assert_eq!(origins_for(eval, 20).start, q("1985Q1"));
        assert_eq!(origins_for(eval, 20).end, q("2012Q4"));
        assert_eq!(origins_for(eval, 4).start, q("1989Q1"));
        assert_eq!(origins_for(eval, 4).end, q("2016Q4"));
    }

    #[test]
    fn unknown_predictor_drops_model() {
        let data = OosData::new(&gdp(), Dataset::new(), vec![]).unwrap();
        let scheme = WindowScheme::recursive(q("1968Q2"), q("1985Q1"), q("2016Q4")).unwrap();
        let eval = QuarterRange::new(q("2015Q1"), q("2017Q4")).unwrap();
        let models = [
            ModelSpec::DirectArdl {
                predictor: "nope".into(),
            },
            ModelSpec::PerfectForesight,
        ];
        let run = run_pseudo_oos(&models, &data, &scheme, &[4], eval).unwrap();
        assert_eq!(run.dropped, vec!["ardl:nope".to_string()]);
        assert_eq!(run.records.len(), 12);
    }
}
