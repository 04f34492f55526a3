//! Run configuration: a TOML document whose defaults reproduce the
//! published protocol, plus command-line overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cyclecast_core::evaluation::{WindowKind, WindowScheme};
use cyclecast_core::timeseries::{parse_quarter, Quarter, QuarterRange};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DataSection {
    inputs: Vec<PathBuf>,
    transforms: Option<PathBuf>,
    target: String,
    external: Option<PathBuf>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            transforms: None,
            target: "GDPC1".into(),
            external: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CalendarSection {
    data_start: String,
    first_end: String,
    last_end: String,
    eval_start: String,
    eval_end: String,
    insample_start: String,
    insample_end: String,
    hd_cutoff: String,
}

impl Default for CalendarSection {
    fn default() -> Self {
        Self {
            data_start: "1968Q2".into(),
            first_end: "1985Q1".into(),
            last_end: "2016Q4".into(),
            eval_start: "1990Q1".into(),
            eval_end: "2017Q4".into(),
            insample_start: "1974Q1".into(),
            insample_end: "2017Q4".into(),
            hd_cutoff: "1967Q1".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ModelSection {
    horizons: Vec<usize>,
    window: String,
    max_lag: usize,
    insample_lags: usize,
    lbvar_lambda: Vec<f64>,
    /// `tau = multiple * lambda`
    lbvar_tau_multiples: Vec<f64>,
    lasso_lambda: Vec<f64>,
    factors: Vec<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            horizons: vec![4, 12, 20],
            window: "recursive".into(),
            max_lag: 5,
            insample_lags: 5,
            lbvar_lambda: vec![1e-4, 5e-4, 1e-3, 5e-3, 0.01, 0.05, 0.1],
            lbvar_tau_multiples: vec![10.0, 100.0],
            lasso_lambda: vec![0.00025, 0.0005, 0.00075, 0.001, 0.00125, 0.0015],
            factors: (1..=10).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EncFSection {
    /// Critical value per horizon, keyed by the horizon as a string.
    thresholds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    seed: u64,
    data: DataSection,
    calendar: CalendarSection,
    models: ModelSection,
    enc_f: EncFSection,
}

/// Command-line flags that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub horizons: Option<Vec<usize>>,
    pub window: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Fully resolved settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Raw panels, merged column-wise.
    pub inputs: Vec<PathBuf>,
    pub transforms: Option<PathBuf>,
    /// Raw (level) GDP column.
    pub target: String,
    /// Annual forecasts `(vintage_year, target_year, annual_rate)`.
    pub external: Option<PathBuf>,
    pub scheme: WindowScheme,
    pub eval: QuarterRange,
    pub insample: QuarterRange,
    /// High-dimensional models only use predictors observed from here on.
    pub hd_cutoff: Quarter,
    pub horizons: Vec<usize>,
    pub max_lag: usize,
    pub insample_lags: usize,
    pub lbvar_grid: Vec<(f64, f64)>,
    pub lasso_grid: Vec<f64>,
    pub factor_grid: Vec<usize>,
    pub enc_f_thresholds: BTreeMap<usize, f64>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        resolve(FileConfig::default(), None, &Overrides::default()).expect("defaults are valid")
    }
}

fn quarter(key: &str, text: &str) -> CliResult<Quarter> {
    parse_quarter(text).map_err(|e| CliError::Config(format!("{key}: {e}")))
}

fn range(key: &str, start: Quarter, end: Quarter) -> CliResult<QuarterRange> {
    QuarterRange::new(start, end).map_err(|e| CliError::Config(format!("{key}: {e}")))
}

/// Parse `recursive` or `rolling:N`.
pub fn parse_window(text: &str) -> CliResult<WindowKind> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("recursive") {
        return Ok(WindowKind::Recursive);
    }
    text.strip_prefix("rolling:")
        .and_then(|n| n.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .map(WindowKind::Rolling)
        .ok_or_else(|| CliError::Config(format!("window '{text}': expected recursive or rolling:N")))
}

/// Parse a comma-separated list of positive horizons.
pub fn parse_horizons(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|h| {
            h.trim()
                .parse::<usize>()
                .ok()
                .filter(|h| *h > 0)
                .ok_or_else(|| CliError::Config(format!("horizon '{}' is not a positive integer", h.trim())))
        })
        .collect()
}

fn resolve(file: FileConfig, base: Option<&Path>, over: &Overrides) -> CliResult<RunConfig> {
    let rebase = |p: PathBuf| match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    };
    let cal = &file.calendar;
    let data_start = quarter("calendar.data_start", &cal.data_start)?;
    let first_end = quarter("calendar.first_end", &cal.first_end)?;
    let last_end = quarter("calendar.last_end", &cal.last_end)?;
    let window = parse_window(over.window.as_deref().unwrap_or(&file.models.window))?;
    let scheme = WindowScheme::new(window, data_start, first_end, last_end)
        .map_err(|e| CliError::Config(format!("window scheme: {e}")))?;
    let eval = range(
        "calendar.eval",
        quarter("calendar.eval_start", &cal.eval_start)?,
        quarter("calendar.eval_end", &cal.eval_end)?,
    )?;
    let insample = range(
        "calendar.insample",
        quarter("calendar.insample_start", &cal.insample_start)?,
        quarter("calendar.insample_end", &cal.insample_end)?,
    )?;

    let mut horizons = over.horizons.clone().unwrap_or_else(|| file.models.horizons.clone());
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(CliError::Config(
            "horizons must be a non-empty list of positive integers".into(),
        ));
    }
    horizons.sort_unstable();
    horizons.dedup();

    let m = file.models;
    if !(1..=cyclecast_core::models::MAX_LAG).contains(&m.max_lag)
        || !(1..=cyclecast_core::models::MAX_LAG).contains(&m.insample_lags)
    {
        return Err(CliError::Config(format!(
            "lags must lie in 1..={}",
            cyclecast_core::models::MAX_LAG
        )));
    }
    let positive = |xs: &[f64]| xs.iter().all(|x| x.is_finite() && *x > 0.0);
    if !positive(&m.lbvar_lambda) || !positive(&m.lbvar_tau_multiples) || !positive(&m.lasso_lambda) {
        return Err(CliError::Config(
            "shrinkage grids must hold positive finite values".into(),
        ));
    }
    let lbvar_grid = m
        .lbvar_lambda
        .iter()
        .flat_map(|&l| m.lbvar_tau_multiples.iter().map(move |&t| (l, t * l)))
        .collect();
    if m.factors
        .iter()
        .any(|k| *k == 0 || *k > cyclecast_core::models::MAX_FACTORS)
    {
        return Err(CliError::Config(format!(
            "factor counts must lie in 1..={}",
            cyclecast_core::models::MAX_FACTORS
        )));
    }

    let enc_f_thresholds = file
        .enc_f
        .thresholds
        .iter()
        .map(|(h, v)| {
            h.parse::<usize>()
                .map(|h| (h, *v))
                .map_err(|_| CliError::Config(format!("enc_f.thresholds: key '{h}' is not a horizon")))
        })
        .collect::<CliResult<_>>()?;

    Ok(RunConfig {
        inputs: file.data.inputs.into_iter().map(rebase).collect(),
        transforms: file.data.transforms.map(rebase),
        target: file.data.target,
        external: file.data.external.map(rebase),
        scheme,
        eval,
        insample,
        hd_cutoff: quarter("calendar.hd_cutoff", &cal.hd_cutoff)?,
        horizons,
        max_lag: m.max_lag,
        insample_lags: m.insample_lags,
        lbvar_grid,
        lasso_grid: m.lasso_lambda,
        factor_grid: m.factors,
        enc_f_thresholds,
        out: over.out.clone().unwrap_or_else(|| PathBuf::from("cyclecast-out")),
        seed: over.seed.unwrap_or(file.seed),
    })
}

/// Parse a TOML document. Relative paths inside it are taken relative to
/// `base`.
pub fn parse_config(text: &str, base: Option<&Path>, over: &Overrides) -> CliResult<RunConfig> {
    let file: FileConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    resolve(file, base, over)
}

/// Load `path` (or the defaults when absent) and apply `over`.
pub fn load_config(path: Option<&Path>, over: &Overrides) -> CliResult<RunConfig> {
    match path {
        None => resolve(FileConfig::default(), None, over),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_config(&text, p.parent(), over)
        }
    }
}
