//! Raw panel CSVs and the transform spec that turns them into a predictor
//! dataset.
//!
//! A raw panel has a date column first and one column per series. Rows whose
//! date cell reads `factors` or `transform` carry metadata (the FRED-QD
//! layout); the `transform` row assigns default codes. The transform spec is
//! a CSV with columns `label,code,expr,splice,group`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use cyclecast_core::timeseries::{
    apply_transform, capr, parse_quarter, ratio, splice_backward, Dataset, Quarter, QuarterRange, Series, TransformCode,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};

/// Rent window of the cyclically-adjusted price-to-rent ratio (10 years).
pub const CAPR_WINDOW: usize = 40;

/// Group marking helper rows of the transform spec; they feed expressions
/// but are not predictors.
pub const AUX_GROUP: &str = "aux";

/// Parse `YYYYQd`, `YYYY-MM-DD` or `M/D/YYYY` into the containing quarter.
pub fn parse_date(text: &str) -> Option<Quarter> {
    let text = text.trim();
    if let Ok(q) = parse_quarter(text) {
        return Some(q);
    }
    let (year, month) = if let Some((y, rest)) = text.split_once('-') {
        let (m, d) = rest.split_once('-')?;
        if y.len() != 4 || d.len() != 2 {
            return None;
        }
        (y, m)
    } else {
        let mut parts = text.split('/');
        let (m, d, y) = (parts.next()?, parts.next()?, parts.next()?);
        if parts.next().is_some() || d.is_empty() || d.len() > 2 || y.len() != 4 {
            return None;
        }
        (y, m)
    };
    let year: i32 = year.parse().ok()?;
    let month: u32 = month.parse().ok()?;
    Quarter::from_month(year, month).ok()
}

/// Map a spec or FRED-QD code onto a transform. Numeric codes follow the
/// FRED-QD convention with year-on-year instead of quarter-on-quarter
/// changes; second differences (3, 6, 7) reduce to the first difference.
pub fn parse_code(text: &str) -> Option<TransformCode> {
    let text = text.trim();
    let numeric = text.parse::<f64>().ok().filter(|v| v.fract() == 0.0);
    match numeric.map(|v| v as i64) {
        Some(1) => Some(TransformCode::Level),
        Some(2) | Some(3) => Some(TransformCode::YoyDiff),
        Some(4) => Some(TransformCode::Log),
        Some(5) | Some(6) | Some(7) => Some(TransformCode::YoyLogDiff),
        Some(_) => None,
        None => text.parse().ok(),
    }
}

fn parse_cell(text: &str) -> Result<Option<f64>, ()> {
    let text = text.trim();
    if text.is_empty() || text == "." || text.eq_ignore_ascii_case("na") || text.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(()),
    }
}

/// Untransformed columns in file order.
#[derive(Debug, Clone, Default)]
pub struct RawPanel {
    columns: Vec<(String, Series)>,
    index: HashMap<String, usize>,
    /// Codes from a `transform` metadata row.
    codes: HashMap<String, TransformCode>,
    /// Columns without a single observation.
    pub empty: Vec<String>,
}

impl RawPanel {
    pub fn get(&self, label: &str) -> Option<&Series> {
        self.index.get(label).map(|&i| &self.columns[i].1)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(l, _)| l.as_str())
    }

    pub fn code(&self, label: &str) -> Option<TransformCode> {
        self.codes.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Append the columns of `other`; labels must not repeat.
    pub fn merge(&mut self, other: RawPanel) -> CliResult<()> {
        for (label, series) in other.columns {
            if self.index.contains_key(&label) {
                return Err(CliError::Data(format!("duplicate column '{label}' across input files")));
            }
            if let Some(code) = other.codes.get(&label) {
                self.codes.insert(label.clone(), *code);
            }
            self.index.insert(label.clone(), self.columns.len());
            self.columns.push((label, series));
        }
        self.empty.extend(other.empty);
        Ok(())
    }
}

/// Read one raw panel.
pub fn read_panel(path: &Path) -> CliResult<RawPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::csv(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::csv(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.len() < 2 {
        return Err(CliError::Data(format!(
            "{}: expected a date column and at least one series",
            path.display()
        )));
    }
    let labels = &headers[1..];
    let mut seen = HashSet::new();
    for label in labels {
        if label.is_empty() {
            return Err(CliError::Data(format!("{}: empty column header", path.display())));
        }
        if !seen.insert(label.as_str()) {
            return Err(CliError::Data(format!(
                "{}: duplicate column '{label}'",
                path.display()
            )));
        }
    }

    let mut codes = HashMap::new();
    let mut rows: BTreeMap<Quarter, Vec<Option<f64>>> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        let line = i + 2;
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let at = |col: &str| format!("{} line {line}, column '{col}'", path.display());
        if record.len() != headers.len() {
            return Err(CliError::Data(format!(
                "{} line {line}: {} fields, header has {}",
                path.display(),
                record.len(),
                headers.len()
            )));
        }
        let date = record[0].trim();
        if date.eq_ignore_ascii_case("factors") {
            continue;
        }
        if date.eq_ignore_ascii_case("transform") {
            for (label, cell) in labels.iter().zip(record.iter().skip(1)) {
                if cell.trim().is_empty() {
                    continue;
                }
                let code = parse_code(cell).ok_or_else(|| {
                    CliError::Data(format!("{}: unknown transform code '{}'", at(label), cell.trim()))
                })?;
                codes.insert(label.clone(), code);
            }
            continue;
        }
        let quarter = parse_date(date)
            .ok_or_else(|| CliError::Data(format!("{}: unparseable date '{date}'", at(&headers[0]))))?;
        let values = labels
            .iter()
            .zip(record.iter().skip(1))
            .map(|(label, cell)| {
                parse_cell(cell).map_err(|_| CliError::Data(format!("{}: not a number: '{}'", at(label), cell.trim())))
            })
            .collect::<CliResult<Vec<_>>>()?;
        if rows.insert(quarter, values).is_some() {
            return Err(CliError::Data(format!(
                "{} line {line}: second row for {quarter}",
                path.display()
            )));
        }
    }

    let mut panel = RawPanel::default();
    let (Some(first), Some(last)) = (rows.keys().next().copied(), rows.keys().last().copied()) else {
        return Err(CliError::Data(format!("{}: no dated rows", path.display())));
    };
    let span = QuarterRange::new(first, last).context(|| path.display().to_string())?;
    for (j, label) in labels.iter().enumerate() {
        let values: Vec<Option<f64>> = span.iter().map(|q| rows.get(&q).and_then(|r| r[j])).collect();
        let series = Series::new(first, values).context(|| format!("{} column '{label}'", path.display()))?;
        match series.trimmed() {
            Some(s) => {
                panel.index.insert(label.clone(), panel.columns.len());
                panel.columns.push((label.clone(), s));
            }
            None => panel.empty.push(label.clone()),
        }
    }
    panel.codes = codes.into_iter().filter(|(l, _)| panel.index.contains_key(l)).collect();
    Ok(panel)
}

/// Right-hand side of a transform-spec row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Column(String),
    Ratio(String, String),
    Capr { price: String, rent: String },
}

impl Expr {
    fn operands(&self) -> Vec<&str> {
        match self {
            Expr::Column(a) => vec![a],
            Expr::Ratio(a, b) => vec![a, b],
            Expr::Capr { price, rent } => vec![price, rent],
        }
    }
}

/// Parse `A`, `A/B` or `capr(A,B)`.
pub fn parse_expr(text: &str) -> Option<Expr> {
    let text = text.trim();
    let name = |s: &str| {
        let s = s.trim();
        (!s.is_empty() && !s.contains(['/', '(', ')', ','])).then(|| s.to_string())
    };
    if let Some(inner) = text
        .strip_prefix("capr(")
        .or_else(|| text.strip_prefix("CAPR("))
        .and_then(|r| r.strip_suffix(')'))
    {
        let (price, rent) = inner.split_once(',')?;
        return Some(Expr::Capr {
            price: name(price)?,
            rent: name(rent)?,
        });
    }
    if let Some((a, b)) = text.split_once('/') {
        return Some(Expr::Ratio(name(a)?, name(b)?));
    }
    name(text).map(Expr::Column)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformRow {
    pub label: String,
    pub code: TransformCode,
    pub expr: Expr,
    /// Series whose growth extends the source backwards.
    pub splice: Option<String>,
    pub group: String,
    /// Line in the spec file, for messages.
    pub line: usize,
}

impl TransformRow {
    pub fn is_aux(&self) -> bool {
        self.group.eq_ignore_ascii_case(AUX_GROUP)
    }
}

#[derive(Debug, serde::Deserialize)]
struct SpecRecord {
    label: String,
    code: String,
    #[serde(default)]
    expr: String,
    #[serde(default)]
    splice: String,
    #[serde(default)]
    group: String,
}

pub fn read_transform_spec(path: &Path) -> CliResult<Vec<TransformRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::csv(path, e))?;
    let mut rows = Vec::new();
    let mut labels = HashSet::new();
    for (i, rec) in reader.deserialize::<SpecRecord>().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        let at = format!("{} line {line}", path.display());
        if rec.label.is_empty() {
            return Err(CliError::Data(format!("{at}: empty label")));
        }
        if !labels.insert(rec.label.clone()) {
            return Err(CliError::Data(format!("{at}: duplicate label '{}'", rec.label)));
        }
        let code = parse_code(&rec.code)
            .ok_or_else(|| CliError::Data(format!("{at}: unknown transform code '{}'", rec.code)))?;
        let expr_text = if rec.expr.is_empty() { &rec.label } else { &rec.expr };
        let expr = parse_expr(expr_text)
            .ok_or_else(|| CliError::Data(format!("{at}: cannot parse expression '{expr_text}'")))?;
        rows.push(TransformRow {
            label: rec.label,
            code,
            expr,
            splice: (!rec.splice.is_empty()).then_some(rec.splice),
            group: if rec.group.is_empty() {
                "added".into()
            } else {
                rec.group
            },
            line,
        });
    }
    Ok(rows)
}

/// Target series and predictor panel ready for the engine.
#[derive(Debug, Clone)]
pub struct Ingested {
    /// Untransformed GDP level.
    pub target_label: String,
    pub target: Series,
    pub predictors: Dataset,
    /// Aux rows, built but kept out of the predictor panel.
    pub helpers: Dataset,
    /// Raw columns that neither carry a code nor appear in the spec.
    pub unused: Vec<String>,
    pub empty: Vec<String>,
}

/// Build the predictor panel. Spec rows come first, in spec order; raw
/// columns with a code from a `transform` row follow, in file order, unless
/// a spec row reuses their label. The target never enters the panel.
pub fn build_dataset(raw: &RawPanel, spec: &[TransformRow], target: &str) -> CliResult<Ingested> {
    let target_series = raw
        .get(target)
        .ok_or_else(|| CliError::Config(format!("target column '{target}' not found in the inputs")))?
        .clone();
    target_series
        .check_contiguous(target)
        .context(|| format!("target '{target}'"))?;

    let mut predictors = Dataset::new();
    let mut helpers = Dataset::new();
    // raw columns take precedence as operands, then earlier spec rows
    let mut built: HashMap<&str, Series> = HashMap::new();
    for row in spec {
        let at = || format!("transform spec line {} ('{}')", row.line, row.label);
        let lookup = |name: &str| -> CliResult<Series> {
            raw.get(name)
                .or_else(|| built.get(name))
                .cloned()
                .ok_or_else(|| CliError::Data(format!("{}: unknown series '{name}'", at())))
        };
        let operands = row
            .expr
            .operands()
            .into_iter()
            .map(lookup)
            .collect::<CliResult<Vec<_>>>()?;
        let mut source = match &row.expr {
            Expr::Column(_) => operands[0].clone(),
            Expr::Ratio(..) => ratio(&operands[0], &operands[1]).context(at)?,
            Expr::Capr { .. } => capr(&operands[0], &operands[1], CAPR_WINDOW).context(at)?,
        };
        source = source
            .trimmed()
            .ok_or_else(|| CliError::Data(format!("{}: no observations", at())))?;
        if let Some(proxy) = &row.splice {
            source = splice_backward(&source, &lookup(proxy)?).context(at)?;
        }
        let series = apply_transform(&source, row.code, &row.label)
            .context(at)?
            .trimmed()
            .ok_or_else(|| CliError::Data(format!("{}: no observations after transform", at())))?;
        if row.label != target {
            let panel = if row.is_aux() { &mut helpers } else { &mut predictors };
            panel
                .push(row.label.clone(), series.clone(), row.code, row.group.clone())
                .context(at)?;
        }
        built.insert(row.label.as_str(), series);
    }

    let mut unused = Vec::new();
    for label in raw.labels() {
        if label == target || built.contains_key(label) {
            continue;
        }
        let Some(code) = raw.code(label) else {
            unused.push(label.to_string());
            continue;
        };
        let at = || format!("input column '{label}'");
        let series = raw.get(label).expect("listed column");
        let Some(series) = apply_transform(series, code, label).context(at)?.trimmed() else {
            unused.push(label.to_string());
            continue;
        };
        predictors.push(label, series, code, "raw").context(at)?;
    }
    Ok(Ingested {
        target_label: target.to_string(),
        target: target_series,
        predictors,
        helpers,
        unused,
        empty: raw.empty.clone(),
    })
}

/// Read every configured input and build the panel.
pub fn ingest(cfg: &RunConfig) -> CliResult<Ingested> {
    if cfg.inputs.is_empty() {
        return Err(CliError::Config("data.inputs lists no files".into()));
    }
    let mut raw = RawPanel::default();
    for path in &cfg.inputs {
        raw.merge(read_panel(path)?)?;
    }
    let spec = match &cfg.transforms {
        Some(path) => read_transform_spec(path)?,
        None => Vec::new(),
    };
    build_dataset(&raw, &spec, &cfg.target)
}
