//! CSV emission and the record-log round trip. Floats use Rust's shortest
//! round-trip formatting so a re-read log reproduces every statistic.

use std::fs;
use std::path::{Path, PathBuf};

use cyclecast_core::evaluation::{ForecastKind, ForecastRecord};
use cyclecast_core::timeseries::parse_quarter;

use crate::error::{CliError, CliResult};

pub const RECORD_HEADER: [&str; 8] = [
    "model",
    "predictor",
    "kind",
    "origin",
    "horizon",
    "forecast",
    "realized",
    "error",
];

pub const NA: &str = "NA";

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| NA.to_string(), |v| v.to_string())
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Write a header and rows; returns the path for the command summary.
pub fn write_table<I>(path: &Path, header: &[&str], rows: I) -> CliResult<PathBuf>
where
    I: IntoIterator<Item = Vec<String>>,
{
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(header).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<PathBuf> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub fn write_records(path: &Path, records: &[ForecastRecord]) -> CliResult<PathBuf> {
    write_table(
        path,
        &RECORD_HEADER,
        records.iter().map(|r| {
            vec![
                r.model.clone(),
                r.predictor.clone(),
                r.kind.tag().to_string(),
                r.origin.to_string(),
                r.horizon.to_string(),
                r.forecast.to_string(),
                r.realized.to_string(),
                r.error.to_string(),
            ]
        }),
    )
}

/// Read a record log written by [`write_records`]. Information criteria
/// are not logged, so `bic` comes back empty.
pub fn read_records(path: &Path) -> CliResult<Vec<ForecastRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header = reader.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(CliError::Data(format!(
            "{}: expected header {}",
            path.display(),
            RECORD_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        let line = i + 2;
        let bad = |col: &str| {
            CliError::Data(format!(
                "{} line {line}: bad {col} '{}'",
                path.display(),
                field(&rec, col)
            ))
        };
        let number = |col: &str| field(&rec, col).parse::<f64>().map_err(|_| bad(col));
        let kind = match field(&rec, "kind") {
            "direct" => ForecastKind::Direct,
            "iterated" => ForecastKind::Iterated,
            _ => return Err(bad("kind")),
        };
        out.push(ForecastRecord {
            model: field(&rec, "model").to_string(),
            predictor: field(&rec, "predictor").to_string(),
            origin: parse_quarter(field(&rec, "origin")).map_err(|_| bad("origin"))?,
            horizon: field(&rec, "horizon").parse().map_err(|_| bad("horizon"))?,
            kind,
            forecast: number("forecast")?,
            realized: number("realized")?,
            error: number("error")?,
            bic: None,
        });
    }
    Ok(out)
}

fn field<'a>(rec: &'a csv::StringRecord, col: &str) -> &'a str {
    let i = RECORD_HEADER.iter().position(|c| *c == col).expect("known column");
    rec.get(i).unwrap_or("")
}
