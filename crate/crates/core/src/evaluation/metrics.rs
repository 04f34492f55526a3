use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::timeseries::{Quarter, QuarterRange};

use super::records::{ForecastKind, ForecastRecord};

pub fn msfe(records: &[ForecastRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput("forecast records"));
    }
    Ok(records.iter().map(|r| r.error * r.error).sum::<f64>() / records.len() as f64)
}

pub fn rmsfe(records: &[ForecastRecord]) -> Result<f64> {
    msfe(records).map(f64::sqrt)
}

fn keys(records: &[ForecastRecord]) -> Result<BTreeSet<(Quarter, usize)>> {
    let mut out = BTreeSet::new();
    for r in records {
        if !out.insert(r.key()) {
            return Err(Error::Misaligned(format!(
                "duplicate record for origin {} h={}",
                r.origin, r.horizon
            )));
        }
    }
    Ok(out)
}

/// MSFE of `records` over the benchmark's MSFE. Both sets must cover
/// exactly the same (origin, horizon) pairs.
pub fn relative_msfe(records: &[ForecastRecord], benchmark: &[ForecastRecord]) -> Result<f64> {
    let (a, b) = (keys(records)?, keys(benchmark)?);
    if a != b {
        let only_model = a.difference(&b).count();
        let only_bench = b.difference(&a).count();
        return Err(Error::Misaligned(format!(
            "{only_model} targets only in the model set, {only_bench} only in the benchmark set"
        )));
    }
    let base = msfe(benchmark)?;
    if base == 0.0 {
        return Err(Error::NonFinite("relative MSFE against a zero benchmark MSFE"));
    }
    Ok(msfe(records)? / base)
}

/// Benchmark records restricted to the (origin, horizon) pairs of `subset`;
/// every pair must be present.
pub fn restrict_to(benchmark: &[ForecastRecord], subset: &[ForecastRecord]) -> Result<Vec<ForecastRecord>> {
    let index: BTreeMap<(Quarter, usize), &ForecastRecord> = benchmark.iter().map(|r| (r.key(), r)).collect();
    subset
        .iter()
        .map(|r| {
            index.get(&r.key()).map(|b| (*b).clone()).ok_or_else(|| {
                Error::Misaligned(format!(
                    "benchmark has no forecast for origin {} h={}",
                    r.origin, r.horizon
                ))
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub predictor: String,
    pub kind: ForecastKind,
    pub count: usize,
    pub msfe: f64,
    pub rmsfe: f64,
    /// `None` for models without the full set of targets.
    pub relative: Option<f64>,
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonReport {
    pub horizon: usize,
    pub benchmark: String,
    /// Ranked rows first (by relative MSFE, ties by model id), then the
    /// non-comparable ones by model id.
    pub rows: Vec<ReportRow>,
}

impl HorizonReport {
    pub fn ranked(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.rank.is_some())
    }

    pub fn non_comparable(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.rank.is_none())
    }

    pub fn row(&self, model: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.model == model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub eval: QuarterRange,
    /// Targets per model and horizon required for ranking.
    pub expected: usize,
    pub horizons: Vec<HorizonReport>,
}

impl EvaluationReport {
    pub fn horizon(&self, h: usize) -> Option<&HorizonReport> {
        self.horizons.iter().find(|r| r.horizon == h)
    }
}

/// MSFE table per horizon with ranks by MSFE relative to `benchmark`.
/// Models lacking any target in `eval` are reported but not ranked.
pub fn evaluate(
    records: &[ForecastRecord],
    benchmark: &str,
    horizons: &[usize],
    eval: QuarterRange,
) -> Result<EvaluationReport> {
    let expected = eval.len();
    let mut horizon_reports = Vec::new();
    for &h in horizons {
        let mut by_model: BTreeMap<&str, Vec<ForecastRecord>> = BTreeMap::new();
        for r in records.iter().filter(|r| r.horizon == h && eval.contains(r.target())) {
            by_model.entry(r.model.as_str()).or_default().push(r.clone());
        }
        let bench = by_model
            .get(benchmark)
            .ok_or_else(|| Error::Misaligned(format!("benchmark {benchmark} has no records at h={h}")))?;
        if bench.len() != expected {
            return Err(Error::Misaligned(format!(
                "benchmark {benchmark} has {} of {expected} targets at h={h}",
                bench.len()
            )));
        }
        let mut rows = Vec::new();
        for (model, recs) in &by_model {
            let comparable = recs.len() == expected;
            let relative = if comparable {
                Some(relative_msfe(recs, bench)?)
            } else {
                None
            };
            rows.push(ReportRow {
                model: model.to_string(),
                predictor: recs[0].predictor.clone(),
                kind: recs[0].kind,
                count: recs.len(),
                msfe: msfe(recs)?,
                rmsfe: rmsfe(recs)?,
                relative,
                rank: None,
            });
        }
        rows.sort_by(|a, b| match (a.relative, b.relative) {
            (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| a.model.cmp(&b.model)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.model.cmp(&b.model),
        });
        for (i, row) in rows.iter_mut().enumerate() {
            if row.relative.is_some() {
                row.rank = Some(i + 1);
            }
        }
        horizon_reports.push(HorizonReport {
            horizon: h,
            benchmark: benchmark.to_string(),
            rows,
        });
    }
    Ok(EvaluationReport {
        eval,
        expected,
        horizons: horizon_reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rec(model: &str, origin: &str, h: usize, error: f64) -> ForecastRecord {
        ForecastRecord {
            model: model.into(),
            predictor: String::new(),
            origin: origin.parse().unwrap(),
            horizon: h,
            kind: ForecastKind::Direct,
            forecast: 0.0,
            realized: error,
            error,
            bic: None,
        }
    }

    fn set(model: &str, errors: &[f64]) -> Vec<ForecastRecord> {
        let start: Quarter = "2000Q1".parse().unwrap();
        errors
            .iter()
            .enumerate()
            .map(|(i, e)| rec(model, &(start + i as i64).to_string(), 4, *e))
            .collect()
    }

    #[test]
    fn msfe_examples() {
        let r = set("m", &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(msfe(&r).unwrap(), 1.0);
        assert_eq!(rmsfe(&r).unwrap(), 1.0);
        assert_eq!(relative_msfe(&r, &r).unwrap(), 1.0);
        assert_eq!(relative_msfe(&set("z", &[0.0; 4]), &r).unwrap(), 0.0);
        assert!(msfe(&[]).is_err());
    }

    #[test]
    fn misaligned_sets_are_rejected() {
        let a = set("a", &[1.0, 2.0, 3.0]);
        let b = set("b", &[1.0, 2.0]);
        assert!(matches!(relative_msfe(&a, &b), Err(Error::Misaligned(_))));
    }

    #[test]
    fn ranking_and_non_comparable() {
        let mut records = set("bench", &[1.0, 1.0, 1.0, 1.0]);
        records.extend(set("good", &[0.5, 0.5, 0.5, 0.5]));
        records.extend(set("short", &[0.0, 0.0, 0.0]));
        let eval = QuarterRange::new("2001Q1".parse().unwrap(), "2001Q4".parse().unwrap()).unwrap();
        let report = evaluate(&records, "bench", &[4], eval).unwrap();
        let h = report.horizon(4).unwrap();
        assert_eq!(h.rows[0].model, "good");
        assert_eq!(h.rows[0].rank, Some(1));
        assert_eq!(h.rows[0].relative, Some(0.25));
        assert_eq!(h.row("bench").unwrap().relative, Some(1.0));
        assert_eq!(h.non_comparable().next().unwrap().model, "short");
    }
}
