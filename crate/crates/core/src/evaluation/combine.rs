use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::timeseries::{Quarter, QuarterRange};

use super::records::{sort_records, ForecastRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinationScheme {
    Equal,
    /// Weights proportional to `exp(-BIC/2)` of each member's fit in the
    /// window that produced the forecast.
    Bma,
}

/// `exp(-b_i/2) / Σ exp(-b_j/2)`, evaluated after subtracting the minimum.
pub fn bma_weights(bics: &[f64]) -> Result<Vec<f64>> {
    if bics.is_empty() {
        return Err(Error::EmptyInput("BIC values"));
    }
    if bics.iter().any(|b| !b.is_finite()) {
        return Err(Error::NonFinite("BIC value"));
    }
    let best = bics.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = bics.iter().map(|b| (-0.5 * (b - best)).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    pub records: Vec<ForecastRecord>,
    pub members: Vec<String>,
    /// Member weights (in `members` order) for every (origin, horizon).
    pub weights: BTreeMap<(Quarter, usize), Vec<f64>>,
}

/// Weighted average of member forecasts at every (origin, horizon) that all
/// members share; a target missing for some member is an error.
pub fn combine_forecasts(
    records: &[ForecastRecord],
    members: &[String],
    scheme: CombinationScheme,
    id: &str,
) -> Result<Combination> {
    if members.is_empty() {
        return Err(Error::EmptyInput("combination members"));
    }
    let mut table: BTreeMap<(Quarter, usize), Vec<Option<&ForecastRecord>>> = BTreeMap::new();
    for r in records {
        if let Some(slot) = members.iter().position(|m| *m == r.model) {
            let row = table.entry(r.key()).or_insert_with(|| vec![None; members.len()]);
            if row[slot].replace(r).is_some() {
                return Err(Error::Misaligned(format!(
                    "{} has two forecasts for origin {} h={}",
                    r.model, r.origin, r.horizon
                )));
            }
        }
    }
    if table.is_empty() {
        return Err(Error::EmptyInput("member forecasts"));
    }
    let mut out = Combination {
        records: Vec::with_capacity(table.len()),
        members: members.to_vec(),
        weights: BTreeMap::new(),
    };
    for (key, row) in table {
        let row: Vec<&ForecastRecord> = row
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.ok_or_else(|| {
                    Error::Misaligned(format!(
                        "{} has no forecast for origin {} h={}",
                        members[i], key.0, key.1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let weights = match scheme {
            CombinationScheme::Equal => vec![1.0 / row.len() as f64; row.len()],
            CombinationScheme::Bma => {
                let bics = row
                    .iter()
                    .map(|r| {
                        r.bic
                            .ok_or_else(|| Error::Misaligned(format!("{} forecast carries no BIC", r.model)))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                bma_weights(&bics)?
            }
        };
        let forecast: f64 = row.iter().zip(&weights).map(|(r, w)| w * r.forecast).sum();
        let first = row[0];
        out.records.push(ForecastRecord {
            model: id.to_string(),
            predictor: String::new(),
            origin: first.origin,
            horizon: first.horizon,
            kind: first.kind,
            forecast,
            realized: first.realized,
            error: first.realized - forecast,
            bic: None,
        });
        out.weights.insert(key, weights);
    }
    sort_records(&mut out.records);
    Ok(out)
}

/// Models with a record for every target in `eval` at every horizon,
/// in id order.
pub fn complete_models(records: &[ForecastRecord], horizons: &[usize], eval: QuarterRange) -> Vec<String> {
    let mut counts: BTreeMap<&str, BTreeMap<usize, usize>> = BTreeMap::new();
    for r in records.iter().filter(|r| eval.contains(r.target())) {
        *counts.entry(&r.model).or_default().entry(r.horizon).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|(_, per_h)| horizons.iter().all(|h| per_h.get(h) == Some(&eval.len())))
        .map(|(m, _)| m.to_string())
        .collect()
}
