use crate::error::Result;
use crate::models::{fit_ardl, ArdlInputs, ArdlSpec};
use crate::timeseries::QuarterRange;

use super::harness::OosData;

#[derive(Debug, Clone, PartialEq)]
pub struct InSampleRow {
    pub rank: usize,
    pub label: String,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InSampleRanking {
    pub horizon: usize,
    pub sample: QuarterRange,
    /// Descending R², ties by label.
    pub rows: Vec<InSampleRow>,
    /// Predictors without a full-sample fit, with the reason.
    pub excluded: Vec<(String, String)>,
}

/// One fixed-lag ARDL per predictor and horizon over `sample`, ranked by
/// R². Predictors whose lags do not cover the whole sample are excluded.
pub fn rank_insample(
    data: &OosData,
    horizons: &[usize],
    sample: QuarterRange,
    p: usize,
    q: usize,
) -> Result<Vec<InSampleRanking>> {
    let mut out = Vec::new();
    for &h in horizons {
        let target = data.cumulative(h)?;
        let mut rows = Vec::new();
        let mut excluded = Vec::new();
        for entry in data.predictors().entries() {
            let inputs = ArdlInputs {
                target: &target,
                own: data.yoy(),
                predictor: Some(&entry.series),
            };
            let spec = ArdlSpec::new(h, p, q, Some(entry.label.clone()))?;
            match fit_ardl(&spec, &inputs, sample) {
                Ok(fit) if fit.sample == sample => rows.push(InSampleRow {
                    rank: 0,
                    label: entry.label.clone(),
                    r_squared: fit.r_squared(),
                }),
                Ok(fit) => excluded.push((
                    entry.label.clone(),
                    format!("data cover only {}..{}", fit.sample.start, fit.sample.end),
                )),
                Err(e) => excluded.push((entry.label.clone(), e.to_string())),
            }
        }
        rows.sort_by(|a, b| b.r_squared.total_cmp(&a.r_squared).then_with(|| a.label.cmp(&b.label)));
        for (i, row) in rows.iter_mut().enumerate() {
            row.rank = i + 1;
        }
        out.push(InSampleRanking {
            horizon: h,
            sample,
            rows,
            excluded,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{Dataset, Quarter, Series, TransformCode};

    fn q(s: &str) -> Quarter {
        s.parse().unwrap()
    }

    #[test]
    fn perfect_predictor_and_duplicates() {
        let range = QuarterRange::new(q("1960Q1"), q("2000Q4")).unwrap();
        let gdp = Series::from_fn(range, |t| {
            let k = t.index() as f64;
            Some((0.01 * k + 0.03 * (k * 0.9).sin() + 0.02 * (k * 0.37).cos()).exp())
        })
        .unwrap();
        let base = OosData::new(&gdp, Dataset::new(), vec![]).unwrap();
        let h = 4;
        let cum = base.cumulative(h).unwrap();
        // x(t) = y^h(t + h): the regressor slot sees the target itself
        let oracle = Series::from_fn(range, |t| cum.get(t + h as i64))
            .unwrap()
            .trimmed()
            .unwrap();
        let noise = Series::from_fn(range, |t| Some((t.index() as f64 * 1.3).sin())).unwrap();
        let mut panel = Dataset::new();
        panel.push("oracle", oracle, TransformCode::Level, "test").unwrap();
        panel
            .push("noise", noise.clone(), TransformCode::Level, "test")
            .unwrap();
        panel.push("noise_copy", noise, TransformCode::Level, "test").unwrap();
        panel
            .push(
                "late",
                Series::from_fn(QuarterRange::new(q("1990Q1"), q("2000Q4")).unwrap(), |_| Some(1.0)).unwrap(),
                TransformCode::Level,
                "test",
            )
            .unwrap();
        let data = OosData::new(&gdp, panel, vec![]).unwrap();
        let sample = QuarterRange::new(q("1975Q1"), q("1999Q4")).unwrap();
        let ranking = &rank_insample(&data, &[h], sample, 2, 2).unwrap()[0];
        assert_eq!(ranking.rows[0].label, "oracle");
        assert!((ranking.rows[0].r_squared - 1.0).abs() < 1e-10);
        assert_eq!(ranking.rows[1].r_squared, ranking.rows[2].r_squared);
        assert_eq!(ranking.rows[1].label, "noise");
        assert_eq!(ranking.excluded.len(), 1);
        assert_eq!(ranking.excluded[0].0, "late");
    }
}
