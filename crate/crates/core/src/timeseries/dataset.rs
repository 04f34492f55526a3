use std::collections::HashMap;

use crate::error::{Error, Result};

use super::{Quarter, QuarterRange, Series, TransformCode};

/// One labelled, already-transformed series.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub label: String,
    pub series: Series,
    pub code: TransformCode,
    pub group: String,
}

impl Entry {
    pub fn first_valid(&self) -> Option<Quarter> {
        self.series.first_valid()
    }
}

/// Labelled quarterly panel. Entries keep insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    entries: Vec<Entry>,
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert an entry. Interior gaps and duplicate labels are rejected.
    pub fn insert(&mut self, entry: Entry) -> Result<()> {
        if self.index.contains_key(&entry.label) {
            return Err(Error::DuplicateLabel(entry.label));
        }
        entry.series.check_contiguous(&entry.label)?;
        self.index.insert(entry.label.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn push(
        &mut self,
        label: impl Into<String>,
        series: Series,
        code: TransformCode,
        group: impl Into<String>,
    ) -> Result<()> {
        self.insert(Entry {
            label: label.into(),
            series,
            code,
            group: group.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn get(&self, label: &str) -> Option<&Entry> {
        self.index.get(label).map(|&i| &self.entries[i])
    }

    pub fn series(&self, label: &str) -> Result<&Series> {
        self.get(label)
            .map(|e| &e.series)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Common calendar spanning every entry's addressable range.
    pub fn span(&self) -> Option<QuarterRange> {
        let start = self.entries.iter().map(|e| e.series.start()).min()?;
        let end = self.entries.iter().map(|e| e.series.end()).max()?;
        Some(QuarterRange { start, end })
    }

    /// Fraction of entries with a present value at `q`.
    pub fn coverage(&self, q: Quarter) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        let present = self.entries.iter().filter(|e| e.series.get(q).is_some()).count();
        present as f64 / self.entries.len() as f64
    }

    /// Earliest quarter from which coverage stays at or above `threshold`
    /// through the end of the panel.
    pub fn coverage_start(&self, threshold: f64) -> Result<Quarter> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "coverage threshold {threshold} outside (0, 1]"
            )));
        }
        let span = self.span().ok_or(Error::EmptyInput("dataset"))?;
        let mut result = None;
        let mut q = span.end;
        loop {
            if self.coverage(q) + 1e-12 < threshold {
                break;
            }
            result = Some(q);
            if q == span.start {
                break;
            }
            q = q.pred();
        }
        result.ok_or(Error::NoCoverage(threshold))
    }

    /// Entries whose first present value is at or before `cutoff`.
    pub fn filter_by_start(&self, cutoff: Quarter) -> Dataset {
        self.filter(|e| e.first_valid().is_some_and(|q| q <= cutoff))
    }

    pub fn filter(&self, mut keep: impl FnMut(&Entry) -> bool) -> Dataset {
        let mut out = Dataset::new();
        for e in self.entries.iter().filter(|e| keep(e)) {
            out.index.insert(e.label.clone(), out.entries.len());
            out.entries.push(e.clone());
        }
        out
    }

    pub fn without(&self, label: &str) -> Dataset {
        self.filter(|e| e.label != label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Quarter {
        s.parse().unwrap()
    }

    fn panel(late: &[(usize, i64)], n: usize, len: usize) -> Dataset {
        let mut d = Dataset::new();
        for i in 0..n {
            let delay = late.iter().find(|(j, _)| *j == i).map_or(0, |x| x.1);
            let values: Vec<Option<f64>> = (0..len as i64).map(|t| (t >= delay).then_some(1.0)).collect();
            d.push(
                format!("s{i}"),
                Series::new(q("1960Q1"), values).unwrap(),
                TransformCode::Level,
                "g",
            )
            .unwrap();
        }
        d
    }

    #[test]
    fn balanced_panel_covers_from_start() {
        assert_eq!(panel(&[], 10, 40).coverage_start(0.95).unwrap(), q("1960Q1"));
    }

    #[test]
    fn one_late_series_shifts_start() {
        let d = panel(&[(3, 8)], 10, 40);
        assert_eq!(d.coverage_start(0.95).unwrap(), q("1962Q1"));
        assert_eq!(d.coverage_start(0.9).unwrap(), q("1960Q1"));
    }

    #[test]
    fn full_threshold_gives_latest_start() {
        let d = panel(&[(1, 3), (4, 11), (7, 6)], 8, 40);
        assert_eq!(d.coverage_start(1.0).unwrap(), q("1960Q1") + 11);
    }

    #[test]
    fn coverage_errors() {
        let d = panel(&[], 2, 4);
        assert!(matches!(d.coverage_start(0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(Dataset::new().coverage_start(0.5), Err(Error::EmptyInput(_))));
        let mut e = Dataset::new();
        e.push(
            "a",
            Series::new(q("2000Q1"), vec![Some(1.0), None]).unwrap(),
            TransformCode::Level,
            "",
        )
        .unwrap();
        assert_eq!(e.coverage_start(1.0), Err(Error::NoCoverage(1.0)));
    }

    #[test]
    fn filter_by_start_cases() {
        let d = panel(&[(2, 5)], 4, 20);
        assert_eq!(d.filter_by_start(q("1970Q1")), d);
        assert!(d.filter_by_start(q("1959Q4")).is_empty());
        let f = d.filter_by_start(q("1960Q2"));
        assert_eq!(f.labels().collect::<Vec<_>>(), ["s0", "s1", "s3"]);
    }

    #[test]
    fn duplicate_and_gap_rejected() {
        let mut d = panel(&[], 1, 4);
        let s = Series::from_values(q("1960Q1"), &[1.0]).unwrap();
        assert_eq!(
            d.push("s0", s, TransformCode::Level, ""),
            Err(Error::DuplicateLabel("s0".into()))
        );
        let gap = Series::new(q("1960Q1"), vec![Some(1.0), None, Some(1.0)]).unwrap();
        assert!(matches!(
            d.push("g", gap, TransformCode::Level, ""),
            Err(Error::InteriorGap { .. })
        ));
    }

    proptest! {
        #[test]
        fn coverage_start_monotone(delays in prop::collection::vec(0i64..20, 1..12), t1 in 0.05f64..1.0, t2 in 0.05f64..1.0) {
            let late: Vec<(usize, i64)> = delays.iter().copied().enumerate().collect();
            let d = panel(&late, delays.len(), 30);
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(d.coverage_start(hi).unwrap() >= d.coverage_start(lo).unwrap());
        }
    }
}
