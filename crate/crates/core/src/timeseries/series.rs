use crate::error::{Error, Result};

use super::{Quarter, QuarterRange};

/// Quarterly observations starting at `start`. Missing values are explicit
/// `None`s and, once validated, only appear as leading or trailing runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    start: Quarter,
    values: Vec<Option<f64>>,
}

impl Series {
    pub fn new(start: Quarter, values: Vec<Option<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self { start, values })
    }

    /// Fully observed series.
    pub fn from_values(start: Quarter, values: &[f64]) -> Result<Self> {
        Self::new(start, values.iter().copied().map(Some).collect())
    }

    /// Build a series by evaluating `f` on every quarter of `range`.
    pub fn from_fn(range: QuarterRange, mut f: impl FnMut(Quarter) -> Option<f64>) -> Result<Self> {
        Self::new(range.start, range.iter().map(&mut f).collect())
    }

    pub fn start(&self) -> Quarter {
        self.start
    }

    /// Last addressable quarter.
    pub fn end(&self) -> Quarter {
        self.start + (self.values.len() as i64 - 1)
    }

    pub fn range(&self) -> QuarterRange {
        QuarterRange {
            start: self.start,
            end: self.end(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Value at `q`; `None` when missing or outside the addressable range.
    pub fn get(&self, q: Quarter) -> Option<f64> {
        let offset = q - self.start;
        if offset < 0 {
            return None;
        }
        self.values.get(offset as usize).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Quarter, Option<f64>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.start + i as i64, *v))
    }

    pub fn first_valid(&self) -> Option<Quarter> {
        self.values
            .iter()
            .position(Option::is_some)
            .map(|i| self.start + i as i64)
    }

    pub fn last_valid(&self) -> Option<Quarter> {
        self.values
            .iter()
            .rposition(Option::is_some)
            .map(|i| self.start + i as i64)
    }

    /// Range between first and last present value.
    pub fn valid_range(&self) -> Option<QuarterRange> {
        Some(QuarterRange {
            start: self.first_valid()?,
            end: self.last_valid()?,
        })
    }

    /// Fail on any missing value strictly between the first and last present ones.
    pub fn check_contiguous(&self, label: &str) -> Result<()> {
        if let Some(range) = self.valid_range() {
            if let Some(q) = range.iter().find(|q| self.get(*q).is_none()) {
                return Err(Error::InteriorGap {
                    label: label.to_string(),
                    quarter: q,
                });
            }
        }
        Ok(())
    }

    /// Value at `q` or a `MissingValue` error naming `label`.
    pub fn require(&self, q: Quarter, label: &str) -> Result<f64> {
        self.get(q).ok_or_else(|| Error::MissingValue {
            label: label.to_string(),
            quarter: q,
        })
    }

    /// Present values over `range` in order, failing on any gap.
    pub fn window(&self, range: QuarterRange, label: &str) -> Result<Vec<f64>> {
        range.iter().map(|q| self.require(q, label)).collect()
    }

    /// Elementwise map over present values; missing stays missing.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Series {
        Series {
            start: self.start,
            values: self.values.iter().map(|v| v.map(&mut f)).collect(),
        }
    }

    /// Same calendar position, values trimmed to the present-value range.
    pub fn trimmed(&self) -> Option<Series> {
        let range = self.valid_range()?;
        Series::from_fn(range, |q| self.get(q)).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Quarter {
        s.parse().unwrap()
    }

    #[test]
    fn addressing() {
        let s = Series::new(q("2000Q1"), vec![None, Some(1.0), Some(2.0), None]).unwrap();
        assert_eq!(s.end(), q("2000Q4"));
        assert_eq!(s.get(q("1999Q4")), None);
        assert_eq!(s.get(q("2000Q2")), Some(1.0));
        assert_eq!(s.get(q("2001Q1")), None);
        assert_eq!(s.first_valid(), Some(q("2000Q2")));
        assert_eq!(s.last_valid(), Some(q("2000Q3")));
        assert!(s.check_contiguous("s").is_ok());
    }

    #[test]
    fn interior_gap_detected() {
        let s = Series::new(q("2000Q1"), vec![Some(1.0), None, Some(2.0)]).unwrap();
        assert_eq!(
            s.check_contiguous("x"),
            Err(Error::InteriorGap {
                label: "x".into(),
                quarter: q("2000Q2")
            })
        );
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(Series::new(q("2000Q1"), vec![]), Err(Error::EmptySeries));
    }
}
