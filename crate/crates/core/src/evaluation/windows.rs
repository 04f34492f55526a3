use crate::error::{Error, Result};
use crate::timeseries::{Quarter, QuarterRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// Expanding sample with a fixed start.
    Recursive,
    /// Fixed number of quarters ending at each window end.
    Rolling(usize),
}

/// Estimation windows ending at every quarter of `first_end ..= last_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowScheme {
    pub kind: WindowKind,
    pub first_end: Quarter,
    pub last_end: Quarter,
    pub data_start: Quarter,
}

impl WindowScheme {
    pub fn new(kind: WindowKind, data_start: Quarter, first_end: Quarter, last_end: Quarter) -> Result<Self> {
        if last_end < first_end {
            return Err(Error::InvalidParameter(format!(
                "window ends {first_end}..{last_end} are empty"
            )));
        }
        if first_end < data_start {
            return Err(Error::InvalidParameter(format!(
                "first window end {first_end} precedes data start {data_start}"
            )));
        }
        if let WindowKind::Rolling(len) = kind {
            if len == 0 {
                return Err(Error::InvalidParameter("rolling window length must be >= 1".into()));
            }
            let start = first_end - (len as i64 - 1);
            if start < data_start {
                return Err(Error::InvalidParameter(format!(
                    "rolling window of {len} quarters ending {first_end} starts before {data_start}"
                )));
            }
        }
        Ok(Self {
            kind,
            first_end,
            last_end,
            data_start,
        })
    }

    pub fn recursive(data_start: Quarter, first_end: Quarter, last_end: Quarter) -> Result<Self> {
        Self::new(WindowKind::Recursive, data_start, first_end, last_end)
    }

    pub fn contains_end(&self, end: Quarter) -> bool {
        (self.first_end..=self.last_end).contains(&end)
    }

    /// Sample of the window ending at `end`, or `None` outside the scheme.
    pub fn window_ending(&self, end: Quarter) -> Option<QuarterRange> {
        if !self.contains_end(end) {
            return None;
        }
        let start = match self.kind {
            WindowKind::Recursive => self.data_start,
            WindowKind::Rolling(len) => end - (len as i64 - 1),
        };
        Some(QuarterRange { start, end })
    }

    pub fn windows(&self) -> Vec<QuarterRange> {
        QuarterRange {
            start: self.first_end,
            end: self.last_end,
        }
        .iter()
        .map(|end| self.window_ending(end).expect("end inside scheme"))
        .collect()
    }
}
