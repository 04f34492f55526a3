use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// A calendar quarter. Ordering is lexicographic on `(year, quarter)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    year: i32,
    quarter: u8,
}

impl Quarter {
    pub fn new(year: i32, quarter: u8) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(Error::InvalidQuarter(format!("{year}Q{quarter}")));
        }
        Ok(Self { year, quarter })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn quarter(self) -> u8 {
        self.quarter
    }

    /// Quarters elapsed since year 0 Q1; a linear index on the calendar.
    pub fn index(self) -> i64 {
        self.year as i64 * 4 + (self.quarter as i64 - 1)
    }

    pub fn from_index(index: i64) -> Self {
        Self {
            year: index.div_euclid(4) as i32,
            quarter: (index.rem_euclid(4) + 1) as u8,
        }
    }

    pub fn offset(self, k: i64) -> Self {
        Self::from_index(self.index() + k)
    }

    pub fn succ(self) -> Self {
        self.offset(1)
    }

    pub fn pred(self) -> Self {
        self.offset(-1)
    }

    /// Map a calendar month (1..12) of `year` to its quarter.
    pub fn from_month(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::MalformedQuarter(format!("{year}-{month:02}")));
        }
        Self::new(year, ((month - 1) / 3 + 1) as u8)
    }
}

impl Add<i64> for Quarter {
    type Output = Quarter;

    fn add(self, k: i64) -> Quarter {
        self.offset(k)
    }
}

impl Sub<i64> for Quarter {
    type Output = Quarter;

    fn sub(self, k: i64) -> Quarter {
        self.offset(-k)
    }
}

/// Signed number of quarters from `other` to `self`.
impl Sub<Quarter> for Quarter {
    type Output = i64;

    fn sub(self, other: Quarter) -> i64 {
        self.index() - other.index()
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_quarter(s)
    }
}

/// Parse `YYYYQd`, e.g. `1968Q2`.
pub fn parse_quarter(text: &str) -> Result<Quarter> {
    let text = text.trim();
    let malformed = || Error::MalformedQuarter(text.to_string());
    let (year, digit) = text.split_once(['Q', 'q']).ok_or_else(malformed)?;
    if year.len() != 4 || digit.len() != 1 || !year.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let year: i32 = year.parse().map_err(|_| malformed())?;
    let digit: u8 = digit.parse().map_err(|_| malformed())?;
    if !(1..=4).contains(&digit) {
        return Err(Error::InvalidQuarter(text.to_string()));
    }
    Quarter::new(year, digit)
}

/// Inclusive range of quarters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuarterRange {
    pub start: Quarter,
    pub end: Quarter,
}

impl QuarterRange {
    pub fn new(start: Quarter, end: Quarter) -> Result<Self> {
        if end < start {
            return Err(Error::InvalidParameter(format!("empty quarter range {start}..{end}")));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, q: Quarter) -> bool {
        self.start <= q && q <= self.end
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Quarter> + ExactSizeIterator {
        let start = self.start;
        (0..self.len() as u32).map(move |k| start + k as i64)
    }
}

impl fmt::Display for QuarterRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}
