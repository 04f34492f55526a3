//! Quarterly calendar, series transformations and panel bookkeeping.

mod dataset;
mod quarter;
mod series;
mod transform;

pub use dataset::{Dataset, Entry};
pub use quarter::{parse_quarter, Quarter, QuarterRange};
pub use series::Series;
pub use transform::{apply_transform, capr, cumulative_log_growth, ratio, splice_backward, TransformCode};
