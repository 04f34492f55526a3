//! Command-line front end: ingestion, configuration and report emission
//! around the `cyclecast-core` engine.

pub mod chart;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

pub use config::{load_config, Overrides, RunConfig};
pub use error::{CliError, CliResult};
