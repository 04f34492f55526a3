use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cyclecast::commands::{
    cmd_chart, cmd_compare_hd, cmd_forecast_oos, cmd_ingest, cmd_rank_is, cmd_simulate, Outcome,
};
use cyclecast::config::{load_config, parse_horizons, Overrides};
use cyclecast::CliResult;
use cyclecast_core::timeseries::{parse_quarter, Quarter};

const MAX_NOTES: usize = 20;

#[derive(Parser)]
#[command(name = "cyclecast", version, about = "Quarterly GDP forecasting benchmarks")]
struct Cli {
    /// TOML run configuration; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated forecast horizons in quarters, e.g. 4,12,20.
    #[arg(long, global = true)]
    horizons: Option<String>,

    /// Estimation window: recursive or rolling:N.
    #[arg(long, global = true)]
    window: Option<String>,

    /// Seed for the simulation subcommand.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and transform the inputs; write a per-series summary.
    Ingest,
    /// Rank predictors by in-sample R² of fixed-lag ARDL regressions.
    RankIs,
    /// Pseudo-out-of-sample ARDL and bivariate VAR forecasts with MSFE rankings.
    ForecastOos,
    /// High-dimensional models, forecast combinations and external forecasts.
    CompareHd,
    /// SVG chart of iterated forecast paths from one origin.
    Chart {
        /// Record log written by forecast-oos or compare-hd.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Forecast origin, YYYYQd.
        #[arg(long, value_parser = parse_origin)]
        origin: Quarter,
        /// Comma-separated model ids, e.g. var:capr,ar_iterated.
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
    },
    /// Write a synthetic panel, transform spec and config.
    Simulate,
}

fn parse_origin(text: &str) -> Result<Quarter, String> {
    parse_quarter(text).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let overrides = Overrides {
        horizons: cli.horizons.as_deref().map(parse_horizons).transpose()?,
        window: cli.window,
        out: cli.out,
        seed: cli.seed,
    };
    let cfg = load_config(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Ingest => cmd_ingest(&cfg),
        Command::RankIs => cmd_rank_is(&cfg),
        Command::ForecastOos => cmd_forecast_oos(&cfg),
        Command::CompareHd => cmd_compare_hd(&cfg),
        Command::Chart {
            records,
            origin,
            models,
        } => {
            let records = records.unwrap_or_else(|| cfg.out.join("records.csv"));
            let target = cfg.out.join(format!("chart_{origin}.svg"));
            cmd_chart(&records, origin, &models, &target)
        }
        Command::Simulate => cmd_simulate(&cfg.out, cfg.seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            for note in outcome.notes.iter().take(MAX_NOTES) {
                eprintln!("note: {note}");
            }
            if outcome.notes.len() > MAX_NOTES {
                eprintln!("note: {} more", outcome.notes.len() - MAX_NOTES);
            }
            for file in &outcome.files {
                println!("{}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
