//! One function per subcommand. Each reads its inputs, runs the engine and
//! writes its tables into the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cyclecast_core::evaluation::{
    combine_forecasts, complete_models, enc_f, evaluate, external_records, rank_insample, relative_msfe, restrict_to,
    run_pseudo_oos, sort_records, AnnualVintage, CombinationScheme, EvaluationReport, ForecastKind, ForecastRecord,
    ModelSpec, OosData,
};
use cyclecast_core::simulate::{simulate_panel, SyntheticConfig};
use cyclecast_core::timeseries::Quarter;

use crate::chart::render_chart;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};
use crate::ingest::{ingest, Ingested};
use crate::output::{opt, read_records, write_records, write_table, write_text, NA};

pub const DIRECT_BENCHMARK: &str = "ar_direct";
pub const ITERATED_BENCHMARK: &str = "ar_iterated";

/// Files written by a command, plus messages worth showing the user.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// Engine inputs from an ingested panel. High-dimensional models use the
/// predictors observed from `hd_cutoff` through the last window end.
pub fn oos_data(cfg: &RunConfig, ing: &Ingested) -> CliResult<OosData> {
    let last = ing.target.end();
    if last < cfg.eval.end {
        return Err(CliError::Config(format!(
            "evaluation range ends {} but '{}' ends {last}",
            cfg.eval.end, ing.target_label
        )));
    }
    for &h in &cfg.horizons {
        let (first, last) = (cfg.scheme.first_end + h as i64, cfg.scheme.last_end + h as i64);
        if first > cfg.eval.start || last < cfg.eval.end {
            return Err(CliError::Config(format!(
                "at h={h} window ends {}..{} reach targets {first}..{last}, short of the evaluation range {}",
                cfg.scheme.first_end, cfg.scheme.last_end, cfg.eval
            )));
        }
    }
    let hd = ing
        .predictors
        .entries()
        .iter()
        .filter(|e| e.series.start() <= cfg.hd_cutoff && e.series.end() >= cfg.scheme.last_end)
        .map(|e| e.label.clone())
        .collect();
    OosData::new(&ing.target, ing.predictors.clone(), hd)
        .and_then(|d| d.with_max_lag(cfg.max_lag))
        .context(|| "engine inputs".into())
}

pub fn cmd_ingest(cfg: &RunConfig) -> CliResult<Outcome> {
    let ing = ingest(cfg)?;
    let t = &ing.target;
    let mut rows = vec![vec![
        ing.target_label.clone(),
        "target".into(),
        "level".into(),
        String::new(),
        t.start().to_string(),
        t.end().to_string(),
        t.len().to_string(),
    ]];
    for (role, panel) in [("predictor", &ing.predictors), ("aux", &ing.helpers)] {
        rows.extend(panel.entries().iter().map(|e| {
            vec![
                e.label.clone(),
                role.into(),
                e.code.tag().into(),
                e.group.clone(),
                e.series.start().to_string(),
                e.series.end().to_string(),
                e.series.len().to_string(),
            ]
        }));
    }
    let path = cfg.out.join("ingest_summary.csv");
    let mut out = Outcome::default();
    out.files.push(write_table(
        &path,
        &["label", "role", "code", "group", "first", "last", "observations"],
        rows,
    )?);
    out.notes.push(format!(
        "{} predictors, {} helper series",
        ing.predictors.len(),
        ing.helpers.len()
    ));
    if !ing.unused.is_empty() {
        out.notes
            .push(format!("unused columns (no transform code): {}", ing.unused.join(", ")));
    }
    if !ing.empty.is_empty() {
        out.notes.push(format!("empty columns: {}", ing.empty.join(", ")));
    }
    Ok(out)
}

pub fn cmd_rank_is(cfg: &RunConfig) -> CliResult<Outcome> {
    let ing = ingest(cfg)?;
    let data = oos_data(cfg, &ing)?;
    let p = cfg.insample_lags;
    let rankings = rank_insample(&data, &cfg.horizons, cfg.insample, p, p).context(|| "in-sample ranking".into())?;
    let header = ["rank", "label", "r2", "horizon"];
    let row = |r: &cyclecast_core::evaluation::InSampleRow, h: usize| {
        vec![
            r.rank.to_string(),
            r.label.clone(),
            r.r_squared.to_string(),
            h.to_string(),
        ]
    };
    let mut out = Outcome::default();
    for ranking in &rankings {
        let h = ranking.horizon;
        out.files.push(write_table(
            &cfg.out.join(format!("rank_is_h{h}.csv")),
            &header,
            ranking.rows.iter().map(|r| row(r, h)),
        )?);
        if !ranking.excluded.is_empty() {
            out.notes.push(format!(
                "h={h}: {} predictors lack a full sample",
                ranking.excluded.len()
            ));
        }
    }
    out.files.push(write_table(
        &cfg.out.join("rank_is.csv"),
        &header,
        rankings
            .iter()
            .flat_map(|k| k.rows.iter().map(move |r| row(r, k.horizon))),
    )?);

    let mut top_header = vec!["rank".to_string()];
    for k in &rankings {
        top_header.push(format!("label_h{}", k.horizon));
        top_header.push(format!("r2_h{}", k.horizon));
    }
    let depth = rankings.iter().map(|k| k.rows.len().min(10)).max().unwrap_or(0);
    let top_rows = (0..depth).map(|i| {
        let mut cells = vec![(i + 1).to_string()];
        for k in &rankings {
            match k.rows.get(i) {
                Some(r) => cells.extend([r.label.clone(), r.r_squared.to_string()]),
                None => cells.extend([String::new(), String::new()]),
            }
        }
        cells
    });
    let top_header: Vec<&str> = top_header.iter().map(String::as_str).collect();
    out.files
        .push(write_table(&cfg.out.join("rank_is_top10.csv"), &top_header, top_rows)?);
    out.files.push(write_table(
        &cfg.out.join("rank_is_excluded.csv"),
        &["horizon", "label", "reason"],
        rankings.iter().flat_map(|k| {
            k.excluded
                .iter()
                .map(move |(l, why)| vec![k.horizon.to_string(), l.clone(), why.clone()])
        }),
    )?);
    Ok(out)
}

fn of_kind(records: &[ForecastRecord], kind: ForecastKind) -> Vec<ForecastRecord> {
    records.iter().filter(|r| r.kind == kind).cloned().collect()
}

fn write_ranking(path: &Path, report: &EvaluationReport, h: usize) -> CliResult<PathBuf> {
    let hr = report
        .horizon(h)
        .ok_or_else(|| CliError::Data(format!("no evaluation at h={h}")))?;
    write_table(
        path,
        &[
            "rank",
            "model",
            "predictor",
            "kind",
            "count",
            "msfe",
            "rmsfe",
            "relative",
            "comparable",
        ],
        hr.rows.iter().map(|r| {
            vec![
                opt(r.rank),
                r.model.clone(),
                r.predictor.clone(),
                r.kind.tag().into(),
                r.count.to_string(),
                r.msfe.to_string(),
                r.rmsfe.to_string(),
                opt(r.relative),
                (r.count == report.expected).to_string(),
            ]
        }),
    )
}

/// Errors of `model` and `benchmark` at horizon `h` on the evaluation
/// targets, aligned by origin; `None` unless both cover the same origins.
fn aligned_errors(
    records: &[ForecastRecord],
    model: &str,
    benchmark: &str,
    h: usize,
    cfg: &RunConfig,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let pick = |id: &str| -> BTreeMap<Quarter, f64> {
        records
            .iter()
            .filter(|r| r.model == id && r.horizon == h && cfg.eval.contains(r.target()))
            .map(|r| (r.origin, r.error))
            .collect()
    };
    let (m, b) = (pick(model), pick(benchmark));
    (!m.is_empty() && m.keys().eq(b.keys())).then(|| (b.into_values().collect(), m.into_values().collect()))
}

pub fn cmd_forecast_oos(cfg: &RunConfig) -> CliResult<Outcome> {
    let ing = ingest(cfg)?;
    let data = oos_data(cfg, &ing)?;
    let mut models = vec![ModelSpec::DirectAr, ModelSpec::IteratedAr];
    for label in data.predictors().labels() {
        models.push(ModelSpec::DirectArdl {
            predictor: label.into(),
        });
        models.push(ModelSpec::IteratedVar {
            predictor: label.into(),
        });
    }
    let run = run_pseudo_oos(&models, &data, &cfg.scheme, &cfg.horizons, cfg.eval)
        .context(|| "pseudo-out-of-sample run".into())?;

    let mut out = Outcome::default();
    out.files
        .push(write_records(&cfg.out.join("records.csv"), &run.records)?);
    let mut benchmark_rmsfe: BTreeMap<usize, [Option<f64>; 2]> = BTreeMap::new();
    let mut enc_rows = Vec::new();
    for (slot, kind, bench) in [
        (0, ForecastKind::Direct, DIRECT_BENCHMARK),
        (1, ForecastKind::Iterated, ITERATED_BENCHMARK),
    ] {
        let subset = of_kind(&run.records, kind);
        let report = evaluate(&subset, bench, &cfg.horizons, cfg.eval).context(|| format!("{kind} evaluation"))?;
        for &h in &cfg.horizons {
            out.files.push(write_ranking(
                &cfg.out.join(format!("ranking_{kind}_h{h}.csv")),
                &report,
                h,
            )?);
            let hr = report.horizon(h).expect("evaluated horizon");
            benchmark_rmsfe.entry(h).or_default()[slot] = hr.row(bench).map(|r| r.rmsfe);
            for row in hr.ranked().filter(|r| r.model != bench) {
                let Some((u1, u2)) = aligned_errors(&subset, &row.model, bench, h, cfg) else {
                    continue;
                };
                let stat = enc_f(&u1, &u2).ok();
                let threshold = cfg.enc_f_thresholds.get(&h).copied();
                let significant = match (stat, threshold) {
                    (Some(s), Some(t)) => (s > t).to_string(),
                    _ => NA.into(),
                };
                enc_rows.push(vec![
                    row.model.clone(),
                    row.predictor.clone(),
                    kind.tag().into(),
                    h.to_string(),
                    opt(stat),
                    opt(threshold),
                    significant,
                ]);
            }
        }
    }
    out.files.push(write_table(
        &cfg.out.join("benchmark_rmsfe.csv"),
        &["horizon", "direct", "iterated"],
        benchmark_rmsfe
            .iter()
            .map(|(h, [d, i])| vec![h.to_string(), opt(*d), opt(*i)]),
    )?);
    out.files.push(write_table(
        &cfg.out.join("enc_f.csv"),
        &[
            "model",
            "predictor",
            "kind",
            "horizon",
            "enc_f",
            "threshold",
            "significant",
        ],
        enc_rows,
    )?);
    out.notes.extend(run.notices.iter().cloned());
    let mut log = run.notices.join("\n");
    log.push('\n');
    out.files.push(write_text(&cfg.out.join("notices.txt"), &log)?);
    Ok(out)
}

#[derive(Debug, serde::Deserialize)]
struct ExternalRow {
    vintage_year: i32,
    target_year: i32,
    annual_rate: f64,
}

/// Read annual forecasts `(vintage_year, target_year, annual_rate)` with
/// rates in percent. Each vintage must list consecutive target years
/// starting with its own year.
pub fn read_external(path: &Path) -> CliResult<Vec<AnnualVintage>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::csv(path, e))?;
    let mut by_vintage: BTreeMap<i32, BTreeMap<i32, f64>> = BTreeMap::new();
    for (i, row) in reader.deserialize::<ExternalRow>().enumerate() {
        let row = row.map_err(|e| CliError::csv(path, e))?;
        if by_vintage
            .entry(row.vintage_year)
            .or_default()
            .insert(row.target_year, row.annual_rate / 100.0)
            .is_some()
        {
            return Err(CliError::Data(format!(
                "{} line {}: repeated target {} for vintage {}",
                path.display(),
                i + 2,
                row.target_year,
                row.vintage_year
            )));
        }
    }
    by_vintage
        .into_iter()
        .map(|(year, rates)| {
            let consecutive = rates.keys().copied().eq(year..year + rates.len() as i32);
            if !consecutive {
                return Err(CliError::Data(format!(
                    "{}: vintage {year} must cover consecutive years from {year}",
                    path.display()
                )));
            }
            Ok(AnnualVintage {
                year,
                rates: rates.into_values().collect(),
            })
        })
        .collect()
}

fn at_horizon(records: &[ForecastRecord], id: &str, h: usize, cfg: &RunConfig) -> Vec<ForecastRecord> {
    records
        .iter()
        .filter(|r| r.model == id && r.horizon == h && cfg.eval.contains(r.target()))
        .cloned()
        .collect()
}

/// Relative MSFE and the winning grid point (or member count) at one horizon.
type HdCell = (Option<f64>, String);

pub fn cmd_compare_hd(cfg: &RunConfig) -> CliResult<Outcome> {
    let ing = ingest(cfg)?;
    let data = oos_data(cfg, &ing)?;
    let mut models = vec![ModelSpec::IteratedAr];
    models.extend(
        data.predictors()
            .labels()
            .map(|l| ModelSpec::IteratedVar { predictor: l.into() }),
    );
    let families: [(&str, Vec<ModelSpec>); 3] = [
        (
            "lbvar",
            cfg.lbvar_grid
                .iter()
                .map(|&(lambda, tau)| ModelSpec::Lbvar { lambda, tau })
                .collect(),
        ),
        (
            "lasso_var",
            cfg.lasso_grid
                .iter()
                .map(|&lambda| ModelSpec::LassoVar { lambda })
                .collect(),
        ),
        (
            "factor",
            cfg.factor_grid
                .iter()
                .map(|&factors| ModelSpec::FactorVar { factors })
                .collect(),
        ),
    ];
    for (_, grid) in &families {
        models.extend(grid.iter().cloned());
    }
    let run = run_pseudo_oos(&models, &data, &cfg.scheme, &cfg.horizons, cfg.eval)
        .context(|| "pseudo-out-of-sample run".into())?;
    let report = evaluate(&run.records, ITERATED_BENCHMARK, &cfg.horizons, cfg.eval).context(|| "evaluation".into())?;

    let mut out = Outcome::default();
    out.notes.extend(run.notices.iter().cloned());
    let mut all = run.records.clone();
    let mut table: Vec<(String, Vec<HdCell>)> = Vec::new();
    for (name, grid) in &families {
        let ids: Vec<String> = grid.iter().map(ModelSpec::id).collect();
        let cells = cfg
            .horizons
            .iter()
            .map(|&h| {
                let hr = report.horizon(h).expect("evaluated horizon");
                hr.ranked()
                    .filter(|r| ids.contains(&r.model))
                    .filter_map(|r| r.relative.map(|v| (v, r.model.clone())))
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map_or((None, NA.into()), |(v, m)| (Some(v), m))
            })
            .collect();
        table.push((name.to_string(), cells));
    }

    let members: Vec<String> = complete_models(&run.records, &cfg.horizons, cfg.eval)
        .into_iter()
        .filter(|m| m.starts_with("var:"))
        .collect();
    for (name, scheme) in [
        ("comb_equal", CombinationScheme::Equal),
        ("comb_bma", CombinationScheme::Bma),
    ] {
        let cells = if members.is_empty() {
            out.notes
                .push(format!("{name}: no single-predictor VAR covers every target"));
            vec![(None, NA.to_string()); cfg.horizons.len()]
        } else {
            let comb =
                combine_forecasts(&run.records, &members, scheme, name).context(|| format!("{name} combination"))?;
            let cells = cfg
                .horizons
                .iter()
                .map(|&h| {
                    let bench = at_horizon(&run.records, ITERATED_BENCHMARK, h, cfg);
                    let rel = relative_msfe(&at_horizon(&comb.records, name, h, cfg), &bench).ok();
                    (rel, format!("members={}", members.len()))
                })
                .collect();
            all.extend(comb.records);
            cells
        };
        table.push((name.to_string(), cells));
    }

    let external = match &cfg.external {
        None => vec![(None, NA.to_string()); cfg.horizons.len()],
        Some(path) => {
            let vintages = read_external(path)?;
            let ext = external_records("external", &vintages, data.log_gdp(), &cfg.horizons, cfg.eval)
                .context(|| format!("external forecasts {}", path.display()))?;
            let cells = cfg
                .horizons
                .iter()
                .map(|&h| {
                    let mine = at_horizon(&ext, "external", h, cfg);
                    if mine.is_empty() {
                        return (None, NA.to_string());
                    }
                    let bench = at_horizon(&run.records, ITERATED_BENCHMARK, h, cfg);
                    let rel = restrict_to(&bench, &mine).and_then(|b| relative_msfe(&mine, &b));
                    (rel.ok(), format!("targets={}", mine.len()))
                })
                .collect();
            all.extend(ext);
            cells
        }
    };
    table.push(("external".into(), external));

    sort_records(&mut all);
    out.files.push(write_records(&cfg.out.join("hd_records.csv"), &all)?);
    for &h in &cfg.horizons {
        out.files.push(write_ranking(
            &cfg.out.join(format!("hd_ranking_h{h}.csv")),
            &report,
            h,
        )?);
    }
    let mut header = vec!["method".to_string()];
    header.extend(cfg.horizons.iter().map(|h| format!("h{h}")));
    header.extend(cfg.horizons.iter().map(|h| format!("best_h{h}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.files.push(write_table(
        &cfg.out.join("hd_table.csv"),
        &header,
        table.into_iter().map(|(name, cells)| {
            let mut row = vec![name];
            row.extend(cells.iter().map(|(v, _)| opt(*v)));
            row.extend(cells.into_iter().map(|(_, w)| w));
            row
        }),
    )?);
    Ok(out)
}

/// Chart the iterated paths issued at `origin`, reading a record log.
pub fn cmd_chart(records: &Path, origin: Quarter, models: &[String], out: &Path) -> CliResult<Outcome> {
    let records = read_records(records)?;
    let svg = render_chart(&records, origin, models)?;
    Ok(Outcome {
        files: vec![write_text(out, &svg)?],
        notes: Vec::new(),
    })
}

/// Write a synthetic panel with one Granger-causal predictor, a matching
/// transform spec and a config that points at both.
pub fn cmd_simulate(dir: &Path, seed: u64) -> CliResult<Outcome> {
    let cfg = SyntheticConfig::default();
    let panel = simulate_panel(&cfg, seed).context(|| "synthetic panel".into())?;
    let entries = panel.predictors.entries();
    let mut header = vec!["date", "gdp"];
    header.extend(entries.iter().map(|e| e.label.as_str()));
    let rows = panel.gdp.iter().map(|(q, gdp)| {
        let mut row = vec![q.to_string(), opt(gdp)];
        row.extend(entries.iter().map(|e| opt(e.series.get(q))));
        row
    });
    let mut out = Outcome::default();
    out.files.push(write_table(&dir.join("panel.csv"), &header, rows)?);
    out.files.push(write_table(
        &dir.join("transforms.csv"),
        &["label", "code", "expr", "splice", "group"],
        entries.iter().map(|e| {
            vec![
                e.label.clone(),
                e.code.tag().into(),
                String::new(),
                String::new(),
                e.group.clone(),
            ]
        }),
    )?);
    let config = format!(
        "seed = {seed}\n\n[data]\ninputs = [\"panel.csv\"]\ntransforms = \"transforms.csv\"\ntarget = \"gdp\"\n"
    );
    out.files.push(write_text(&dir.join("config.toml"), &config)?);
    out.notes.push(format!(
        "signal loading {} on '{}'",
        panel.coefficient,
        cyclecast_core::simulate::SIGNAL_LABEL
    ));
    Ok(out)
}
