//! Static SVG line chart of iterated forecast paths against realized log
//! GDP. Output bytes depend only on the inputs.

use std::collections::BTreeMap;
use std::fmt::Write;

use cyclecast_core::evaluation::{ForecastKind, ForecastRecord};
use cyclecast_core::timeseries::Quarter;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_Y: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

struct Frame {
    x0: i64,
    x1: i64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, q: Quarter) -> f64 {
        let span = (self.x1 - self.x0).max(1) as f64;
        MARGIN_LEFT + (q.index() - self.x0) as f64 / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_Y - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN_Y)
    }

    fn points(&self, path: &BTreeMap<Quarter, f64>) -> String {
        path.iter()
            .map(|(q, v)| format!("{:.2},{:.2}", self.x(*q), self.y(*v)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Chart the iterated forecasts issued at `origin` by each of `models`,
/// with the realized log level at the same targets.
pub fn render_chart(records: &[ForecastRecord], origin: Quarter, models: &[String]) -> CliResult<String> {
    if models.is_empty() {
        return Err(CliError::Config("chart needs at least one model".into()));
    }
    let mut realized = BTreeMap::new();
    let mut paths = Vec::new();
    for model in models {
        let path: BTreeMap<Quarter, f64> = records
            .iter()
            .filter(|r| &r.model == model && r.origin == origin && r.kind == ForecastKind::Iterated)
            .map(|r| {
                realized.insert(r.target(), r.realized);
                (r.target(), r.forecast)
            })
            .collect();
        if path.is_empty() {
            return Err(CliError::Data(format!(
                "no iterated forecasts from model '{model}' at origin {origin}"
            )));
        }
        paths.push((model, path));
    }

    let values = realized.values().chain(paths.iter().flat_map(|(_, p)| p.values()));
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.01 };
    let frame = Frame {
        x0: realized.keys().next().map_or(0, |q| q.index()),
        x1: realized.keys().last().map_or(0, |q| q.index()),
        y0: lo - pad,
        y1: hi + pad,
    };

    let mut svg = String::new();
    // writing to a String cannot fail
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN_LEFT}" y="24" font-family="sans-serif" font-size="14">Log GDP forecasts from {origin}</text>"#
    );
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_Y, HEIGHT - MARGIN_Y);
    let _ = writeln!(
        svg,
        r#"<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = frame.y0 + (frame.y1 - frame.y0) * i as f64 / 4.0;
        let y = frame.y(v);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.3}</text>"#,
            left - 6.0
        );
    }
    for q in realized.keys().filter(|q| q.quarter() == 4) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            frame.x(*q),
            bottom + 16.0,
            q.year()
        );
    }
    let _ = writeln!(
        svg,
        r#"<polyline class="realized" points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        frame.points(&realized)
    );
    let legend = |svg: &mut String, row: usize, color: &str, label: &str| {
        let y = top + 18.0 * row as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
            right + 12.0,
            right + 32.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            right + 38.0,
            y + 4.0,
            escape(label)
        );
    };
    legend(&mut svg, 0, "black", "realized");
    for (i, (model, path)) in paths.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<polyline class="forecast" points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="6 3"/>"#,
            frame.points(path)
        );
        legend(&mut svg, i + 1, color, model);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records() -> Vec<ForecastRecord> {
        let origin: Quarter = "2007Q2".parse().unwrap();
        (1..=4)
            .map(|h| ForecastRecord {
                model: "var:capr".into(),
                predictor: "capr".into(),
                origin,
                horizon: h,
                kind: ForecastKind::Iterated,
                forecast: 9.0 + 0.01 * h as f64,
                realized: 9.0 + 0.005 * h as f64,
                error: -0.005 * h as f64,
                bic: None,
            })
            .collect()
    }

    #[test]
    fn one_model_gives_two_polylines() {
        let svg = render_chart(&records(), "2007Q2".parse().unwrap(), &["var:capr".into()]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r#"version="1.1""#));
    }

    #[test]
    fn empty_or_unknown_selection_fails() {
        let origin = "2007Q2".parse().unwrap();
        assert_eq!(render_chart(&records(), origin, &[]).unwrap_err().exit_code(), 2);
        assert!(render_chart(&records(), origin, &["lbvar".into()]).is_err());
    }
}
