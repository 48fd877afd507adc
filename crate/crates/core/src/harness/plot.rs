use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::Algorithm;
use super::trace::{read_trace, RunSummary, TraceError, TraceRow};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad summary {path}: {reason}")]
    Summary { path: PathBuf, reason: String },
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn colour(algo: Algorithm) -> &'static str {
    match algo {
        Algorithm::Dpe => "#1f77b4",
        Algorithm::Centralized => "#2ca02c",
        Algorithm::Oracle => "#7f7f7f",
        Algorithm::Random => "#d62728",
    }
}

/// Seed-mean zeroed regret against `ln t`, one line per algorithm, plus
/// `reference * ln t` when given.
pub fn render_svg(rows: &[TraceRow], reference: Option<f64>) -> String {
    let mut curves: BTreeMap<Algorithm, BTreeMap<u64, (f64, u32)>> = BTreeMap::new();
    for r in rows {
        let e = curves.entry(r.algorithm).or_default().entry(r.t).or_insert((0.0, 0));
        e.0 += r.cum_regret_zeroed;
        e.1 += 1;
    }
    let curves: BTreeMap<Algorithm, Vec<(f64, f64)>> = curves
        .into_iter()
        .map(|(a, pts)| (a, pts.into_iter().map(|(t, (s, n))| ((t as f64).ln(), s / f64::from(n))).collect()))
        .collect();

    let xs = curves.values().flatten().map(|p| p.0);
    let x_max = xs.clone().fold(1.0f64, f64::max);
    let x_min = xs.fold(x_max, f64::min).min(0.0);
    let mut y_max = curves.values().flatten().map(|p| p.1).fold(0.0f64, f64::max);
    if let Some(c) = reference {
        y_max = y_max.max(c * x_max);
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min).max(1e-12) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - y / y_max * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (sx(x_min), sy(0.0), sx(x_max), sy(y_max));
    let _ = writeln!(svg, r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * f64::from(i) / 4.0;
        let fy = y_max * f64::from(i) / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.1}</text>"#, sx(fx), y0 + 18.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.0}</text>"#, x0 - 6.0, sy(fy) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">ln t</text>"#, WIDTH / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">regret</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    let mut legend = Vec::new();
    if let Some(c) = reference {
        let _ = writeln!(
            svg,
            r#"<path d="M{:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="black" stroke-dasharray="6 4"/>"#,
            sx(x_min),
            sy(c * x_min),
            sx(x_max),
            sy(c * x_max)
        );
        legend.push((format!("{c:.3} ln t"), "black"));
    }
    for (algo, pts) in &curves {
        let d: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| format!("{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, sx(x), sy(y)))
            .collect();
        let _ = writeln!(svg, r#"<path d="{}" fill="none" stroke="{}" stroke-width="2"/>"#, d.join(" "), colour(*algo));
        legend.push((algo.name().to_string(), colour(*algo)));
    }
    for (i, (label, col)) in legend.iter().enumerate() {
        let y = MARGIN + 16.0 * i as f64;
        let _ = writeln!(svg, r#"<rect x="{:.2}" y="{:.2}" width="12" height="3" fill="{col}"/>"#, MARGIN + 10.0, y - 4.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{y:.2}">{label}</text>"#, MARGIN + 28.0);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Where `run` leaves the summary for a trace at `csv_path`.
pub fn summary_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("summary.json")
}

/// Reads a trace and renders it. Without an explicit `reference`, the
/// constant is taken from the summary written next to the trace, if any.
pub fn emit_plot(csv_path: &Path, reference: Option<f64>) -> Result<String, PlotError> {
    let file = File::open(csv_path).map_err(|source| PlotError::Io { path: csv_path.to_path_buf(), source })?;
    let rows = read_trace(file)?;
    let reference = match reference {
        Some(c) => Some(c),
        None => {
            let path = summary_path(csv_path);
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    let s: RunSummary = serde_json::from_str(&text)
                        .map_err(|e| PlotError::Summary { path: path.clone(), reason: e.to_string() })?;
                    Some(s.lower_bound_constant)
                }
                Err(_) => None,
            }
        }
    };
    Ok(render_svg(&rows, reference))
}
