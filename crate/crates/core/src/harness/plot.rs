//! Static SVG line charts of per-episode metrics.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::run::load_run;
use crate::error::{invalid, io_err, Error, Result};
use crate::training::EpisodeMetrics;

pub const DEFAULT_SMOOTHING: usize = 10;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const LEGEND: f64 = 150.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Reward,
    SupportRate,
    Qos,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Reward => "reward",
            Metric::SupportRate => "support_rate",
            Metric::Qos => "qos",
        }
    }

    pub fn of(self, m: &EpisodeMetrics) -> f64 {
        match self {
            Metric::Reward => m.total_reward,
            Metric::SupportRate => m.support_rate,
            Metric::Qos => m.qos,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reward" => Ok(Metric::Reward),
            "support_rate" => Ok(Metric::SupportRate),
            "qos" => Ok(Metric::Qos),
            other => Err(invalid(format!(
                "unknown metric `{other}` (expected reward, support_rate or qos)"
            ))),
        }
    }
}

/// Trailing moving average; point `i` is the mean of `values[i..i + window]`
/// and sits at x = `i + window − 1`. A window longer than the series is
/// shortened to the series length.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.clamp(1, values.len().max(1));
    values.windows(w).map(|s| s.iter().sum::<f64>() / w as f64).collect()
}

/// One plotted line: label plus `(x, y)` points.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub fn smoothed_series(label: &str, values: &[f64], window: usize) -> Series {
    let w = window.clamp(1, values.len().max(1));
    let points = moving_average(values, w)
        .into_iter()
        .enumerate()
        .map(|(i, y)| ((i + w - 1) as f64, y))
        .collect();
    Series {
        label: label.to_string(),
        points,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 1e-12 { lo.abs() * 0.1 } else { 1.0 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Renders series as an SVG document.
pub fn render_svg(series: &[Series], title: &str, y_label: &str) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let plot_w = WIDTH - 2.0 * MARGIN - LEGEND;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.0}</text>"#,
            sx(xv),
            HEIGHT - MARGIN + 18.0,
            xv
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            MARGIN - 6.0,
            sy(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">episode</text>"#,
        MARGIN + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN - LEGEND + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Plots `metric` for each run, smoothed over `window` episodes.
pub fn plot(root: &Path, run_ids: &[&str], metric: Metric, window: usize, out: &Path) -> Result<()> {
    if run_ids.is_empty() {
        return Err(invalid("plot needs at least one run"));
    }
    let series = run_ids
        .iter()
        .map(|id| {
            let run = load_run(root, id)?;
            if run.metrics.is_empty() {
                return Err(invalid(format!("run `{id}` has no episodes")));
            }
            let values: Vec<f64> = run.metrics.iter().map(|m| metric.of(m)).collect();
            Ok(smoothed_series(id, &values, window))
        })
        .collect::<Result<Vec<_>>>()?;
    let title = format!("{} (moving average {window})", metric.name());
    let svg = render_svg(&series, &title, metric.name());
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(out, svg).map_err(io_err(out))
}
