//! Plain-text SVG line charts. No external assets, no timestamps: the same
//! summary always renders to the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::algorithms::Algorithm;
use crate::harness::Summary;
use crate::{Error, Result};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 84.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 64.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// `[lo, hi]` widened by 5% of its span on each side. A zero span is widened
/// by 5% of the magnitude (or by 1 around zero).
pub fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let pad = if span > 0.0 {
        0.05 * span
    } else if lo != 0.0 {
        0.05 * lo.abs()
    } else {
        1.0
    };
    (lo - pad, hi + pad)
}

#[derive(Debug, Clone, Copy)]
enum XAxis {
    /// Rounds, plotted on log2 with `2^k` ticks.
    Log2,
    /// Epsilon, plotted on log10.
    Log10,
}

impl XAxis {
    fn map(self, x: f64) -> f64 {
        match self {
            XAxis::Log2 => x.log2(),
            XAxis::Log10 => x.log10(),
        }
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

struct Chart<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    x_axis: XAxis,
    series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn label_of(algorithm: &str) -> String {
    Algorithm::from_name(algorithm)
        .map(|a| a.display_name().to_string())
        .unwrap_or_else(|| algorithm.to_string())
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e6).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

impl Chart<'_> {
    fn render(&self) -> Result<String> {
        let all: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|&(x, y)| (self.x_axis.map(x), y)))
            .collect();
        if all.is_empty() {
            return Err(Error::InvalidInput("nothing to plot".into()));
        }
        if all.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidInput(
                "non-finite or non-positive coordinate in plot data".into(),
            ));
        }
        let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64)) -> f64| {
            all.iter().map(pick).fold(init, f)
        };
        let (x0, x1) = padded_range(
            fold(f64::min, f64::INFINITY, |p| p.0),
            fold(f64::max, f64::NEG_INFINITY, |p| p.0),
        );
        let (y0, y1) = padded_range(
            fold(f64::min, f64::INFINITY, |p| p.1),
            fold(f64::max, f64::NEG_INFINITY, |p| p.1),
        );
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

        let mut out = String::new();
        let w = &mut out;
        writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(
            w,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        )
        .unwrap();
        writeln!(
            w,
            r#"<text class="title" x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(self.title)
        )
        .unwrap();
        writeln!(
            w,
            r#"<g class="plot-area" data-x-min="{x0}" data-x-max="{x1}" data-y-min="{y0}" data-y-max="{y1}">"#
        )
        .unwrap();
        writeln!(
            w,
            r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
        )
        .unwrap();

        // x ticks at whole units of the log axis
        let mut k = x0.ceil();
        while k <= x1.floor() {
            let x = sx(k);
            let label = match self.x_axis {
                XAxis::Log2 => format!("2^{k}"),
                XAxis::Log10 => tick_label(10f64.powf(k)),
            };
            writeln!(
                w,
                r##"<line class="x-tick" x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#444"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
                TOP + plot_h,
                TOP + plot_h + 5.0,
                TOP + plot_h + 19.0,
                escape(&label)
            )
            .unwrap();
            k += 1.0;
        }
        for i in 0..=5 {
            let v = y0 + (y1 - y0) * i as f64 / 5.0;
            let y = sy(v);
            writeln!(
                w,
                r##"<line class="y-tick" x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0,
                tick_label(v)
            )
            .unwrap();
        }
        writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 18.0,
            escape(self.x_label)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0,
            escape(self.y_label)
        )
        .unwrap();

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(self.x_axis.map(x)), sy(y)))
                .collect();
            writeln!(
                w,
                r#"<polyline class="series" data-label="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                escape(&s.label),
                pts.join(" ")
            )
            .unwrap();
            if s.points.len() <= 16 {
                for &(x, y) in &s.points {
                    writeln!(
                        w,
                        r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                        sx(self.x_axis.map(x)),
                        sy(y)
                    )
                    .unwrap();
                }
            }
        }
        writeln!(w, "</g>").unwrap();

        let lx = WIDTH - RIGHT + 16.0;
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let ly = TOP + 14.0 + 20.0 * i as f64;
            writeln!(
                w,
                r#"<g class="legend-entry"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text></g>"#,
                lx + 22.0,
                lx + 28.0,
                ly + 4.0,
                escape(&s.label)
            )
            .unwrap();
        }
        writeln!(w, "</svg>").unwrap();
        Ok(out)
    }
}

/// Mean cumulative regret against round, one line per summary row.
pub fn render_regret_curves(summary: &Summary, title: &str) -> Result<String> {
    if summary.is_empty() {
        return Err(Error::InvalidInput("empty summary".into()));
    }
    let series = summary
        .rows
        .iter()
        .map(|row| Series {
            label: label_of(&row.algorithm),
            points: row
                .checkpoints
                .iter()
                .filter(|c| c.t > 0)
                .map(|c| (c.t as f64, c.mean))
                .collect(),
        })
        .collect();
    Chart {
        title,
        x_label: "round t",
        y_label: "mean cumulative regret",
        x_axis: XAxis::Log2,
        series,
    }
    .render()
}

/// Mean final regret against epsilon, one line per algorithm.
pub fn render_final_regret(summary: &Summary, title: &str) -> Result<String> {
    if summary.is_empty() {
        return Err(Error::InvalidInput("empty summary".into()));
    }
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &summary.rows {
        let point = (row.epsilon, row.final_stats().mean);
        match series.iter_mut().find(|(a, _)| *a == row.algorithm) {
            Some((_, pts)) => pts.push(point),
            None => series.push((row.algorithm.clone(), vec![point])),
        }
    }
    let series = series
        .into_iter()
        .map(|(alg, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                label: label_of(&alg),
                points,
            }
        })
        .collect();
    Chart {
        title,
        x_label: "epsilon",
        y_label: "mean final regret",
        x_axis: XAxis::Log10,
        series,
    }
    .render()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn plot_regret_curves(summary: &Summary, title: &str, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &render_regret_curves(summary, title)?)
}

pub fn plot_final_regret(summary: &Summary, title: &str, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &render_final_regret(summary, title)?)
}
