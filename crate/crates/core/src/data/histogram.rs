use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::aol::{histogram_bin, histogram_edges, OutlierBounds};
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width histogram over [min, max] of `values`.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("histogram of no values".into()));
        }
        if bins == 0 {
            return Err(Error::Parameter("histogram needs at least one bin".into()));
        }
        let edges = histogram_edges(values, bins);
        let mut counts = vec![0; bins];
        for &v in values {
            counts[histogram_bin(&edges, v)] += 1;
        }
        Ok(Self { edges, counts })
    }

    fn lo(&self) -> f64 {
        self.edges[0]
    }

    fn hi(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Horizontal SVG coordinate of `value`, clamped to the plot area.
    pub fn x_of(&self, value: f64) -> f64 {
        let span = self.hi() - self.lo();
        let t = ((value - self.lo()) / span).clamp(0.0, 1.0);
        LEFT + t * (WIDTH - LEFT - RIGHT)
    }
}

pub fn histogram_csv(hist: &Histogram) -> String {
    let mut out = String::from("bin_start,bin_end,count\n");
    for (w, count) in hist.edges.windows(2).zip(&hist.counts) {
        let _ = writeln!(out, "{},{},{}", w[0], w[1], count);
    }
    out
}

/// Standalone SVG with one rectangle per bin and dashed lines at the outlier
/// fences.
pub fn histogram_svg(hist: &Histogram, bounds: &OutlierBounds, title: &str) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let max_count = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let base = TOP + plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    for (i, &count) in hist.counts.iter().enumerate() {
        let x0 = hist.x_of(hist.edges[i]);
        let x1 = hist.x_of(hist.edges[i + 1]);
        let h = plot_h * count as f64 / max_count;
        let _ = writeln!(
            svg,
            r##"<rect class="bin" x="{x0:.3}" y="{:.3}" width="{:.3}" height="{h:.3}" fill="#4c78a8" stroke="white" stroke-width="0.5"><title>[{}, {}): {count}</title></rect>"##,
            base - h,
            (x1 - x0).max(0.0),
            hist.edges[i],
            hist.edges[i + 1],
        );
    }
    // axes
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="black"/>
<text x="{LEFT}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{:.3}</text>
<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{:.3}</text>
<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">angular distance (rad)</text>
<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
        LEFT + plot_w,
        base + 16.0,
        hist.lo(),
        LEFT + plot_w,
        base + 16.0,
        hist.hi(),
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        LEFT - 6.0,
        TOP + 4.0,
        max_count as usize,
    );
    for (class, value, colour) in [
        ("threshold lower", bounds.lower_bound, "#d62728"),
        ("threshold upper", bounds.upper_bound, "#2ca02c"),
    ] {
        let x = hist.x_of(value);
        let _ = writeln!(
            svg,
            r#"<line class="{class}" x1="{x:.3}" y1="{TOP}" x2="{x:.3}" y2="{base}" stroke="{colour}" stroke-width="1.5" stroke-dasharray="6,4"><title>{value}</title></line>"#
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `path` (SVG) and a sibling `.csv` with the bin counts. Returns the
/// CSV path.
pub fn emit_histogram(values: &[f64], bins: usize, bounds: &OutlierBounds, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    let hist = Histogram::new(values, bins)?;
    let csv_path = path.with_extension("csv");
    std::fs::write(path, histogram_svg(&hist, bounds, "Angular distance distribution"))
        .map_err(|e| Error::io(path, e))?;
    std::fs::write(&csv_path, histogram_csv(&hist)).map_err(|e| Error::io(&csv_path, e))?;
    Ok(csv_path)
}
