use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ClassificationReport;
use crate::sep::{CorrelationMap, SnrMap};

const CELL: f64 = 64.0;
const MARGIN: f64 = 40.0;
const BLANK: &str = "#ffffff";

/// Anything [`render_report`] can draw.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Snr(&'a SnrMap),
    Correlation(&'a CorrelationMap),
    /// Trial-averaged traces per channel; empty traces are skipped.
    Traces {
        averages: &'a [Vec<f64>],
        fs: f64,
        pre_samples: usize,
    },
    Confusion(&'a ClassificationReport),
}

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r##"<rect x="{x:.1}" y="{y:.1}" width="{w:.1}" height="{h:.1}" fill="{fill}" stroke="#999999" stroke-width="1"/>"##
        );
    }

    fn text(&mut self, x: f64, y: f64, size: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="{size:.0}" text-anchor="middle" font-family="sans-serif">{}</text>"#,
            escape(s)
        );
    }

    fn finish(self) -> String {
        let w = self.width;
        let h = self.height;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Blue (−1) through white (0) to red (+1).
fn diverging(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let fade = |x: f64| (255.0 * (1.0 - x.abs())).round() as u8;
    let (r, g, b) = if v >= 0.0 { (255, fade(v), fade(v)) } else { (fade(v), fade(v), 255) };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn sequential(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let c = (255.0 * (1.0 - 0.8 * v)).round() as u8;
    format!("#{c:02x}{c:02x}ff")
}

fn snr_svg(map: &SnrMap) -> Result<String> {
    let g = &map.geometry;
    if g.n_channels() == 0 {
        return Err(Error::invalid("SNR map has no channels"));
    }
    let (rows, cols) = g.shape();
    let scale = map
        .medians()
        .iter()
        .map(|(_, m)| m.abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut svg = Svg::new(2.0 * MARGIN + cols as f64 * CELL, 2.0 * MARGIN + rows as f64 * CELL);
    svg.text(svg.width / 2.0, MARGIN / 2.0 + 6.0, 14.0, "median SNR (dB)");
    for (c, p) in g.positions.iter().enumerate() {
        let x = MARGIN + p.col as f64 * CELL;
        let y = MARGIN + p.row as f64 * CELL;
        match map.median_of(c) {
            Some(m) => {
                svg.rect(x, y, CELL, CELL, &diverging(m / scale));
                svg.text(x + CELL / 2.0, y + 24.0, 14.0, &(c + 1).to_string());
                svg.text(x + CELL / 2.0, y + 46.0, 12.0, &format!("{m:.2}"));
            }
            None => {
                svg.rect(x, y, CELL, CELL, BLANK);
                svg.text(x + CELL / 2.0, y + 24.0, 14.0, &(c + 1).to_string());
            }
        }
    }
    Ok(svg.finish())
}

fn correlation_svg(map: &CorrelationMap) -> Result<String> {
    let n = map.n_channels();
    if n == 0 {
        return Err(Error::invalid("correlation map has no channels"));
    }
    let side = 2.0 * MARGIN + n as f64 * CELL;
    let mut svg = Svg::new(side, side);
    svg.text(side / 2.0, MARGIN / 2.0 + 6.0, 14.0, &format!("peak correlation, lag (ms) within ±{}", map.max_lag_ms));
    for i in 0..n {
        svg.text(MARGIN / 2.0, MARGIN + i as f64 * CELL + CELL / 2.0 + 5.0, 12.0, &(i + 1).to_string());
        svg.text(MARGIN + i as f64 * CELL + CELL / 2.0, side - MARGIN / 2.0 + 5.0, 12.0, &(i + 1).to_string());
        for j in i..n {
            let x = MARGIN + j as f64 * CELL;
            let y = MARGIN + i as f64 * CELL;
            match map.get(i, j) {
                Some(p) if map.eligible[i] && map.eligible[j] => {
                    svg.rect(x, y, CELL, CELL, &diverging(p.corr));
                    svg.text(x + CELL / 2.0, y + 28.0, 12.0, &format!("{:.2}", p.corr));
                    svg.text(x + CELL / 2.0, y + 46.0, 10.0, &format!("{:.2} ms", p.lag_ms));
                }
                _ => svg.rect(x, y, CELL, CELL, BLANK),
            }
        }
    }
    Ok(svg.finish())
}

fn traces_svg(averages: &[Vec<f64>], fs: f64, pre_samples: usize) -> Result<String> {
    let shown: Vec<(usize, &Vec<f64>)> = averages.iter().enumerate().filter(|(_, t)| !t.is_empty()).collect();
    if shown.is_empty() {
        return Err(Error::invalid("no traces to draw"));
    }
    if !(fs > 0.0) {
        return Err(Error::invalid("sampling rate must be positive"));
    }
    let (w, h) = (480.0, 90.0);
    let mut svg = Svg::new(2.0 * MARGIN + w, 2.0 * MARGIN + shown.len() as f64 * h);
    let len = shown.iter().map(|(_, t)| t.len()).max().unwrap_or(1).max(2);
    let dx = w / (len - 1) as f64;
    let peak = shown
        .iter()
        .flat_map(|(_, t)| t.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let x0 = MARGIN + pre_samples as f64 * dx;
    let _ = writeln!(
        svg.body,
        r##"<line x1="{x0:.1}" y1="{:.1}" x2="{x0:.1}" y2="{:.1}" stroke="#444444" stroke-dasharray="4 3"/>"##,
        MARGIN,
        MARGIN + shown.len() as f64 * h
    );
    for (row, (c, t)) in shown.iter().enumerate() {
        let mid = MARGIN + row as f64 * h + h / 2.0;
        let mut pts = String::new();
        for (i, v) in t.iter().enumerate() {
            let _ = write!(pts, "{:.2},{:.2} ", MARGIN + i as f64 * dx, mid - v / peak * (h / 2.0 - 6.0));
        }
        let _ = writeln!(
            svg.body,
            r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="1"/>"##,
            pts.trim_end()
        );
        svg.text(MARGIN / 2.0, mid + 4.0, 12.0, &(c + 1).to_string());
    }
    let span_ms = (len - 1) as f64 * 1000.0 / fs;
    let pre_ms = pre_samples as f64 * 1000.0 / fs;
    svg.text(MARGIN, svg.height - MARGIN / 3.0, 11.0, &format!("{:.0} ms", -pre_ms));
    svg.text(MARGIN + w, svg.height - MARGIN / 3.0, 11.0, &format!("{:.0} ms", span_ms - pre_ms));
    svg.text(x0, svg.height - MARGIN / 3.0, 11.0, "0");
    Ok(svg.finish())
}

fn confusion_svg(r: &ClassificationReport) -> Result<String> {
    let k = r.classes.len();
    if k == 0 || r.n == 0 {
        return Err(Error::invalid("classification report is empty"));
    }
    let side = 3.0 * MARGIN + k as f64 * CELL;
    let mut svg = Svg::new(side, side);
    svg.text(side / 2.0, MARGIN / 2.0 + 6.0, 14.0, &format!("accuracy {:.3} (p = {:.3e})", r.accuracy, r.accuracy_p));
    let max = r.confusion.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let off = 2.0 * MARGIN;
    for (i, row) in r.confusion.iter().enumerate() {
        svg.text(MARGIN, off + i as f64 * CELL + CELL / 2.0 + 4.0, 11.0, r.classes[i].name());
        svg.text(off + i as f64 * CELL + CELL / 2.0, off - 8.0, 11.0, r.classes[i].name());
        for (j, &count) in row.iter().enumerate() {
            let x = off + j as f64 * CELL;
            let y = off + i as f64 * CELL;
            svg.rect(x, y, CELL, CELL, &sequential(count as f64 / max));
            svg.text(x + CELL / 2.0, y + CELL / 2.0 + 5.0, 14.0, &count.to_string());
        }
    }
    svg.text(off + k as f64 * CELL / 2.0, MARGIN - 4.0, 11.0, "predicted");
    svg.text(MARGIN / 2.0, off - 8.0, 11.0, "true");
    Ok(svg.finish())
}

/// Deterministic SVG text for `report`.
pub fn render(report: Report<'_>) -> Result<String> {
    match report {
        Report::Snr(m) => snr_svg(m),
        Report::Correlation(m) => correlation_svg(m),
        Report::Traces {
            averages,
            fs,
            pre_samples,
        } => traces_svg(averages, fs, pre_samples),
        Report::Confusion(r) => confusion_svg(r),
    }
}

pub fn render_report(report: Report<'_>, path: &Path) -> Result<String> {
    let svg = render(report)?;
    std::fs::write(path, &svg)?;
    Ok(svg)
}
