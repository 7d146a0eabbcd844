//! Minimal deterministic SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const MARGIN: f64 = 48.0;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Style {
    /// Any SVG colour; `None` picks from a fixed palette by series index.
    pub color: Option<String>,
    pub dashed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl PlotSeries {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        PlotSeries {
            label: label.into(),
            points,
            style: Style::default(),
        }
    }

    pub fn dashed(mut self) -> Self {
        self.style.dashed = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub series: Vec<PlotSeries>,
    /// Fixed axis ranges; `None` fits the data.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

impl PlotSpec {
    pub fn new(series: Vec<PlotSeries>) -> Self {
        PlotSpec {
            width: 800,
            height: 400,
            series,
            x_range: None,
            y_range: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::domain("plot dimensions must be positive"));
        }
        if f64::from(self.width) <= 2.0 * MARGIN || f64::from(self.height) <= 2.0 * MARGIN {
            return Err(Error::domain("plot is too small for its margins"));
        }
        if self.series.is_empty() {
            return Err(Error::domain("plot needs at least one series"));
        }
        let finite = self
            .series
            .iter()
            .flat_map(|s| &s.points)
            .all(|(x, y)| x.is_finite() && y.is_finite());
        if !finite {
            return Err(Error::domain("plot points must be finite"));
        }
        for r in [self.x_range, self.y_range].into_iter().flatten() {
            if !(r.0.is_finite() && r.1.is_finite() && r.0 < r.1) {
                return Err(Error::domain("axis range must be finite and increasing"));
            }
        }
        Ok(())
    }
}

fn auto_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn render_svg_string(plot: &PlotSpec) -> Result<String> {
    plot.validate()?;
    let all = || plot.series.iter().flat_map(|s| s.points.iter().copied());
    let (x0, x1) = plot.x_range.unwrap_or_else(|| auto_range(all().map(|p| p.0)));
    let (y0, y1) = plot.y_range.unwrap_or_else(|| auto_range(all().map(|p| p.1)));
    let (w, h) = (f64::from(plot.width), f64::from(plot.height));
    let (pw, ph) = (w - 2.0 * MARGIN, h - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| h - MARGIN - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        plot.width, plot.height
    );
    let _ = writeln!(out, r#"<rect width="{}" height="{}" fill="white"/>"#, plot.width, plot.height);
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN:.2}" y="{MARGIN:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#888888"/>"##
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, v: f64| {
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{}</text>"#,
            tick(v)
        );
    };
    label(&mut out, MARGIN, h - MARGIN + 14.0, "start", x0);
    label(&mut out, w - MARGIN, h - MARGIN + 14.0, "end", x1);
    label(&mut out, MARGIN - 4.0, h - MARGIN, "end", y0);
    label(&mut out, MARGIN - 4.0, MARGIN + 10.0, "end", y1);

    for (i, s) in plot.series.iter().enumerate() {
        let color = s.style.color.as_deref().unwrap_or(PALETTE[i % PALETTE.len()]);
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if s.style.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            escape(color),
            coords.join(" ")
        );
        let ly = MARGIN + 14.0 * (i as f64 + 1.0);
        let lx = MARGIN + 8.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1.5"{dash}/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0,
            escape(color)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 26.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e6 || v.abs() < 1e-3) {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

pub fn render_svg(plot: &PlotSpec, path: &Path) -> Result<()> {
    let text = render_svg_string(plot)?;
    super::write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points_one_polyline() {
        let plot = PlotSpec::new(vec![PlotSeries::new("s", vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)])]);
        let svg = render_svg_string(&plot).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 3);
        assert_eq!(svg, render_svg_string(&plot).unwrap());
    }

    #[test]
    fn overlay_has_legend_and_escapes() {
        let pts = vec![(0.0, 1.0), (1.0, 1.0)];
        let plot = PlotSpec::new(vec![
            PlotSeries::new("data", pts.clone()),
            PlotSeries::new("wave", pts.clone()),
            PlotSeries::new("a<b", pts).dashed(),
        ]);
        let svg = render_svg_string(&plot).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains(">data<") && svg.contains(">wave<") && svg.contains(">a&lt;b<"));
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn rejects_bad_specs() {
        let mut plot = PlotSpec::new(vec![]);
        assert!(render_svg_string(&plot).is_err());
        plot.series.push(PlotSeries::new("s", vec![(0.0, f64::NAN)]));
        assert!(render_svg_string(&plot).is_err());
        plot.series[0].points[0].1 = 0.0;
        plot.width = 0;
        assert!(render_svg_string(&plot).is_err());
    }
}
