//! Minimal SVG line charts.
//!
//! The first column named `t` is the x axis; every other numeric column is a
//! series. Output depends only on the table and style, so identical inputs
//! give identical bytes.

use std::fmt::Write;

use crate::error::{CliError, Result};
use crate::table::Table;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone)]
pub struct PlotStyle {
    pub width: f64,
    pub height: f64,
    pub title: Option<String>,
    pub x_label: String,
    pub y_label: String,
    pub stroke_width: f64,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle {
            width: 720.0,
            height: 440.0,
            title: None,
            x_label: "t".into(),
            y_label: String::new(),
            stroke_width: 1.5,
        }
    }
}

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 200.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;

/// Renders every numeric non-`t` column of `table` against `t`. A long-format
/// sweep table (with `sweep_value`) is first pivoted on `analytic_size`.
pub fn emit_svg(table: &Table, style: &PlotStyle) -> Result<String> {
    if table.rows.is_empty() {
        return Err(CliError::spec("table", "nothing to plot: table has no rows"));
    }
    if table.column_index("sweep_value").is_some() && table.column_index("analytic_size").is_some() {
        let wide = table
            .pivot_wide("sweep_value", "analytic_size")
            .ok_or_else(|| CliError::spec("table", "sweep table could not be pivoted"))?;
        return emit_svg(&wide, style);
    }
    let xs = table
        .numeric_column("t")
        .ok_or_else(|| CliError::spec("table", "a numeric `t` column is required"))?;
    let series: Vec<(&str, Vec<f64>)> = table
        .columns
        .iter()
        .filter(|c| c.as_str() != "t")
        .filter_map(|c| table.numeric_column(c).map(|v| (c.as_str(), v)))
        .collect();
    if series.is_empty() {
        return Err(CliError::spec("table", "no numeric series besides `t`"));
    }

    let (x_min, x_max) = bounds(xs.iter().copied());
    let (y_min, y_max) = bounds(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let y_min = y_min.min(0.0);
    let x_ticks = ticks(x_min, x_max);
    let y_ticks = ticks(y_min, y_max);
    let (x_lo, x_hi) = span(&x_ticks, x_min, x_max);
    let (y_lo, y_hi) = span(&y_ticks, y_min, y_max);

    let plot_w = style.width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = style.height - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = style.width,
        h = style.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(title) = &style.title {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            fmt(MARGIN_LEFT + plot_w / 2.0),
            escape(title)
        );
    }

    let _ = writeln!(s, r##"<g class="grid" stroke="#dddddd" stroke-width="1">"##);
    for &x in &x_ticks {
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#,
            fmt(px(x)),
            fmt(MARGIN_TOP),
            fmt(MARGIN_TOP + plot_h)
        );
    }
    for &y in &y_ticks {
        let _ = writeln!(
            s,
            r#"<line x1="{1}" y1="{0}" x2="{2}" y2="{0}"/>"#,
            fmt(py(y)),
            fmt(MARGIN_LEFT),
            fmt(MARGIN_LEFT + plot_w)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/>"#,
        l = fmt(MARGIN_LEFT),
        r = fmt(MARGIN_LEFT + plot_w),
        b = fmt(MARGIN_TOP + plot_h)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}"/>"#,
        l = fmt(MARGIN_LEFT),
        t = fmt(MARGIN_TOP),
        b = fmt(MARGIN_TOP + plot_h)
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="ticks">"#);
    for &x in &x_ticks {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt(px(x)),
            fmt(MARGIN_TOP + plot_h + 16.0),
            label(x)
        );
    }
    for &y in &y_ticks {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            fmt(MARGIN_LEFT - 6.0),
            fmt(py(y) + 4.0),
            label(y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        fmt(MARGIN_LEFT + plot_w / 2.0),
        fmt(style.height - 10.0),
        escape(&style.x_label)
    );
    if !style.y_label.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
            escape(&style.y_label),
            y = fmt(MARGIN_TOP + plot_h / 2.0)
        );
    }
    let _ = writeln!(s, "</g>");

    for (i, (name, ys)) in series.iter().enumerate() {
        let points: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{},{}", fmt(px(x)), fmt(py(y))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="{}" points="{}"><title>{}</title></polyline>"#,
            PALETTE[i % PALETTE.len()],
            style.stroke_width,
            points.join(" "),
            escape(name)
        );
    }

    let _ = writeln!(s, r#"<g class="legend">"#);
    let lx = MARGIN_LEFT + plot_w + 12.0;
    for (i, (name, _)) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 8.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/>"#,
            fmt(lx),
            fmt(lx + 20.0),
            PALETTE[i % PALETTE.len()],
            y = fmt(ly)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            fmt(lx + 26.0),
            fmt(ly + 4.0),
            escape(name)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Round tick positions (1, 2 or 5 times a power of ten) covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn span(ticks: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    (
        ticks.first().copied().unwrap_or(lo).min(lo),
        ticks.last().copied().unwrap_or(hi).max(hi),
    )
}

fn fmt(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn label(v: f64) -> String {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
