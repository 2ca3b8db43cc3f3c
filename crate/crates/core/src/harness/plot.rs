//! Minimal SVG line charts of result rows, one polyline per scheme label.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::ResultRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 240.0;
const MARGIN_Y: f64 = 40.0;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the rows as an SVG document.
pub fn render_svg(rows: &[ResultRow], title: &str, x_label: &str, y_label: &str) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for r in rows {
        if !labels.contains(&r.scheme.as_str()) {
            labels.push(&r.scheme);
        }
    }
    let finite = |f: fn(&ResultRow) -> f64| rows.iter().map(f).filter(|v| v.is_finite());
    let x_min = finite(|r| r.sweep_value).fold(f64::INFINITY, f64::min);
    let x_max = finite(|r| r.sweep_value).fold(f64::NEG_INFINITY, f64::max);
    let y_min = finite(|r| r.metric_mean).fold(f64::INFINITY, f64::min).min(0.0);
    let mut y_max = finite(|r| r.metric_mean).fold(f64::NEG_INFINITY, f64::max);
    if !(y_max > y_min) {
        y_max = y_min + 1.0;
    }
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |x: f64| MARGIN_LEFT + (x - x_min) / x_span * plot_w;
    let py = |y: f64| HEIGHT - MARGIN_Y - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    // axes
    let (x0, y0) = (MARGIN_LEFT, HEIGHT - MARGIN_Y);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{MARGIN_Y} L{x0},{y0} L{},{y0}" fill="none" stroke="black"/>"#,
        MARGIN_LEFT + plot_w
    );
    for k in 0..=5 {
        let fx = x_min + x_span * k as f64 / 5.0;
        let fy = y_min + (y_max - y_min) * k as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#,
            px(fx),
            y0 + 16.0,
            fx
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            x0 - 6.0,
            py(fy) + 4.0,
            fy
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 6.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );

    for (i, label) in labels.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = if label.ends_with("_lower") { r#" stroke-dasharray="6 4""# } else { "" };
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r.scheme == *label && r.metric_mean.is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r.sweep_value), py(r.metric_mean)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            points.join(" ")
        );
        let ly = MARGIN_Y + 18.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(label));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(rows: &[ResultRow], path: &Path, title: &str, x_label: &str, y_label: &str) -> Result<()> {
    std::fs::write(path, render_svg(rows, title, x_label, y_label))
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
