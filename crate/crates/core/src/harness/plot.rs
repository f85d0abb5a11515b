use std::fmt::Write;

use super::csvlog::AggregateRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

/// Mean curve with a ±std band and a dashed threshold line, as standalone SVG.
pub fn learning_curve_svg(title: &str, rows: &[AggregateRow], threshold: Option<f64>) -> String {
    let pts: Vec<&AggregateRow> = rows.iter().filter(|r| r.mean.is_finite() && r.std.is_finite()).collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }

    let x_max = pts.iter().map(|r| r.env_steps as f64).fold(1.0, f64::max);
    let mut y_lo = pts.iter().map(|r| r.mean - r.std).fold(f64::INFINITY, f64::min);
    let mut y_hi = pts.iter().map(|r| r.mean + r.std).fold(f64::NEG_INFINITY, f64::max);
    if let Some(t) = threshold {
        y_lo = y_lo.min(t);
        y_hi = y_hi.max(t);
    }
    if y_hi - y_lo < 1e-9 {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    let pad = 0.05 * (y_hi - y_lo);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);
    let sx = |x: f64| MARGIN + x / x_max * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let (x0, x1, y0, y1) = (sx(0.0), sx(x_max), sy(y_lo), sy(y_hi));
    let _ = writeln!(svg, r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.0}</text>"#, x0 - 4.0, sy(v) + 4.0);
        let s = x_max * k as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{s:.0}</text>"#, sx(s), y0 + 16.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">env steps</text>"#, WIDTH / 2.0, HEIGHT - 12.0);

    let mut band = String::new();
    for r in &pts {
        let _ = write!(band, "{:.1},{:.1} ", sx(r.env_steps as f64), sy(r.mean + r.std));
    }
    for r in pts.iter().rev() {
        let _ = write!(band, "{:.1},{:.1} ", sx(r.env_steps as f64), sy(r.mean - r.std));
    }
    let _ = writeln!(svg, r#"<polygon points="{}" fill="steelblue" fill-opacity="0.25" stroke="none"/>"#, band.trim_end());

    let line: Vec<String> = pts.iter().map(|r| format!("{:.1},{:.1}", sx(r.env_steps as f64), sy(r.mean))).collect();
    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, line.join(" "));

    if let Some(t) = threshold {
        let _ = writeln!(
            svg,
            r#"<line x1="{x0:.1}" y1="{0:.1}" x2="{x1:.1}" y2="{0:.1}" stroke="gray" stroke-dasharray="6,4"/>"#,
            sy(t)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
