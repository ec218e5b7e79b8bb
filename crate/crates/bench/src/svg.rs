//! Minimal SVG line chart of mean `ln A_s` against iteration, one line per
//! preset arm. The output depends only on the CSV text and the floor.

use std::fmt::Write as _;

use crate::experiments::{read_trace_csv, summarize};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the trace CSV. Zero error rates are drawn at `ln(floor)`.
pub fn render_svg(csv_text: &str, floor: f64, title: &str) -> csv::Result<String> {
    let rows = read_trace_csv(csv_text)?;
    let summaries = summarize(&rows, floor);

    let max_iter = summaries.iter().map(|s| s.mean_log_error.len()).max().unwrap_or(1).max(2) - 1;
    let values = summaries.iter().flat_map(|s| s.mean_log_error.iter().copied());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (floor.ln(), 0.0);
    }
    lo = lo.floor();
    hi = hi.ceil().max(lo + 1.0);

    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |it: f64| MARGIN + plot_w * it / max_iter as f64;
    let y = |v: f64| MARGIN + plot_h * (hi - v) / (hi - lo);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (x(0.0), x(max_iter as f64), y(lo), y(hi));
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);

    let x_step = (max_iter as f64 / 10.0).ceil().max(1.0) as usize;
    for it in (0..=max_iter).step_by(x_step) {
        let px = x(it as f64);
        let _ = writeln!(out, r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/>"#, y0 + 4.0);
        let _ = writeln!(out, r#"<text x="{px}" y="{}" text-anchor="middle">{it}</text>"#, y0 + 18.0);
    }
    let y_step = ((hi - lo) / 8.0).ceil().max(1.0);
    let mut v = lo;
    while v <= hi + 1e-9 {
        let py = y(v);
        let _ = writeln!(out, r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{v}</text>"#, x0 - 8.0, py + 4.0);
        v += y_step;
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">mean ln(error)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (i, s) in summaries.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = s
            .mean_log_error
            .iter()
            .enumerate()
            .map(|(it, &v)| format!("{:.2},{:.2}", x(it as f64), y(v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN + 16.0 * i as f64 + 8.0;
        let lx = WIDTH - MARGIN - 150.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.arm));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "preset,replicate,iteration,A,G,Lambda,objective,elapsed_ms\n\
                       a,0,0,0.5,,,,\na,0,1,0.0,,,,\nb,0,0,0.25,,,,\nb,0,1,0.125,,,,\n";

    #[test]
    fn one_polyline_per_arm() {
        let svg = render_svg(CSV, 1e-3, "t").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(render_svg(CSV, 1e-3, "t").unwrap(), render_svg(CSV, 1e-3, "t").unwrap());
    }
}
