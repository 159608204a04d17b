//! Minimal static SVG line chart for residual histories.

use std::path::Path;

use gclust_core::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;

/// Writes a log₁₀-scaled line chart of the residual history.
pub fn write_residual_chart(path: &Path, residuals: &[f64]) -> Result<()> {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let logs: Vec<f64> = residuals
        .iter()
        .map(|&r| r.max(1e-300).log10())
        .collect();
    if !logs.is_empty() {
        let (lo, hi) = logs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = (hi - lo).max(1e-9);
        let x_step = (WIDTH - 2.0 * MARGIN) / (logs.len().max(2) - 1) as f64;
        let points: Vec<String> = logs
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let x = MARGIN + i as f64 * x_step;
                let y = HEIGHT - MARGIN - (v - lo) / span * (HEIGHT - 2.0 * MARGIN);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{MARGIN}\" y=\"{:.2}\" font-size=\"12\" font-family=\"monospace\">\
             log10 residual: {:.2} .. {:.2} over {} iterations</text>\n",
            MARGIN - 16.0,
            hi,
            lo,
            logs.len()
        ));
    }
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN
    ));
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}
