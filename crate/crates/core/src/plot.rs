//! SVG line charts of 1-D signals.

use crate::labels;
use crate::rectify::SignalSet;
use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, Default)]
pub struct PlotSpec {
    pub title: String,
    /// Channels drawn next to the combined signal; empty means every non-zero channel.
    pub channels: Vec<usize>,
    /// Sample indices marked on the combined signal.
    pub marks: Vec<usize>,
}

/// Renders the combined signal and the selected channels as a standalone SVG.
///
/// Each mark becomes a `<circle class="peak">` on the combined curve.
pub fn render_svg(signals: &SignalSet, spec: &PlotSpec) -> String {
    let n = signals.len();
    let channels: Vec<usize> = if spec.channels.is_empty() {
        (1..=signals.v_max()).filter(|&v| signals.channel(v).max() > 0.0).collect()
    } else {
        spec.channels.iter().copied().filter(|&v| v >= 1 && v <= signals.v_max()).collect()
    };
    let y_max = channels
        .iter()
        .map(|&v| signals.channel(v).max())
        .fold(signals.q_hat.max(), f64::max)
        .max(f64::MIN_POSITIVE);
    let x_span = (n.max(2) - 1) as f64;
    let px = |k: f64| MARGIN + k / x_span * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - v / y_max * (HEIGHT - 2.0 * MARGIN);
    let polyline = |values: &[f64]| {
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| format!("{:.2},{:.2}", px(k as f64), py(v)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(&spec.title)
    );
    let (x0, x1, y0, y1) = (px(0.0), px(x_span), py(0.0), py(y_max));
    let _ = writeln!(
        svg,
        r#"<path class="axes" d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">z' (mm), 0 .. {:.1}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        x_span * signals.q_hat.delta()
    );
    for (i, &v) in channels.iter().enumerate() {
        let name = labels::label_name(v).map_or_else(|| format!("V{v}"), str::to_string);
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<polyline class="channel" data-label="{name}" points="{}" stroke="{color}" stroke-width="1" fill="none"/>"#,
            polyline(signals.channel(v).values())
        );
    }
    let _ = writeln!(
        svg,
        r#"<polyline class="q-hat" points="{}" stroke="black" stroke-width="2" fill="none"/>"#,
        polyline(signals.q_hat.values())
    );
    for &k in spec.marks.iter().filter(|&&k| k < n) {
        let _ = writeln!(
            svg,
            r#"<circle class="peak" data-k="{k}" cx="{:.2}" cy="{:.2}" r="4" fill="red"/>"#,
            px(k as f64),
            py(signals.q_hat.values()[k])
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
