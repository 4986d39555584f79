//! Minimal SVG line charts for sweep results. CSV is the contract; these are
//! convenience artifacts, one chart per metric with a polyline per entity.

use crate::sweep::SweepResult;
use std::collections::BTreeMap;

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Render one metric of a sweep as an SVG line chart. Returns `None` when the
/// metric has no finite data points.
pub fn render_metric_svg(result: &SweepResult, metric: &str) -> Option<String> {
    // entity -> ordered (x, y)
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &result.rows {
        if row.metric != metric {
            continue;
        }
        if let Some(y) = row.analytic {
            if y.is_finite() {
                series
                    .entry(row.entity.clone())
                    .or_default()
                    .push((row.value, y));
            }
        }
    }
    if series.is_empty() || series.values().all(Vec::is_empty) {
        return None;
    }
    let xs: Vec<f64> = series.values().flatten().map(|p| p.0).collect();
    let ys: Vec<f64> = series.values().flatten().map(|p| p.1).collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0).max(1e-300) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0).max(1e-300) * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{} vs {}</text>\n",
        W / 2.0,
        metric,
        result.parameter.name()
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    ));
    for (label, x, y, anchor) in [
        (format!("{x0:.4}"), MARGIN, H - MARGIN + 18.0, "middle"),
        (format!("{x1:.4}"), W - MARGIN, H - MARGIN + 18.0, "middle"),
        (format!("{y0:.4e}"), MARGIN - 6.0, H - MARGIN, "end"),
        (format!("{y1:.4e}"), MARGIN - 6.0, MARGIN + 4.0, "end"),
    ] {
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-size=\"11\" text-anchor=\"{anchor}\">{label}</text>\n"
        ));
    }
    for (idx, (entity, pts)) in series.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{entity}</text>\n",
            W - MARGIN + 4.0,
            MARGIN + 16.0 * idx as f64
        ));
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

/// All metrics that appear in the result, in deterministic order.
pub fn metrics_present(result: &SweepResult) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in &result.rows {
        if r.metric != "error" && !names.contains(&r.metric) {
            names.push(r.metric.clone());
        }
    }
    names
}

fn bounds(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FleetConfig;
    use crate::sweep::{run_sweep, SweepParameter, SweepSpec};

    #[test]
    fn renders_valid_svg() {
        let spec = SweepSpec {
            parameter: SweepParameter::FUplinkAir,
            grid: vec![0.3, 0.4, 0.5],
            metrics: vec!["uplink_load".into()],
            plot: true,
            simulate: None,
        };
        let result = run_sweep(&FleetConfig::reference_scenario(), &spec, 1).unwrap();
        let svg = render_metric_svg(&result, "uplink_load").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(metrics_present(&result), vec!["uplink_load".to_string()]);
    }
}
