//! Self-contained SVG bar chart for blended feature importances.

use std::collections::BTreeMap;

/// Renders a horizontal bar chart, features sorted by descending
/// percentage. Pure string assembly; no renderer required.
pub fn importance_chart(importances: &BTreeMap<String, f64>) -> String {
    let mut entries: Vec<(&str, f64)> =
        importances.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));

    let bar_height = 24;
    let gap = 8;
    let top = 40;
    let label_width = 70;
    let chart_width = 420;
    let width = 640;
    let height = top + entries.len() * (bar_height + gap) + 20;
    let max_value = entries.first().map(|(_, v)| *v).unwrap_or(0.0).max(1e-9);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{label_width}\" y=\"24\" font-size=\"16\" font-weight=\"bold\">\
         Blended feature importance (%)</text>\n"
    ));
    for (i, (name, value)) in entries.iter().enumerate() {
        let y = top + i * (bar_height + gap);
        let bar = (value / max_value * chart_width as f64).max(0.0);
        let text_y = y + bar_height / 2 + 5;
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{text_y}\" font-size=\"13\" text-anchor=\"end\">{name}</text>\n",
            label_width - 8
        ));
        svg.push_str(&format!(
            "  <rect x=\"{label_width}\" y=\"{y}\" width=\"{bar:.2}\" height=\"{bar_height}\" \
             fill=\"#3572a5\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{text_y}\" font-size=\"13\">{value:.2}%</text>\n",
            label_width as f64 + bar + 6.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
