//! Deterministic SVG bar charts for benchmark summaries. Pure string
//! assembly so identical inputs always produce identical bytes.

use frontis_core::eval::Summary;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub summary: Summary,
}

const BAR_COLORS: [&str; 2] = ["#4878a8", "#b8860b"];

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Grouped bars (success rate and SPL) per series, values annotated above
/// each bar.
pub fn render_summary_svg(series: &[Series]) -> String {
    let group_w = 140.0;
    let margin = 60.0;
    let plot_h = 220.0;
    let width = margin * 2.0 + group_w * series.len().max(1) as f64;
    let height = plot_h + 80.0;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // y axis with gridlines at 0.25 intervals
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let y = 20.0 + plot_h * (1.0 - frac);
        svg.push_str(&format!(
            "<line x1=\"{margin}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#ddd\"/>\n",
            width - margin
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            margin - 6.0,
            y + 4.0,
            fmt(frac)
        ));
    }
    for (si, s) in series.iter().enumerate() {
        let x0 = margin + group_w * si as f64 + 20.0;
        for (bi, (name, value)) in
            [("SR", s.summary.sr), ("SPL", s.summary.spl)].iter().enumerate()
        {
            let bw = 40.0;
            let x = x0 + bi as f64 * (bw + 10.0);
            let h = plot_h * value.clamp(0.0, 1.0);
            let y = 20.0 + plot_h - h;
            svg.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{bw}\" height=\"{h}\" fill=\"{}\"/>\n",
                BAR_COLORS[bi % BAR_COLORS.len()]
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                x + bw / 2.0,
                y - 4.0,
                fmt(*value)
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{name}</text>\n",
                x + bw / 2.0,
                20.0 + plot_h + 16.0
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{} (n={})</text>\n",
            x0 + 45.0,
            20.0 + plot_h + 34.0,
            s.label,
            s.summary.episodes
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
