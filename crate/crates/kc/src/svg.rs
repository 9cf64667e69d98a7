//! Minimal grouped-bar SVG rendering for sweep reports: one group per run
//! label, three bars (precision, recall, F1), fixed [0, 1] axis. The
//! output is deterministic, self-contained markup with no scripting.

use kc_core::EvalReport;

const BAR_WIDTH: f64 = 28.0;
const BAR_GAP: f64 = 6.0;
const GROUP_GAP: f64 = 34.0;
const PLOT_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 52.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 42.0;
const MARGIN_RIGHT: f64 = 18.0;

const SERIES: [(&str, &str); 3] =
    [("precision", "#4878cf"), ("recall", "#6acc65"), ("f1", "#d65f5f")];

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}

/// Renders the grouped-bar chart. Values are clamped to [0, 1] so a
/// malformed report cannot draw outside the plot area.
pub fn render_svg(reports: &[EvalReport]) -> String {
    let group_width = 3.0 * BAR_WIDTH + 2.0 * BAR_GAP;
    let groups = reports.len().max(1) as f64;
    let width = MARGIN_LEFT + groups * (group_width + GROUP_GAP) + MARGIN_RIGHT;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;
    let baseline = MARGIN_TOP + PLOT_HEIGHT;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    ));

    // Horizontal gridlines and axis labels at 0, 0.25, …, 1.
    for step in 0..=4 {
        let value = step as f64 / 4.0;
        let y = baseline - value * PLOT_HEIGHT;
        svg.push_str(&format!(
            "  <line x1=\"{MARGIN_LEFT:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            width - MARGIN_RIGHT
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" fill=\"#444444\">{value:.2}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT:.1}\" y1=\"{MARGIN_TOP:.1}\" x2=\"{MARGIN_LEFT:.1}\" \
         y2=\"{baseline:.1}\" stroke=\"#444444\" stroke-width=\"1\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT:.1}\" y1=\"{baseline:.1}\" x2=\"{:.1}\" y2=\"{baseline:.1}\" \
         stroke=\"#444444\" stroke-width=\"1\"/>\n",
        width - MARGIN_RIGHT
    ));

    // Legend.
    let mut legend_x = MARGIN_LEFT;
    for (name, color) in SERIES {
        svg.push_str(&format!(
            "  <rect x=\"{legend_x:.1}\" y=\"14\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"24\" fill=\"#222222\">{name}</text>\n",
            legend_x + 16.0
        ));
        legend_x += 90.0;
    }

    // Bars.
    for (index, report) in reports.iter().enumerate() {
        let group_x = MARGIN_LEFT + GROUP_GAP / 2.0 + index as f64 * (group_width + GROUP_GAP);
        let values = [report.micro.precision, report.micro.recall, report.micro.f1];
        for (series_index, (series, value)) in SERIES.iter().zip(values).enumerate() {
            let clamped = value.clamp(0.0, 1.0);
            let bar_height = clamped * PLOT_HEIGHT;
            let x = group_x + series_index as f64 * (BAR_WIDTH + BAR_GAP);
            let y = baseline - bar_height;
            svg.push_str(&format!(
                "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{BAR_WIDTH:.1}\" \
                 height=\"{bar_height:.1}\" fill=\"{}\"><title>{}: {clamped:.3}</title></rect>\n",
                series.1,
                escape(&report.label),
            ));
        }
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#222222\">{}</text>\n",
            group_x + group_width / 2.0,
            baseline + 18.0,
            escape(&report.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use kc_core::{aggregate, CompareMode, Metrics, SampleScore, TripleCounts};
    use std::collections::BTreeMap;

    fn report(label: &str, tp: u64, fp: u64, fn_: u64) -> EvalReport {
        let score = SampleScore {
            sample_id: "s".into(),
            counts: TripleCounts::new(tp, fp, fn_),
            per_concept: BTreeMap::new(),
            parse_failed: false,
        };
        aggregate(vec![score], label, CompareMode::NameKeyed, "0".repeat(16).as_str()).unwrap()
    }

    /// Tiny well-formedness check: every opened tag is closed or
    /// self-closing, quotes are balanced per attribute, nesting matches.
    fn assert_well_formed(svg: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = svg;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').map(|e| start + e).expect("unclosed tag");
            let tag = &rest[start + 1..end];
            if let Some(name) = tag.strip_prefix('/') {
                let open = stack.pop().unwrap_or_else(|| panic!("stray closer {name}"));
                assert_eq!(open, name, "mismatched nesting");
            } else if !tag.ends_with('/') {
                let name: String =
                    tag.chars().take_while(|c| c.is_ascii_alphanumeric()).collect();
                stack.push(name);
            }
            rest = &rest[end + 1..];
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    #[test]
    fn chart_is_well_formed_and_contains_every_group() {
        let reports = vec![
            report("k=2", 1, 1, 1),
            report("k=4", 3, 1, 1),
            report("k=8", 9, 0, 0),
        ];
        let svg = render_svg(&reports);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_well_formed(&svg);
        // One label text per group plus 9 value bars plus legend swatches.
        assert_eq!(svg.matches("k=2").count(), 4, "3 bar titles + 1 axis label");
        assert_eq!(svg.matches("<rect").count(), 1 + 3 + 9, "bg + legend + bars");
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_svg(&[report("a<b&c\"d", 1, 0, 0)]);
        assert!(svg.contains("a&lt;b&amp;c&quot;d"));
        assert!(!svg.contains("a<b&c"));
        assert_well_formed(&svg);
    }

    #[test]
    fn bar_heights_track_the_metrics() {
        let half = report("half", 1, 1, 1); // P=0.5, R=0.5, F1=0.5
        assert_eq!(half.micro, Metrics { precision: 0.5, recall: 0.5, f1: 0.5 });
        let svg = render_svg(&[half]);
        // Half of PLOT_HEIGHT.
        assert!(svg.contains("height=\"130.0\""));
        let perfect = report("full", 4, 0, 0);
        let svg = render_svg(&[perfect]);
        assert!(svg.contains("height=\"260.0\""));
    }

    #[test]
    fn empty_report_list_still_renders_axes() {
        let svg = render_svg(&[]);
        assert!(svg.starts_with("<svg "));
        assert_well_formed(&svg);
    }
}
