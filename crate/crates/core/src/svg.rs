//! Per-segment attribute profile rendered as SVG.
//!
//! One horizontal band per attribute, x = path chainage in meters, each
//! segment drawn as a bar shaded by its class. Output is byte-stable for a
//! given report.

use std::fmt::Write;

use crate::scale::{Attribute, ComplexityReport};

const LEFT: f64 = 100.0;
const TOP: f64 = 30.0;
const PLOT_WIDTH: f64 = 700.0;
const BAND: f64 = 36.0;
const GAP: f64 = 6.0;

/// Colorblind-safe sequential ramp, class 1 (light) to class 5 (dark).
const RAMP: [&str; 5] = ["#fee5d9", "#fcae91", "#fb6a4a", "#de2d26", "#a50f15"];

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn tick_step(length: f64) -> f64 {
    let raw = length / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag)
}

pub fn profile_svg(report: &ComplexityReport, title: &str) -> String {
    let length = report.segments.last().map_or(0.0, |s| s.end_chainage).max(1e-9);
    let scale = PLOT_WIDTH / length;
    let bands = Attribute::ALL.len() as f64;
    let axis_y = TOP + bands * (BAND + GAP);
    let height = axis_y + 40.0;
    let width = LEFT + PLOT_WIDTH + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        num(width),
        num(height),
        num(width),
        num(height)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" font-size="13">{} (overall class {}, mean {})</text>"#,
        num(LEFT),
        escape(title),
        report.overall_class.value(),
        num(report.aggregate_mean)
    );
    for (row, &attr) in Attribute::ALL.iter().enumerate() {
        let y = TOP + row as f64 * (BAND + GAP);
        let _ = writeln!(s, r#"<g class="band" data-attribute="{}">"#, attr.name());
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, num(LEFT - 8.0), num(y + BAND / 2.0 + 4.0), attr.name());
        for seg in &report.segments {
            let class = seg.class_of(attr).value();
            let x0 = LEFT + seg.start_chainage * scale;
            let w = (seg.end_chainage - seg.start_chainage) * scale;
            let _ = writeln!(
                s,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="#ffffff" data-segment="{}" data-class="{}"/>"##,
                num(x0),
                num(y),
                num(w),
                num(BAND),
                RAMP[usize::from(class - 1)],
                seg.index,
                class
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, num(x0 + w / 2.0), num(y + BAND / 2.0 + 4.0), class);
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\"/>",
        num(LEFT),
        num(axis_y),
        num(LEFT + PLOT_WIDTH),
        num(axis_y)
    );
    let step = tick_step(length);
    let mut k = 0;
    loop {
        let c = k as f64 * step;
        if c > length + 1e-9 {
            break;
        }
        let x = LEFT + c * scale;
        let _ = writeln!(s, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\"/>", num(x), num(axis_y), num(x), num(axis_y + 4.0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, num(x), num(axis_y + 16.0), num(c));
        k += 1;
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">chainage (m)</text>"#,
        num(LEFT + PLOT_WIDTH / 2.0),
        num(axis_y + 32.0)
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
