//! Minimal line-plot SVG for a pair of KDE curves.

use std::fmt::Write;

use htscan_core::eval::KdeCurve;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

fn polyline(out: &mut String, curve: &KdeCurve, x0: f64, x1: f64, ymax: f64, color: &str) {
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y / ymax * (H - 2.0 * PAD);
    let pts: Vec<String> = curve.points.iter().map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1]))).collect();
    let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn kde_svg(disabled: &KdeCurve, triggered: &KdeCurve, title: &str) -> String {
    let first = disabled.points.first().map_or(0.0, |p| p[0]);
    let last = disabled.points.last().map_or(1.0, |p| p[0]);
    let (x0, x1) = if last > first { (first, last) } else { (first - 0.5, first + 0.5) };
    let ymax = disabled
        .points
        .iter()
        .chain(&triggered.points)
        .map(|p| p[1])
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#,
        top = PAD,
        bottom = H - PAD,
        right = W - PAD
    );
    polyline(&mut s, disabled, x0, x1, ymax, "#1f77b4");
    polyline(&mut s, triggered, x0, x1, ymax, "#d62728");
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{x0:.4e}</text>"#, H - PAD + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{x1:.4e}</text>"#, W - PAD, H - PAD + 16.0);
    let _ = writeln!(s, r##"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="#1f77b4">disabled</text>"##, W - PAD - 90.0, PAD);
    let _ = writeln!(s, r##"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="#d62728">triggered</text>"##, W - PAD - 90.0, PAD + 16.0);
    s.push_str("</svg>\n");
    s
}
