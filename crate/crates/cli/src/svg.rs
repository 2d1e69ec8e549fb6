//! Static SVG rendering of a k-scan.

use std::fmt::Write;

use evcond::ScanCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn points(xs: &[f64], ys: &[f64], x_range: (f64, f64), y_max: f64) -> String {
    let sx = |x: f64| {
        let span = (x_range.1 - x_range.0).max(f64::MIN_POSITIVE);
        MARGIN + (x - x_range.0) / span * (WIDTH - 2.0 * MARGIN)
    };
    let sy = |y: f64| HEIGHT - MARGIN - y / y_max * (HEIGHT - 2.0 * MARGIN);
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// The statistic (solid) and, when present, the critical value (dashed) against `k`.
pub fn render_scan(curve: &ScanCurve) -> String {
    let ks: Vec<f64> = curve.entries.iter().map(|e| e.k as f64).collect();
    let stats: Vec<f64> = curve.entries.iter().map(|e| e.statistic).collect();
    let quants: Option<Vec<f64>> = curve.entries.iter().map(|e| e.quantile).collect();
    let x_range = (ks.first().copied().unwrap_or(0.0), ks.last().copied().unwrap_or(1.0));
    let y_max = stats
        .iter()
        .chain(quants.iter().flatten())
        .fold(0.0f64, |m, &v| m.max(v))
        .max(1e-12)
        * 1.1;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(s, r#"  <line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"  <line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"  <text x="{}" y="{}" font-size="12" text-anchor="middle">k</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"  <text x="{x0}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        y0 + 15.0,
        x_range.0
    );
    let _ = writeln!(
        s,
        r#"  <text x="{x1}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        y0 + 15.0,
        x_range.1
    );
    let _ = writeln!(
        s,
        r#"  <text x="{}" y="{}" font-size="11" text-anchor="end">{y_max:.3}</text>"#,
        x0 - 4.0,
        y1 + 4.0
    );
    let _ = writeln!(
        s,
        r#"  <polyline class="statistic" fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
        points(&ks, &stats, x_range, y_max)
    );
    if let Some(q) = &quants {
        let _ = writeln!(
            s,
            r#"  <polyline class="quantile" fill="none" stroke="gray" stroke-width="1.5" stroke-dasharray="6 4" points="{}"/>"#,
            points(&ks, q, x_range, y_max)
        );
    }
    s.push_str("</svg>\n");
    s
}
