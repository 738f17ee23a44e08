use std::fmt::Write as _;

use crate::metrics::SimTrace;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const MAX_POINTS: usize = 2000;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Frequency deviation against time, one polyline per trace.
pub fn frequency_plot_svg(series: &[(&str, &SimTrace)]) -> String {
    let (mut t0, mut t1, mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for (_, tr) in series {
        for (&t, &e) in tr.t.iter().zip(&tr.f_err) {
            t0 = t0.min(t);
            t1 = t1.max(t);
            lo = lo.min(e);
            hi = hi.max(e);
        }
    }
    if !(t1 > t0) {
        t0 = 0.0;
        t1 = 1.0;
    }
    if hi - lo < 1e-9 {
        lo -= 0.05;
        hi += 0.05;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |t: f64| MARGIN + (t - t0) / (t1 - t0) * (WIDTH - 2.0 * MARGIN);
    let y = |e: f64| HEIGHT - MARGIN - (e - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
        y(0.0),
        WIDTH - MARGIN,
        y(0.0)
    );
    for (v, anchor) in [(hi, y(hi)), (0.0, y(0.0)), (lo, y(lo))] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            MARGIN - 6.0,
            anchor + 4.0
        );
    }
    for (v, anchor) in [(t0, x(t0)), (t1, x(t1))] {
        let _ = writeln!(
            s,
            r#"<text x="{anchor:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"#,
            HEIGHT - MARGIN + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time (s)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" transform="rotate(-90 15 {:.2})" text-anchor="middle">frequency deviation (Hz)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (i, (name, tr)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let stride = tr.len().div_ceil(MAX_POINTS).max(1);
        let mut pts = String::new();
        for k in (0..tr.len()).step_by(stride) {
            let _ = write!(pts, "{:.2},{:.2} ", x(tr.t[k]), y(tr.f_err[k]));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        );
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
            WIDTH - MARGIN - 150.0,
            WIDTH - MARGIN - 130.0,
            WIDTH - MARGIN - 124.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_has_one_polyline_per_series() {
        let a = SimTrace::from_error(vec![0.0, 1.0, 2.0], vec![0.0, -0.3, 0.1]);
        let b = SimTrace::from_error(vec![0.0, 1.0, 2.0], vec![0.0, -0.1, 0.0]);
        let svg = frequency_plot_svg(&[("a", &a), ("b", &b)]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.ends_with("</svg>\n"));
    }
}
