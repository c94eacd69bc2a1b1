//! Single-panel log–log SVG of median error against `N`.

use std::fmt::Write as _;

use crate::experiment::RateResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// Medians of the `H`-norm error as one polyline, the theoretical rate (anchored
/// at the first median) as a second, and the fitted line as a `<line>`.
pub fn render_svg(res: &RateResult) -> String {
    let pts: Vec<(f64, f64)> = res
        .summary
        .iter()
        .map(|s| (s.n as f64, s.median_h))
        .collect();
    let (x0, y0) = (pts[0].0.ln(), pts[0].1.ln());
    let theory: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(n, _)| (n, (y0 + res.fit_h.theoretical * (n.ln() - x0)).exp()))
        .collect();
    let fit_at = |n: f64| (res.fit_h.intercept + res.fit_h.slope * n.ln()).exp();
    let (nmin, nmax) = (pts[0].0, pts[pts.len() - 1].0);
    let fit = [(nmin, fit_at(nmin)), (nmax, fit_at(nmax))];

    let all = pts.iter().chain(&theory).chain(&fit);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, y) in all {
        lo = lo.min(y.ln());
        hi = hi.max(y.ln());
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let (lx, hx) = (nmin.ln(), nmax.ln().max(nmin.ln() + 1e-12));
    let sx = |n: f64| MARGIN + (n.ln() - lx) / (hx - lx) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y.ln() - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);
    let poly = |p: &[(f64, f64)]| {
        p.iter()
            .map(|&(n, y)| format!("{:.2},{:.2}", sx(n), sy(y)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m},{t} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">N (log scale)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" font-size="13" transform="rotate(-90 18 {})" text-anchor="middle">median H-norm error (log scale)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for s_row in &res.summary {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
            sx(s_row.n as f64),
            HEIGHT - MARGIN + 16.0,
            s_row.n
        );
    }
    let _ = writeln!(
        s,
        r##"<polyline class="empirical" points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        poly(&pts)
    );
    let _ = writeln!(
        s,
        r##"<polyline class="theoretical" points="{}" fill="none" stroke="#d62728" stroke-dasharray="6 4"/>"##,
        poly(&theory)
    );
    let _ = writeln!(
        s,
        r##"<line class="fitted" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#2ca02c"/>"##,
        sx(fit[0].0),
        sy(fit[0].1),
        sx(fit[1].0),
        sy(fit[1].1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-size="12">slope {:.3} (fitted), {:.3} (theory)</text>"#,
        MARGIN, res.fit_h.slope, res.fit_h.theoretical
    );
    s.push_str("</svg>\n");
    s
}
