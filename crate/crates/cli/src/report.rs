//! CSV tables and the log-log SVG plot.

use std::fmt::Write as _;

/// Fixed-width scientific form; identical inputs give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table held in memory until the run writer flushes it.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// Straight line `ln y = intercept + slope ln x` drawn over the fitted points.
#[derive(Debug, Clone, Copy)]
pub struct FitLine {
    pub slope: f64,
    pub intercept: f64,
    pub from: f64,
    pub to: f64,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

/// Log-log scatter of `(n, error)` with an optional fitted line and its
/// slope written in the corner. Non-positive errors are left out.
pub fn loglog_svg(title: &str, points: &[(f64, f64)], fit: Option<FitLine>) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && y.is_finite())
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    if pts.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">no positive errors</text>"#,
            W / 2.0,
            H / 2.0
        );
        s.push_str("</svg>\n");
        return s;
    }

    let lx: Vec<f64> = pts.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.log10()).collect();
    let (x0, x1) = padded_range(&lx, 0.1);
    let (y0, y1) = (
        ly.iter().copied().fold(f64::INFINITY, f64::min).floor(),
        ly.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil(),
    );
    let (y0, y1) = if y1 > y0 { (y0, y1) } else { (y0 - 1.0, y1 + 1.0) };
    let px = |v: f64| LEFT + (v - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |v: f64| H - BOTTOM - (v - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    // frame and axes
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for (i, &x) in pts.iter().map(|p| &p.0).enumerate() {
        let cx = px(lx[i]);
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{}" x2="{cx:.2}" y2="{}" stroke="black"/>"#,
            H - BOTTOM,
            H - BOTTOM + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{x}</text>"#,
            H - BOTTOM + 18.0
        );
    }
    let mut e = y0 as i32;
    while e as f64 <= y1 {
        let cy = py(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{cy:.2}" x2="{}" y2="{cy:.2}" stroke="#ddd"/>"##,
            W - RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#,
            LEFT - 6.0,
            cy + 4.0
        );
        e += 1;
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">slices n</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">abs error</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0
    );

    if let Some(f) = fit {
        let ln10 = std::f64::consts::LN_10;
        let at = |x: f64| (f.intercept + f.slope * x.ln()) / ln10;
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c03020" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
            px(f.from.log10()),
            py(at(f.from)),
            px(f.to.log10()),
            py(at(f.to))
        );
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="end" fill="#c03020">slope = {:.4}</text>"##,
            W - RIGHT - 8.0,
            TOP + 18.0,
            f.slope
        );
    }
    for i in 0..pts.len() {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#1f4e9c"/>"##,
            px(lx[i]),
            py(ly[i])
        );
    }
    s.push_str("</svg>\n");
    s
}

fn padded_range(v: &[f64], pad: f64) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1.0);
    (lo - pad * span, hi + pad * span)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
