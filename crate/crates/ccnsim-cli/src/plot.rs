//! Minimal self-contained SVG emission: box plots over labeled samples
//! and time-series line plots with optional vertical marks.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

struct Frame {
    svg: String,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(title: &str, y_label: &str, y_min: f64, y_max: f64) -> Frame {
        let mut svg = String::new();
        let _ = write!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = write!(
            svg,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let _ = write!(
            svg,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(y_label)
        );
        let mut frame = Frame { svg, y_min, y_max };
        // axes and horizontal gridlines with tick labels
        frame.line(MARGIN_L, MARGIN_T, MARGIN_L, HEIGHT - MARGIN_B, "black", 1.0);
        frame.line(
            MARGIN_L,
            HEIGHT - MARGIN_B,
            WIDTH - MARGIN_R,
            HEIGHT - MARGIN_B,
            "black",
            1.0,
        );
        for i in 0..=4 {
            let v = y_min + (y_max - y_min) * i as f64 / 4.0;
            let y = frame.y(v);
            if i > 0 {
                frame.line(MARGIN_L, y, WIDTH - MARGIN_R, y, "#dddddd", 0.5);
            }
            let _ = write!(
                frame.svg,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN_L - 6.0,
                y + 4.0,
                trim_float(v)
            );
        }
        frame
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(f64::MIN_POSITIVE);
        HEIGHT - MARGIN_B - (v - self.y_min) / span * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = write!(
            self.svg,
            r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn trim_float(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        hi = lo + 1.0;
    }
    let pad = (hi - lo) * 0.08;
    ((lo - pad).min(0.0_f64.min(lo)), hi + pad)
}

/// One box (min whisker, quartile box with median, max whisker) per
/// labeled sample.
pub fn box_plot(title: &str, y_label: &str, series: &[(String, Vec<f64>)]) -> String {
    assert!(!series.is_empty() && series.iter().all(|(_, v)| !v.is_empty()));
    let (y_min, y_max) = bounds(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let mut f = Frame::new(title, y_label, y_min, y_max);

    let slot = (WIDTH - MARGIN_L - MARGIN_R) / series.len() as f64;
    for (i, (label, values)) in series.iter().enumerate() {
        let cx = MARGIN_L + slot * (i as f64 + 0.5);
        let half = (slot * 0.3).min(40.0);
        let (q1, med, q3) = crate::aggregate::quartiles(values);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        f.line(cx, f.y(lo), cx, f.y(q1), "black", 1.0);
        f.line(cx, f.y(q3), cx, f.y(hi), "black", 1.0);
        f.line(cx - half / 2.0, f.y(lo), cx + half / 2.0, f.y(lo), "black", 1.0);
        f.line(cx - half / 2.0, f.y(hi), cx + half / 2.0, f.y(hi), "black", 1.0);
        let _ = write!(
            f.svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#9ecae1" stroke="black"/>"##,
            cx - half,
            f.y(q3),
            2.0 * half,
            (f.y(q1) - f.y(q3)).max(0.5)
        );
        f.line(cx - half, f.y(med), cx + half, f.y(med), "black", 2.0);
        let _ = write!(
            f.svg,
            r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_B + 18.0,
            escape(label)
        );
    }
    f.finish()
}

/// Polyline of (x, y) points, with dashed vertical marks (e.g. phase
/// boundaries) at the given x positions.
pub fn line_plot(
    title: &str,
    y_label: &str,
    points: &[(f64, f64)],
    marks: &[f64],
) -> String {
    assert!(!points.is_empty());
    let (y_min, y_max) = bounds(points.iter().map(|&(_, y)| y));
    let x_min = points.first().unwrap().0;
    let x_max = points.last().unwrap().0.max(x_min + 1.0);
    let mut f = Frame::new(title, y_label, y_min, y_max);

    let x_of =
        |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
    for &m in marks {
        if (x_min..=x_max).contains(&m) {
            let _ = write!(
                f.svg,
                r##"<line x1="{0:.1}" y1="{1}" x2="{0:.1}" y2="{2}" stroke="#d62728" stroke-dasharray="4 3"/>"##,
                x_of(m),
                MARGIN_T,
                HEIGHT - MARGIN_B
            );
        }
    }
    let mut path = String::new();
    for &(x, y) in points {
        let _ = write!(path, "{:.1},{:.1} ", x_of(x), f.y(y));
    }
    let _ = write!(
        f.svg,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
        path.trim_end()
    );
    for i in 0..=4 {
        let x = x_min + (x_max - x_min) * i as f64 / 4.0;
        let _ = write!(
            f.svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x_of(x),
            HEIGHT - MARGIN_B + 18.0,
            trim_float(x)
        );
    }
    f.finish()
}
