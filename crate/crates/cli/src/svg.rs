//! Minimal static SVG line and stacked-area plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 40.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: &str, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            name: name.into(),
            points: xs.iter().copied().zip(ys.iter().copied()).collect(),
        }
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a (f64, f64)>) -> Self {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = (f64::INFINITY, f64::NEG_INFINITY);
        for &(a, b) in points.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x = (x.0.min(a), x.1.max(a));
            y = (y.0.min(b), y.1.max(b));
        }
        let widen = |r: (f64, f64)| {
            if !r.0.is_finite() {
                (0.0, 1.0)
            } else if r.1 - r.0 <= 1e-12 * (1.0 + r.0.abs()) {
                (r.0 - 0.5 * (1.0 + r.0.abs()), r.1 + 0.5 * (1.0 + r.1.abs()))
            } else {
                r
            }
        };
        let y = widen(y);
        let pad = 0.05 * (y.1 - y.0);
        Self {
            x: widen(x),
            y: (y.0 - pad, y.1 + pad),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_Y - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN_Y)
    }
}

fn header(out: &mut String, title: &str, x_label: &str, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_Y, MARGIN_Y);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = frame.x.0 + f * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + f * (frame.y.1 - frame.y.0);
        let (px, py) = (frame.px(xv), frame.py(yv));
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 15.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        0.5 * (x0 + x1),
        HEIGHT - 8.0,
        escape(x_label)
    );
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN_Y + 18.0 * i as f64;
        let x = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{:.2}" width="12" height="3" fill="{}"/><text x="{}" y="{:.2}">{}</text>"#,
            y - 2.0,
            COLORS[i % COLORS.len()],
            x + 18.0,
            y + 3.0,
            escape(name)
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Overlaid polylines.
pub fn line_plot(title: &str, x_label: &str, series: &[Series]) -> String {
    let frame = Frame::fit(series.iter().flat_map(|s| s.points.iter()));
    let mut out = String::new();
    header(&mut out, title, x_label, &frame);
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.join(" "),
            COLORS[i % COLORS.len()]
        );
    }
    legend(&mut out, &series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Stacked areas of nonnegative layers over a shared abscissa; the top edge
/// is the running total.
pub fn stacked_plot(title: &str, x_label: &str, xs: &[f64], layers: &[(&str, Vec<f64>)]) -> String {
    let mut cumulative = vec![vec![0.0; xs.len()]];
    for (_, ys) in layers {
        let prev = cumulative.last().expect("base layer");
        cumulative.push(prev.iter().zip(ys).map(|(a, b)| a + b).collect());
    }
    let all: Vec<(f64, f64)> = cumulative
        .iter()
        .flat_map(|c| xs.iter().copied().zip(c.iter().copied()))
        .collect();
    let frame = Frame::fit(all.iter());
    let mut out = String::new();
    header(&mut out, title, x_label, &frame);
    for i in 0..layers.len() {
        let (lo, hi) = (&cumulative[i], &cumulative[i + 1]);
        let mut pts: Vec<String> = xs
            .iter()
            .zip(hi)
            .map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        pts.extend(
            xs.iter()
                .zip(lo)
                .rev()
                .map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))),
        );
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{}" fill-opacity="0.6" stroke="none"/>"#,
            pts.join(" "),
            COLORS[i % COLORS.len()]
        );
    }
    legend(&mut out, &layers.iter().map(|l| l.0).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let s = line_plot(
            "e & h",
            "t",
            &[Series::new("e", &[0.0, 1.0], &[0.0, 2.0]), Series::new("h", &[0.0, 1.0], &[0.0, 3.0])],
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("e &amp; h"));
    }

    #[test]
    fn constant_series_does_not_divide_by_zero() {
        let s = line_plot("flat", "t", &[Series::new("c", &[0.0, 1.0], &[5.0, 5.0])]);
        assert!(!s.contains("NaN") && !s.contains("inf"));
    }

    #[test]
    fn stacked_top_is_total() {
        let s = stacked_plot("budget", "t", &[0.0, 1.0], &[("a", vec![1.0, 2.0]), ("b", vec![3.0, 2.0])]);
        assert_eq!(s.matches("<polygon").count(), 2);
    }
}
