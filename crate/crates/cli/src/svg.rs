//! Minimal SVG: a framed plot area with end-point tick labels, polylines and
//! marching-squares contours. Output depends only on the data.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Frame {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let (lo, hi) = self.x;
        let t = if hi > lo { (x - lo) / (hi - lo) } else { 0.5 };
        LEFT + t * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.y;
        let t = if hi > lo { (y - lo) / (hi - lo) } else { 0.5 };
        H - BOTTOM - t * (H - TOP - BOTTOM)
    }

    fn open(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 15.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(&self.y_label)
        );
        for (v, anchor) in [(self.x.0, "start"), (self.x.1, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{}</text>"#,
                self.px(v),
                y1 + 16.0,
                tick(v)
            );
        }
        for v in [self.y.0, self.y.1] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                self.py(v) + 4.0,
                tick(v)
            );
        }
        s
    }
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Named polylines; non-finite points break the line.
pub fn line_plot(frame: &Frame, series: &[(&str, Vec<(f64, f64)>)], hlines: &[(&str, f64)]) -> String {
    let mut s = frame.open();
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in pts {
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let y = y.clamp(frame.y.0, frame.y.1);
            let _ = write!(
                d,
                "{}{:.2},{:.2} ",
                if pen_down { "L" } else { "M" },
                frame.px(x),
                frame.py(y)
            );
            pen_down = true;
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - RIGHT - 120.0,
            TOP + 16.0 * (i + 1) as f64,
            esc(name)
        );
    }
    for (name, y) in hlines {
        let py = frame.py(*y);
        let _ = writeln!(
            s,
            r#"<path d="M{:.2},{py:.2} L{:.2},{py:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
            LEFT,
            W - RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" fill="gray">{}</text>"#,
            LEFT + 4.0,
            py - 4.0,
            esc(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

type Segment = ((f64, f64), (f64, f64));

/// Marching-squares segments of `field = level`. `field[i + nx * j]` sits at
/// `(xs[i], ys[j])`; cells touching a NaN are skipped.
pub fn contour_segments(xs: &[f64], ys: &[f64], field: &[f64], level: f64) -> Vec<Segment> {
    let nx = xs.len();
    let at = |i: usize, j: usize| field[i + nx * j];
    let mut out = Vec::new();
    for j in 0..ys.len().saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let v = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let c = [
                (xs[i], ys[j]),
                (xs[i + 1], ys[j]),
                (xs[i + 1], ys[j + 1]),
                (xs[i], ys[j + 1]),
            ];
            let above: Vec<bool> = v.iter().map(|&x| x > level).collect();
            // edges: bottom, right, top, left
            let mut cross = [None; 4];
            for (a, slot) in cross.iter_mut().enumerate() {
                let b = (a + 1) % 4;
                if above[a] != above[b] {
                    let t = (level - v[a]) / (v[b] - v[a]);
                    *slot = Some((c[a].0 + t * (c[b].0 - c[a].0), c[a].1 + t * (c[b].1 - c[a].1)));
                }
            }
            let pts: Vec<(usize, (f64, f64))> = cross
                .iter()
                .enumerate()
                .filter_map(|(e, p)| p.map(|p| (e, p)))
                .collect();
            match pts.len() {
                2 => out.push((pts[0].1, pts[1].1)),
                4 => {
                    let centre_above = v.iter().sum::<f64>() / 4.0 > level;
                    let p = |e: usize| cross[e].expect("all edges cross");
                    if centre_above == above[0] {
                        out.push((p(0), p(1)));
                        out.push((p(2), p(3)));
                    } else {
                        out.push((p(3), p(0)));
                        out.push((p(1), p(2)));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Contours of a gridded field at several levels.
pub fn contour_plot(frame: &Frame, xs: &[f64], ys: &[f64], field: &[f64], levels: &[f64]) -> String {
    let mut s = frame.open();
    for (k, &level) in levels.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        for ((x0, y0), (x1, y1)) in contour_segments(xs, ys, field, level) {
            let _ = write!(
                d,
                "M{:.2},{:.2} L{:.2},{:.2} ",
                frame.px(x0),
                frame.py(y0),
                frame.px(x1),
                frame.py(y1)
            );
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>level {level}</title></path>"#,
            d.trim_end()
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_contour_stays_on_circle() {
        let xs: Vec<f64> = (0..41).map(|i| -1.0 + 0.05 * i as f64).collect();
        let field: Vec<f64> = xs
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| x * x + y * y))
            .collect();
        let segs = contour_segments(&xs, &xs, &field, 0.5);
        assert!(segs.len() > 20);
        for ((x0, y0), (x1, y1)) in segs {
            for r2 in [x0 * x0 + y0 * y0, x1 * x1 + y1 * y1] {
                assert!((r2 - 0.5).abs() < 0.01, "{r2}");
            }
        }
    }

    #[test]
    fn nan_cells_are_skipped() {
        let xs = [0.0, 1.0];
        assert!(contour_segments(&xs, &xs, &[0.0, 1.0, f64::NAN, 1.0], 0.5).is_empty());
        assert_eq!(contour_segments(&xs, &xs, &[0.0, 1.0, 0.0, 1.0], 0.5).len(), 1);
        assert_eq!(contour_segments(&xs, &xs, &[0.0, 1.0, 1.0, 0.0], 0.5).len(), 2);
    }
}
