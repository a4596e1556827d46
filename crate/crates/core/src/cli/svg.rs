//! Minimal deterministic SVG charts: line/point plots with linear or log
//! axes, and filled triangle heatmaps.

use std::fmt::Write;

use crate::geometry::{Mesh, Point};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    scale: Scale,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, scale: Scale) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            let v = match scale {
                Scale::Linear => v,
                Scale::Log if v > 0.0 => v.log10(),
                Scale::Log => continue,
            };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            lo -= 0.5;
            hi += 0.5;
        }
        if scale == Scale::Log {
            lo = lo.floor();
            hi = hi.ceil();
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Axis { scale, lo, hi }
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let v = match self.scale {
            Scale::Linear => v,
            Scale::Log if v > 0.0 => v.log10(),
            Scale::Log => return None,
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match self.scale {
            Scale::Log => {
                let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i64;
                let mut out = Vec::new();
                let mut e = self.lo as i64;
                while e as f64 <= self.hi {
                    out.push(((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")));
                    e += step;
                }
                out
            }
            Scale::Linear => {
                let raw = (self.hi - self.lo) / 6.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0]
                    .iter()
                    .map(|f| f * mag)
                    .find(|s| *s >= raw)
                    .unwrap_or(10.0 * mag);
                let digits = (-step.log10().floor()).max(0.0) as usize;
                let mut out = Vec::new();
                let mut k = (self.lo / step).ceil();
                while k * step <= self.hi + 1e-9 * step {
                    let v = k * step;
                    out.push(((v - self.lo) / (self.hi - self.lo), format!("{:.*}", digits, v + 0.0)));
                    k += 1.0;
                }
                out
            }
        }
    }
}

pub struct Series {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub line: bool,
    pub points: bool,
    pub color: &'static str,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn render(&self) -> String {
        let xa = Axis::fit(self.series.iter().flat_map(|s| s.x.iter().copied()), self.x_scale);
        let ya = Axis::fit(self.series.iter().flat_map(|s| s.y.iter().copied()), self.y_scale);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |u: f64| LEFT + u * pw;
        let py = |u: f64| TOP + (1.0 - u) * ph;
        let mut out = String::new();
        header(&mut out, &self.title);
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (u, label) in xa.ticks() {
            let x = px(u);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 18.0
            );
        }
        for (u, label) in ya.ticks() {
            let y = py(u);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for s in &self.series {
            let pts: Vec<(f64, f64)> = s
                .x
                .iter()
                .zip(&s.y)
                .filter_map(|(&x, &y)| Some((px(xa.unit(x)?), py(ya.unit(y)?))))
                .collect();
            if s.line && pts.len() > 1 {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    s.color,
                    path.join(" ")
                );
            }
            if s.points {
                for (x, y) in &pts {
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}"/>"#, s.color);
                }
            }
        }
        for (i, note) in self.notes.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                LEFT + 10.0,
                TOP + 18.0 + 16.0 * i as f64,
                escape(note)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Blue-white-red colour for `t` in `[-1, 1]`.
fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (1.0, 1.0 - t, 1.0 - t)
    } else {
        (1.0 + t, 1.0 + t, 1.0)
    };
    let c = |v: f64| (255.0 * v).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

/// Heatmap of piecewise-linear vertex values with the zero level set
/// drawn in black.
pub fn heatmap(mesh: &Mesh, values: &[f64], title: &str) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &mesh.vertices {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let pw = WIDTH - 2.0 * RIGHT;
    let ph = HEIGHT - TOP - RIGHT;
    let s = (pw / (x1 - x0)).min(ph / (y1 - y0));
    let ox = RIGHT + 0.5 * (pw - s * (x1 - x0));
    let oy = TOP + 0.5 * (ph - s * (y1 - y0));
    let map = |p: Point| (ox + s * (p[0] - x0), oy + s * (y1 - p[1]));
    let vmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut out = String::new();
    header(&mut out, title);
    for t in &mesh.triangles {
        let v = (values[t[0]] + values[t[1]] + values[t[2]]) / (3.0 * vmax);
        let c: Vec<String> = t
            .iter()
            .map(|&i| {
                let (x, y) = map(mesh.vertices[i]);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let fill = diverging(v);
        let _ = writeln!(out, r#"<polygon points="{}" fill="{fill}" stroke="{fill}" stroke-width="0.3"/>"#, c.join(" "));
    }
    for t in &mesh.triangles {
        let mut cut = Vec::new();
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let (va, vb) = (values[a], values[b]);
            if (va < 0.0) != (vb < 0.0) {
                let w = va / (va - vb);
                let pa = mesh.vertices[a];
                let pb = mesh.vertices[b];
                cut.push([pa[0] + w * (pb[0] - pa[0]), pa[1] + w * (pb[1] - pa[1])]);
            }
        }
        if cut.len() == 2 {
            let (xa, ya) = map(cut[0]);
            let (xb, yb) = map(cut[1]);
            let _ = writeln!(
                out,
                r#"<line x1="{xa:.2}" y1="{ya:.2}" x2="{xb:.2}" y2="{yb:.2}" stroke="black" stroke-width="1.2"/>"#
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_ticks_are_decades() {
        let a = Axis::fit([1e-15, 0.5].into_iter(), Scale::Log);
        assert_eq!((a.lo, a.hi), (-15.0, 0.0));
        assert!(a.ticks().iter().all(|(_, l)| l.starts_with("1e")));
    }

    #[test]
    fn colours_span_the_palette() {
        assert_eq!(diverging(1.0), "#ff0000");
        assert_eq!(diverging(-1.0), "#0000ff");
        assert_eq!(diverging(0.0), "#ffffff");
    }
}
