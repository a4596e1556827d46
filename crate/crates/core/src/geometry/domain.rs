use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use super::{GeometryError, Point, Result};

/// Rigid motion `x -> Rot(angle) x + shift`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Placement {
    pub angle: f64,
    pub shift: Point,
}

impl Default for Placement {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Placement {
    pub const IDENTITY: Placement = Placement {
        angle: 0.0,
        shift: [0.0, 0.0],
    };

    pub fn new(angle: f64, shift: Point) -> Self {
        Self { angle, shift }
    }

    pub fn is_identity(&self) -> bool {
        self.angle == 0.0 && self.shift == [0.0, 0.0]
    }

    pub fn rotate_vector(&self, v: Point) -> Point {
        if self.angle == 0.0 {
            return v;
        }
        let (s, c) = self.angle.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    pub fn apply(&self, p: Point) -> Point {
        let q = self.rotate_vector(p);
        [q[0] + self.shift[0], q[1] + self.shift[1]]
    }

    pub fn inverse_apply(&self, p: Point) -> Point {
        let v = [p[0] - self.shift[0], p[1] - self.shift[1]];
        if self.angle == 0.0 {
            return v;
        }
        let (s, c) = self.angle.sin_cos();
        [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &Placement) -> Placement {
        Placement {
            angle: self.angle + other.angle,
            shift: other.apply(self.shift),
        }
    }
}

/// Body-frame shape. Smooth shapes are centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// Rectangle `[-half_length, half_length] x [-radius, radius]` capped by half disks.
    Stadium { half_length: f64, radius: f64 },
    /// Counterclockwise simple polygon.
    Polygon { vertices: Vec<Point> },
    /// `|x/a|^p + |y/b|^p <= 1`.
    Superellipse { a: f64, b: f64, p: f64 },
}

/// A validated planar domain: a shape placed by a rigid motion.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    shape: Shape,
    placement: Placement,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(GeometryError::Dimension { name, value })
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let p = v[i];
            let q = v[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test, touching and collinear overlap included.
pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn validate_polygon(mut v: Vec<Point>) -> Result<Vec<Point>> {
    for p in &v {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(GeometryError::Dimension {
                name: "vertex",
                value: f64::NAN,
            });
        }
    }
    v.dedup();
    while v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    let n = v.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices(n));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b) = (v[i], v[(i + 1) % n]);
            let (c, d) = (v[j], v[(j + 1) % n]);
            if adjacent {
                // adjacent edges may only share their common vertex
                let (far_ij, far_ji) = if j == i + 1 { (d, a) } else { (c, b) };
                let on_ab = orient(a, b, far_ij) == 0.0 && on_segment(a, b, far_ij);
                let on_cd = orient(c, d, far_ji) == 0.0 && on_segment(c, d, far_ji);
                if on_ab || on_cd {
                    return Err(GeometryError::SelfIntersection(i, j));
                }
            } else if segments_intersect(a, b, c, d) {
                return Err(GeometryError::SelfIntersection(i, j));
            }
        }
    }
    let area = signed_area(&v);
    if area == 0.0 {
        return Err(GeometryError::Degenerate);
    }
    if area < 0.0 {
        v.reverse();
    }
    Ok(v)
}

impl Domain {
    /// Validate `shape` and place it.
    pub fn new(shape: Shape, placement: Placement) -> Result<Self> {
        let shape = match shape {
            Shape::Disk { radius } => {
                positive("radius", radius)?;
                Shape::Disk { radius }
            }
            Shape::Ellipse { a, b } => {
                positive("a", a)?;
                positive("b", b)?;
                Shape::Ellipse { a, b }
            }
            Shape::Stadium { half_length, radius } => {
                positive("half_length", half_length)?;
                positive("radius", radius)?;
                Shape::Stadium { half_length, radius }
            }
            Shape::Superellipse { a, b, p } => {
                positive("a", a)?;
                positive("b", b)?;
                if !(p.is_finite() && p >= 2.0) {
                    return Err(GeometryError::Exponent(p));
                }
                Shape::Superellipse { a, b, p }
            }
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: validate_polygon(vertices)?,
            },
        };
        if !(placement.angle.is_finite() && placement.shift.iter().all(|s| s.is_finite())) {
            return Err(GeometryError::Dimension {
                name: "placement",
                value: f64::NAN,
            });
        }
        Ok(Self { shape, placement })
    }

    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        Self::new(Shape::Disk { radius }, Placement::new(0.0, center))
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b }, Placement::IDENTITY)
    }

    pub fn stadium(half_length: f64, radius: f64) -> Result<Self> {
        Self::new(Shape::Stadium { half_length, radius }, Placement::IDENTITY)
    }

    pub fn superellipse(a: f64, b: f64, p: f64) -> Result<Self> {
        Self::new(Shape::Superellipse { a, b, p }, Placement::IDENTITY)
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Self::new(Shape::Polygon { vertices }, Placement::IDENTITY)
    }

    /// Axis-aligned square `[0, side]^2`.
    pub fn square(side: f64) -> Result<Self> {
        Self::polygon(vec![[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]])
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    /// The same domain moved by a further rigid motion.
    pub fn moved(&self, motion: &Placement) -> Domain {
        Domain {
            shape: self.shape.clone(),
            placement: self.placement.then(motion),
        }
    }

    /// Rotation about the origin of the global frame.
    pub fn rotated(&self, angle: f64) -> Domain {
        self.moved(&Placement::new(angle, [0.0, 0.0]))
    }

    pub fn translated(&self, shift: Point) -> Domain {
        self.moved(&Placement::new(0.0, shift))
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            Shape::Disk { .. } => "disk",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Stadium { .. } => "stadium",
            Shape::Polygon { .. } => "polygon",
            Shape::Superellipse { .. } => "superellipse",
        }
    }

    /// Domains with corners lie outside the smooth-boundary setting.
    pub fn nonsmooth(&self) -> bool {
        matches!(self.shape, Shape::Polygon { .. })
    }

    /// Whether the boundary is curved (polygonization is approximate).
    pub fn is_curved(&self) -> bool {
        !matches!(self.shape, Shape::Polygon { .. })
    }

    pub fn contains(&self, p: Point) -> bool {
        self.shape.contains_local(self.placement.inverse_apply(p))
    }

    /// Boundary point at curve parameter `u in [0, 1)` in the global frame
    /// (smooth shapes only; `None` for polygons).
    pub fn boundary_point(&self, u: f64) -> Option<Point> {
        self.shape.local_point(u).map(|p| self.placement.apply(p))
    }

    /// Outward unit normal at curve parameter `u` (smooth shapes only).
    pub fn boundary_normal(&self, u: f64) -> Option<Point> {
        self.shape.local_normal(u).map(|n| self.placement.rotate_vector(n))
    }

    /// Canonical spec string accepted by [`Domain::parse`].
    pub fn spec_string(&self) -> String {
        let mut s = match &self.shape {
            Shape::Disk { radius } => {
                let c = self.placement.shift;
                let base = format!("disk:{},{},{}", c[0], c[1], radius);
                if self.placement.angle == 0.0 {
                    return base;
                }
                // a rotated disk is the same set; keep the rotation for exact round trips
                return format!("disk:0,0,{radius};rotate={};shift={},{}", self.placement.angle, c[0], c[1]);
            }
            Shape::Ellipse { a, b } => format!("ellipse:{a},{b}"),
            Shape::Stadium { half_length, radius } => format!("stadium:{half_length},{radius}"),
            Shape::Superellipse { a, b, p } => format!("superellipse:{a},{b},{p}"),
            Shape::Polygon { vertices } => {
                let pts: Vec<String> = vertices.iter().map(|p| format!("{},{}", p[0], p[1])).collect();
                format!("polygon:{}", pts.join(" "))
            }
        };
        if self.placement.angle != 0.0 {
            s.push_str(&format!(";rotate={}", self.placement.angle));
        }
        if self.placement.shift != [0.0, 0.0] {
            s.push_str(&format!(";shift={},{}", self.placement.shift[0], self.placement.shift[1]));
        }
        s
    }

    /// Parse `kind:params[;rotate=angle][;shift=x,y]`.
    ///
    /// Kinds: `disk:cx,cy,R` (or `disk:R`), `ellipse:a,b`, `stadium:L,R`,
    /// `superellipse:a,b,p`, `polygon:x,y x,y ...` or `polygon:@path`
    /// (one `x y` pair per line, `#` comments allowed).
    pub fn parse(spec: &str) -> Result<Self> {
        Self::parse_relative(spec, None)
    }

    /// As [`Domain::parse`], resolving `@path` relative to `base` when given.
    pub fn parse_relative(spec: &str, base: Option<&Path>) -> Result<Self> {
        let err = |reason: String| GeometryError::Parse {
            spec: spec.to_string(),
            reason,
        };
        let mut parts = spec.trim().split(';');
        let head = parts.next().unwrap_or("");
        let (kind, args) = head
            .split_once(':')
            .ok_or_else(|| err("expected `kind:parameters`".into()))?;
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| err(format!("bad number `{t}`: {e}"))))
                .collect()
        };
        let mut extra = Placement::IDENTITY;
        let mut rotate = 0.0;
        let mut shift = [0.0, 0.0];
        for opt in parts {
            let (k, v) = opt.split_once('=').ok_or_else(|| err(format!("bad option `{opt}`")))?;
            match k.trim() {
                "rotate" => rotate = nums(v)?.first().copied().ok_or_else(|| err("empty rotate".into()))?,
                "shift" => {
                    let s = nums(v)?;
                    if s.len() != 2 {
                        return Err(err("shift needs two numbers".into()));
                    }
                    shift = [s[0], s[1]];
                }
                other => return Err(err(format!("unknown option `{other}`"))),
            }
        }
        extra.angle = rotate;
        extra.shift = shift;
        let want = |v: &[f64], n: usize| -> Result<()> {
            if v.len() == n {
                Ok(())
            } else {
                Err(err(format!("{kind} takes {n} numbers, got {}", v.len())))
            }
        };
        let d = match kind.trim() {
            "disk" => {
                let v = nums(args)?;
                match v.len() {
                    1 => Domain::disk([0.0, 0.0], v[0])?,
                    3 => Domain::disk([v[0], v[1]], v[2])?,
                    n => return Err(err(format!("disk takes 1 or 3 numbers, got {n}"))),
                }
            }
            "ellipse" => {
                let v = nums(args)?;
                want(&v, 2)?;
                Domain::ellipse(v[0], v[1])?
            }
            "stadium" => {
                let v = nums(args)?;
                want(&v, 2)?;
                Domain::stadium(v[0], v[1])?
            }
            "superellipse" => {
                let v = nums(args)?;
                want(&v, 3)?;
                Domain::superellipse(v[0], v[1], v[2])?
            }
            "polygon" => {
                let args = args.trim();
                let verts = if let Some(path) = args.strip_prefix('@') {
                    let p = match base {
                        Some(b) => b.join(path),
                        None => Path::new(path).to_path_buf(),
                    };
                    let text = std::fs::read_to_string(&p).map_err(|e| GeometryError::Io {
                        path: p.display().to_string(),
                        reason: e.to_string(),
                    })?;
                    parse_vertex_file(&text).map_err(err)?
                } else {
                    args.split_whitespace()
                        .map(|pair| {
                            let v = nums(pair)?;
                            want(&v, 2)?;
                            Ok([v[0], v[1]])
                        })
                        .collect::<Result<Vec<_>>>()?
                };
                Domain::polygon(verts)?
            }
            other => return Err(err(format!("unknown domain kind `{other}`"))),
        };
        Ok(if extra.is_identity() { d } else { d.moved(&extra) })
    }
}

fn parse_vertex_file(text: &str) -> std::result::Result<Vec<Point>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        if v.len() != 2 {
            return Err(format!("line {}: expected `x y`", i + 1));
        }
        out.push([v[0], v[1]]);
    }
    Ok(out)
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec_string())
    }
}

impl Shape {
    pub(crate) fn contains_local(&self, p: Point) -> bool {
        let [x, y] = p;
        match *self {
            Shape::Disk { radius } => x * x + y * y <= radius * radius,
            Shape::Ellipse { a, b } => (x / a).powi(2) + (y / b).powi(2) <= 1.0,
            Shape::Stadium { half_length, radius } => {
                let dx = (x.abs() - half_length).max(0.0);
                dx * dx + y * y <= radius * radius
            }
            Shape::Superellipse { a, b, p: e } => (x / a).abs().powf(e) + (y / b).abs().powf(e) <= 1.0,
            Shape::Polygon { ref vertices } => point_in_polygon(vertices, p),
        }
    }

    /// Body-frame boundary point at `u in [0, 1)`, counterclockwise.
    pub(crate) fn local_point(&self, u: f64) -> Option<Point> {
        let t = 2.0 * PI * u;
        match *self {
            Shape::Disk { radius } => Some([radius * t.cos(), radius * t.sin()]),
            Shape::Ellipse { a, b } => Some([a * t.cos(), b * t.sin()]),
            Shape::Superellipse { a, b, p } => {
                let q = 2.0 / p;
                let (s, c) = t.sin_cos();
                Some([a * c.signum() * c.abs().powf(q), b * s.signum() * s.abs().powf(q)])
            }
            Shape::Stadium { half_length, radius } => Some(stadium_point(half_length, radius, u).0),
            Shape::Polygon { .. } => None,
        }
    }

    pub(crate) fn local_normal(&self, u: f64) -> Option<Point> {
        let t = 2.0 * PI * u;
        let n = match *self {
            Shape::Disk { .. } => [t.cos(), t.sin()],
            Shape::Ellipse { a, b } => [b * t.cos(), a * t.sin()],
            Shape::Superellipse { a, b, p } => {
                // gradient of |x/a|^p + |y/b|^p at the boundary point
                let [x, y] = self.local_point(u)?;
                let gx = (x / a).abs().powf(p - 1.0) * x.signum() / a;
                let gy = (y / b).abs().powf(p - 1.0) * y.signum() / b;
                [gx, gy]
            }
            Shape::Stadium { half_length, radius } => stadium_point(half_length, radius, u).1,
            Shape::Polygon { .. } => return None,
        };
        let len = n[0].hypot(n[1]);
        Some([n[0] / len, n[1] / len])
    }
}

/// Arc-length parametrised stadium boundary starting at `(0, -R)`:
/// point and outward normal.
fn stadium_point(a: f64, r: f64, u: f64) -> (Point, Point) {
    let perim = 4.0 * a + 2.0 * PI * r;
    let mut s = u.rem_euclid(1.0) * perim;
    // bottom right half
    if s <= a {
        return ([s, -r], [0.0, -1.0]);
    }
    s -= a;
    let arc = PI * r;
    if s <= arc {
        let phi = -0.5 * PI + s / r;
        let (sn, cs) = phi.sin_cos();
        return ([a + r * cs, r * sn], [cs, sn]);
    }
    s -= arc;
    if s <= 2.0 * a {
        return ([a - s, r], [0.0, 1.0]);
    }
    s -= 2.0 * a;
    if s <= arc {
        let phi = 0.5 * PI + s / r;
        let (sn, cs) = phi.sin_cos();
        return ([-a + r * cs, r * sn], [cs, sn]);
    }
    s -= arc;
    ([-a + s, -r], [0.0, -1.0])
}

/// Crossing-number test; boundary points count as inside.
pub(crate) fn point_in_polygon(v: &[Point], p: Point) -> bool {
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        if orient(a, b, p) == 0.0 && on_segment(a, b, p) {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn polygon_signed_area(v: &[Point]) -> f64 {
    signed_area(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_shapes() {
        assert!(Domain::disk([0.0, 0.0], 0.0).is_err());
        assert!(Domain::ellipse(1.0, -1.0).is_err());
        assert!(Domain::superellipse(1.0, 1.0, 1.5).is_err());
        let bow = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(Domain::polygon(bow), Err(GeometryError::SelfIntersection(..))));
        assert!(Domain::polygon(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(Domain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
    }

    #[test]
    fn clockwise_polygon_is_reoriented() {
        let d = Domain::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        let Shape::Polygon { vertices } = d.shape() else { unreachable!() };
        assert!(polygon_signed_area(vertices) > 0.0);
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "disk:0,0,1",
            "disk:0.5,-2,0.3",
            "ellipse:1.5,0.6667",
            "stadium:0.5,0.6",
            "superellipse:1,0.8,4",
            "polygon:0,0 2,0 0.4,1.1",
            "ellipse:2,0.5;rotate=0.7;shift=1,-3",
        ] {
            let d = Domain::parse(s).unwrap();
            assert_eq!(Domain::parse(&d.spec_string()).unwrap(), d, "{s}");
        }
        assert!(Domain::parse("blob:1").is_err());
        assert!(Domain::parse("ellipse:1").is_err());
        assert!(Domain::parse("ellipse:1,x").is_err());
        assert!(Domain::parse("ellipse:1,1;spin=2").is_err());
    }

    #[test]
    fn stadium_boundary_is_continuous() {
        let mut prev = stadium_point(0.5, 0.6, 0.0).0;
        for k in 1..=4000 {
            let p = stadium_point(0.5, 0.6, k as f64 / 4000.0).0;
            let step = (p[0] - prev[0]).hypot(p[1] - prev[1]);
            assert!(step < 1.1 * (2.0 + 1.2 * PI) / 4000.0);
            prev = p;
        }
    }

    #[test]
    fn normals_are_outward() {
        for d in [
            Domain::ellipse(2.0, 0.5).unwrap(),
            Domain::stadium(0.5, 0.6).unwrap(),
            Domain::superellipse(1.0, 0.7, 4.0).unwrap(),
        ] {
            for k in 0..64 {
                let u = (k as f64 + 0.5) / 64.0;
                let p = d.boundary_point(u).unwrap();
                let n = d.boundary_normal(u).unwrap();
                assert!(!d.contains([p[0] + 1e-6 * n[0], p[1] + 1e-6 * n[1]]));
                assert!(d.contains([p[0] - 1e-6 * n[0], p[1] - 1e-6 * n[1]]));
            }
        }
    }
}
