use super::domain::Shape;
use super::{Domain, GeometryError, Point, Result};

/// Samples of the dense table used to place vertices along curved boundaries.
const DENSE: usize = 16_384;
/// Spacing may shrink to this fraction of `h_b` where the boundary bends.
const MIN_SPACING_FACTOR: f64 = 0.625;

/// Closed boundary polyline, counterclockwise; the closing segment joins
/// the last point to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    /// Curve parameters `u in [0, 1)` of the vertices on smooth boundaries.
    pub params: Option<Vec<f64>>,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let p = self.points[i];
                let q = self.points[(i + 1) % n];
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .collect()
    }

    /// Area enclosed by the polyline (shoelace).
    pub fn area(&self) -> f64 {
        super::domain::polygon_signed_area(&self.points)
    }
}

/// Curvature-adaptive polyline with spacing close to `h_b` and vertices
/// exactly on the boundary. Polygons keep their vertices and have each
/// edge split evenly.
pub fn boundary_polyline(d: &Domain, h_b: f64) -> Result<Polyline> {
    let mut line = local_polyline(d.shape(), h_b, 0)?;
    let pl = d.placement();
    if !pl.is_identity() {
        for p in &mut line.points {
            *p = pl.apply(*p);
        }
    }
    Ok(line)
}

/// Body-frame polyline; `level` halves every segment `level` times, so the
/// vertex set at level `k` contains the one at level `k - 1`.
pub(crate) fn local_polyline(shape: &Shape, h_b: f64, level: u32) -> Result<Polyline> {
    if !(h_b.is_finite() && h_b > 0.0) {
        return Err(GeometryError::Dimension { name: "h_b", value: h_b });
    }
    let split = 1usize << level;
    if let Shape::Polygon { vertices } = shape {
        return Ok(polygon_polyline(vertices, h_b, split));
    }
    let table = DenseTable::new(shape);
    let total = table.density_total(h_b);
    if total < 8.0 {
        return Err(GeometryError::TooCoarse { h: h_b, segments: total });
    }
    let n = 4 * ((total / 4.0).round() as usize).max(2) * split;
    let mut points = Vec::with_capacity(n);
    let mut params = Vec::with_capacity(n);
    let cum = table.cumulative_density(h_b);
    for k in 0..n {
        let target = (k as f64 / n as f64) * total;
        let u = table.invert(&cum, target);
        points.push(shape.local_point(u).expect("smooth shape"));
        params.push(u);
    }
    Ok(Polyline {
        points,
        params: Some(params),
    })
}

fn polygon_polyline(vertices: &[Point], h_b: f64, split: usize) -> Polyline {
    let n = vertices.len();
    let mut points = Vec::new();
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        let pieces = (len / h_b).ceil().max(1.0) as usize * split;
        for k in 0..pieces {
            let t = k as f64 / pieces as f64;
            points.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    Polyline { points, params: None }
}

/// Dense sampling of a smooth boundary: parameters, arc length and
/// discrete curvature.
struct DenseTable {
    u: Vec<f64>,
    /// arc length at each sample, `s[DENSE]` is the perimeter
    s: Vec<f64>,
    kappa: Vec<f64>,
}

impl DenseTable {
    fn new(shape: &Shape) -> Self {
        let u: Vec<f64> = (0..=DENSE).map(|k| k as f64 / DENSE as f64).collect();
        let pts: Vec<Point> = u[..DENSE].iter().map(|&t| shape.local_point(t).unwrap()).collect();
        let mut s = vec![0.0; DENSE + 1];
        let mut seg = vec![0.0; DENSE];
        for k in 0..DENSE {
            let p = pts[k];
            let q = pts[(k + 1) % DENSE];
            seg[k] = (q[0] - p[0]).hypot(q[1] - p[1]);
            s[k + 1] = s[k] + seg[k];
        }
        // turning angle between consecutive chords over the mean chord length
        let mut kappa = vec![0.0; DENSE + 1];
        for k in 0..DENSE {
            let prev = (k + DENSE - 1) % DENSE;
            let a = pts[prev];
            let b = pts[k];
            let c = pts[(k + 1) % DENSE];
            let t1 = [b[0] - a[0], b[1] - a[1]];
            let t2 = [c[0] - b[0], c[1] - b[1]];
            let turn = (t1[0] * t2[1] - t1[1] * t2[0]).atan2(t1[0] * t2[0] + t1[1] * t2[1]);
            let ds = 0.5 * (seg[prev] + seg[k]);
            kappa[k] = if ds > 0.0 { turn.abs() / ds } else { 0.0 };
        }
        kappa[DENSE] = kappa[0];
        Self { u, s, kappa }
    }

    fn perimeter(&self) -> f64 {
        self.s[DENSE]
    }

    fn density(&self, k: usize, h_b: f64) -> f64 {
        let rel = self.kappa[k] * self.perimeter() / (2.0 * std::f64::consts::PI);
        let factor = if rel > 0.0 {
            (1.0 / rel.sqrt()).clamp(MIN_SPACING_FACTOR, 1.0)
        } else {
            1.0
        };
        1.0 / (h_b * factor)
    }

    fn cumulative_density(&self, h_b: f64) -> Vec<f64> {
        let mut c = vec![0.0; DENSE + 1];
        for k in 0..DENSE {
            let ds = self.s[k + 1] - self.s[k];
            c[k + 1] = c[k] + 0.5 * ds * (self.density(k, h_b) + self.density(k + 1, h_b));
        }
        c
    }

    fn density_total(&self, h_b: f64) -> f64 {
        self.cumulative_density(h_b)[DENSE]
    }

    fn invert(&self, cum: &[f64], target: f64) -> f64 {
        let k = cum.partition_point(|&c| c <= target).clamp(1, DENSE) - 1;
        let span = cum[k + 1] - cum[k];
        let t = if span > 0.0 { (target - cum[k]) / span } else { 0.0 };
        self.u[k] + t * (self.u[k + 1] - self.u[k])
    }
}
