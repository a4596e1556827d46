use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::boundary::local_polyline;
use super::domain::{polygon_signed_area, Shape};
use super::{Domain, Point};

/// Boundary samples used for hulls of curved domains.
const HULL_SAMPLES: f64 = 512.0;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DomainMetrics {
    pub area: f64,
    pub centroid: Point,
    /// Counterclockwise hull vertices starting from the lexicographically smallest.
    pub hull: Vec<Point>,
    /// Radius of the disk with the same area.
    pub equal_volume_radius: f64,
    pub diameter: f64,
}

/// Body-frame area and centroid.
fn local_area_centroid(shape: &Shape) -> (f64, Point) {
    match shape {
        Shape::Disk { radius } => (PI * radius * radius, [0.0, 0.0]),
        Shape::Ellipse { a, b } => (PI * a * b, [0.0, 0.0]),
        Shape::Stadium { half_length, radius } => (PI * radius * radius + 4.0 * half_length * radius, [0.0, 0.0]),
        Shape::Superellipse { a, b, p } => {
            let g1 = gamma(1.0 + 1.0 / p);
            (4.0 * a * b * g1 * g1 / gamma(1.0 + 2.0 / p), [0.0, 0.0])
        }
        Shape::Polygon { vertices } => {
            let area = polygon_signed_area(vertices);
            let n = vertices.len();
            let (mut cx, mut cy) = (0.0, 0.0);
            for i in 0..n {
                let p = vertices[i];
                let q = vertices[(i + 1) % n];
                let w = p[0] * q[1] - q[0] * p[1];
                cx += (p[0] + q[0]) * w;
                cy += (p[1] + q[1]) * w;
            }
            (area, [cx / (6.0 * area), cy / (6.0 * area)])
        }
    }
}

/// Convex hull by the monotone chain; points are ordered
/// lexicographically, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Point, a: Point, b: Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for &q in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    let lower = hull.len() + 1;
    for &q in p.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();
    hull
}

/// Boundary points whose hull is the domain's hull (polygon vertices, or a
/// fine sampling of a curved boundary).
pub(crate) fn hull_source(d: &Domain) -> Vec<Point> {
    let local = match d.shape() {
        Shape::Polygon { vertices } => vertices.clone(),
        shape => {
            let (area, _) = local_area_centroid(shape);
            let h = (area.sqrt() * 2.0 * PI.sqrt()) / HULL_SAMPLES;
            local_polyline(shape, h, 0).expect("fine spacing always fits").points
        }
    };
    let pl = d.placement();
    local.into_iter().map(|p| pl.apply(p)).collect()
}

pub fn domain_metrics(d: &Domain) -> DomainMetrics {
    let (area, c) = local_area_centroid(d.shape());
    let hull = convex_hull(&hull_source(d));
    let mut diameter: f64 = 0.0;
    for (i, p) in hull.iter().enumerate() {
        for q in &hull[i + 1..] {
            diameter = diameter.max((q[0] - p[0]).hypot(q[1] - p[1]));
        }
    }
    DomainMetrics {
        area,
        centroid: d.placement().apply(c),
        hull,
        equal_volume_radius: (area / PI).sqrt(),
        diameter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_collinear_points() {
        let pts = [
            [0.0, 0.0],
            [0.5, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
            [0.0, 0.5],
        ];
        assert_eq!(convex_hull(&pts), vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn superellipse_area_limits() {
        // p = 2 is the ellipse
        let (a, _) = local_area_centroid(&Shape::Superellipse { a: 1.5, b: 0.5, p: 2.0 });
        assert!((a - PI * 0.75).abs() < 1e-14);
    }
}
