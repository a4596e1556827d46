use std::f64::consts::PI;

use isospec::geometry::{
    boundary_polyline, domain_metrics, integrate, integrate_mesh, triangulate, Domain, GeometryError, Placement,
};
use proptest::prelude::*;

fn dist_to_polyline(p: [f64; 2], pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let d = [b[0] - a[0], b[1] - a[1]];
            let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
            (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn domain_construction_examples() {
    assert!(Domain::disk([0.0, 0.0], 1.0).is_ok());
    let e = Domain::ellipse(1.5, 2.0 / 3.0).unwrap();
    assert!((domain_metrics(&e).area - PI).abs() < 1e-14);
    let crossing = Domain::polygon(vec![[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]]);
    assert!(matches!(crossing, Err(GeometryError::SelfIntersection(..))));
    assert!(Domain::stadium(0.0, 1.0).is_err());
}

#[test]
fn disk_polyline_lies_on_circle() {
    let d = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let line = boundary_polyline(&d, 0.1).unwrap();
    assert!((60..=66).contains(&line.len()), "{}", line.len());
    for p in &line.points {
        assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
    }
    for l in line.segment_lengths() {
        assert!((0.05..=0.2).contains(&l));
    }
}

#[test]
fn polygon_polyline_keeps_vertices() {
    let tri = vec![[0.0, 0.0], [2.0, 0.0], [0.4, 1.1]];
    let d = Domain::polygon(tri.clone()).unwrap();
    let line = boundary_polyline(&d, 0.1).unwrap();
    for v in &tri {
        assert!(line.points.contains(v));
    }
    for l in line.segment_lengths() {
        assert!((0.05..=0.2).contains(&l), "{l}");
    }
    assert!((line.area() - 1.1).abs() < 1e-14);
}

#[test]
fn ellipse_polyline_follows_curvature() {
    // oracle: spacing predicted from the analytic curvature
    // kappa = ab / (a^2 sin^2 t + b^2 cos^2 t)^{3/2} and a fine perimeter
    let (a, b) = (2.0, 0.5);
    let d = Domain::ellipse(a, b).unwrap();
    let hb = 0.1;
    let line = boundary_polyline(&d, hb).unwrap();
    let perim: f64 = {
        let n = 200_000;
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt() * 2.0 * PI / n as f64
            })
            .sum()
    };
    let lens = line.segment_lengths();
    let params = line.params.as_ref().unwrap();
    let n = lens.len();
    let mut predicted = Vec::with_capacity(n);
    for k in 0..n {
        let u0 = params[k];
        let u1 = if k + 1 < n { params[k + 1] } else { 1.0 };
        let t = PI * (u0 + u1);
        let kappa = a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5);
        let rel = kappa * perim / (2.0 * PI);
        predicted.push(hb * (1.0 / rel.sqrt()).clamp(0.625, 1.0));
    }
    // common normalisation from rounding the segment count
    let scale: f64 = lens.iter().sum::<f64>() / predicted.iter().sum::<f64>();
    for (l, p) in lens.iter().zip(&predicted) {
        assert!((l / (p * scale) - 1.0).abs() < 0.05, "{l} vs {}", p * scale);
    }
    let max = lens.iter().cloned().fold(0.0, f64::max);
    let min = lens.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 4.0);
    // ends (t = 0, pi) are denser than the flat sides (t = pi/2)
    let end = lens[0];
    let side = lens[n / 4];
    assert!(end < side);
    for p in &line.points {
        assert!(((p[0] / a).powi(2) + (p[1] / b).powi(2) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn disk_mesh_size_and_area() {
    let d = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let m = triangulate(&d, 0.05).unwrap();
    assert!((2800..=6500).contains(&m.num_triangles()), "{}", m.num_triangles());
    // inscribed-polygon deficit: pi - (N/2) sin(2 pi / N) ~ pi h^2 / 6 = 1.3e-3
    let deficit = PI - m.area();
    assert!(deficit > 0.0 && deficit < 1.1 * PI * 0.05 * 0.05 / 6.0, "{deficit:e}");
    // polygonization oracle: area of the inscribed polyline
    let line = boundary_polyline(&d, 0.05).unwrap();
    assert!((m.area() - line.area()).abs() < 1e-12, "{:e}", m.area() - line.area());
}

#[test]
fn square_mesh_area_is_exact() {
    let m = triangulate(&Domain::square(1.0).unwrap(), 0.1).unwrap();
    assert!((m.area() - 1.0).abs() < 1e-12);
}

fn corpus() -> Vec<Domain> {
    [
        "disk:0,0,1",
        "ellipse:1.0954451150103321,0.9128709291752769",
        "ellipse:1.224744871391589,0.8164965809277261",
        "ellipse:1.4142135623730951,0.7071067811865476",
        "stadium:0.5,0.6",
        "polygon:0,0 1,0 1,1 0,1",
        "polygon:0,0 2,0 0.4,1.1",
        "superellipse:1,0.8,4",
    ]
    .iter()
    .map(|s| Domain::parse(s).unwrap())
    .collect()
}

#[test]
fn corpus_meshes_satisfy_quality_contract() {
    for d in corpus() {
        for h in [0.1, 0.05] {
            let m = triangulate(&d, h).unwrap();
            m.validate().unwrap();
            assert!(m.min_angle_deg() >= 20.0);
            let line = boundary_polyline(&d, h).unwrap();
            for (p, &b) in m.vertices.iter().zip(&m.boundary) {
                if b {
                    assert!(dist_to_polyline(*p, &line.points) < 1e-12, "{d}");
                }
            }
            // interior edges stay within a factor two of h
            for (e, _) in m.edges() {
                if m.boundary[e[0]] && m.boundary[e[1]] {
                    continue;
                }
                let p = m.vertices[e[0]];
                let q = m.vertices[e[1]];
                let l = (q[0] - p[0]).hypot(q[1] - p[1]);
                assert!(l >= 0.5 * h && l <= 2.0 * h, "{d} h={h} edge {l}");
            }
        }
    }
}

#[test]
fn triangulation_is_deterministic_and_equivariant() {
    let d = Domain::parse("polygon:0,0 2,0 0.4,1.1").unwrap();
    let a = triangulate(&d, 0.05).unwrap();
    let b = triangulate(&d, 0.05).unwrap();
    assert_eq!(a, b);
    let motion = Placement::new(0.7, [3.0, -1.5]);
    let moved = triangulate(&d.moved(&motion), 0.05).unwrap();
    assert_eq!(moved.triangles, a.triangles);
    for (p, q) in a.vertices.iter().zip(&moved.vertices) {
        let r = motion.apply(*p);
        assert!((r[0] - q[0]).abs() < 1e-12 && (r[1] - q[1]).abs() < 1e-12);
    }
}

#[test]
fn mesh_text_round_trip() {
    let m = triangulate(&Domain::ellipse(1.5, 0.6).unwrap(), 0.1).unwrap();
    let text = m.to_text();
    assert!(text.starts_with(&format!("mesh v1 {} {}\n", m.num_vertices(), m.num_triangles())));
    assert_eq!(isospec::geometry::Mesh::from_text(&text).unwrap(), m);
}

#[test]
fn integration_examples() {
    let d = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let one = integrate(&d, |_, _| 1.0, 2, 0.05).unwrap();
    assert!((one - PI).abs() < 1e-6, "{:e}", one - PI);
    let x = integrate(&d, |x, _| x, 2, 0.05).unwrap();
    assert!(x.abs() < 1e-10);
    // polar oracle: int r^2 r dr dtheta = pi / 2
    let r2 = integrate(&d, |x, y| x * x + y * y, 2, 0.05).unwrap();
    assert!((r2 - PI / 2.0).abs() < 1e-6, "{:e}", r2 - PI / 2.0);
}

#[test]
fn integration_is_linear_and_additive() {
    let f = |x: f64, y: f64| x.powi(3) * y.powi(2) - 2.0 * x * y + 0.5;
    let g = |x: f64, y: f64| (x - y).powi(4) + y.powi(7);
    let whole = Domain::square(1.0).unwrap();
    let left = Domain::polygon(vec![[0.0, 0.0], [0.5, 0.0], [0.5, 1.0], [0.0, 1.0]]).unwrap();
    let right = Domain::polygon(vec![[0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.5, 1.0]]).unwrap();
    let m = triangulate(&whole, 0.1).unwrap();
    let (a, b) = (1.7, -0.3);
    let lin = integrate_mesh(&m, |x, y| a * f(x, y) + b * g(x, y), 7).unwrap();
    let parts = a * integrate_mesh(&m, f, 7).unwrap() + b * integrate_mesh(&m, g, 7).unwrap();
    assert!((lin - parts).abs() <= 1e-13 * lin.abs());
    let w = integrate(&whole, g, 7, 0.1).unwrap();
    let s = integrate(&left, g, 7, 0.1).unwrap() + integrate(&right, g, 7, 0.1).unwrap();
    assert!((w - s).abs() <= 1e-13 * w.abs());
    // exact value of int_0^1 int_0^1 (x-y)^4 + y^7 = 1/15 + 1/8
    assert!((w - (1.0 / 15.0 + 0.125)).abs() < 1e-14);
}

#[test]
fn integration_rejects_non_finite_values() {
    let d = Domain::square(1.0).unwrap();
    let r = integrate(&d, |x, _| 1.0 / (x - x), 2, 0.25);
    assert!(matches!(r, Err(GeometryError::NonFinite(..))));
}

#[test]
fn metric_examples() {
    let e = domain_metrics(&Domain::ellipse(1.5, 2.0 / 3.0).unwrap());
    assert!((e.equal_volume_radius - 1.0).abs() < 1e-12);
    let sq = domain_metrics(&Domain::square(1.0).unwrap());
    assert!((sq.equal_volume_radius - 0.564_189_583_547_756_3).abs() < 1e-15);
    assert_eq!(sq.centroid, [0.5, 0.5]);
    let st = domain_metrics(&Domain::stadium(0.5, 0.6).unwrap());
    let exact = PI * 0.36 + 2.0 * 0.5 * 1.2;
    assert!((st.area - exact).abs() < 1e-14);
    assert!((st.area - 2.33097).abs() < 1e-5);
    assert!((st.equal_volume_radius - (exact / PI).sqrt()).abs() < 1e-15);
    for d in corpus() {
        let m = domain_metrics(&d);
        assert!((PI * m.equal_volume_radius.powi(2) - m.area).abs() <= 1e-12 * m.area);
    }
}

fn inside_hull(hull: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = hull.len();
    (0..n).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
    })
}

#[test]
fn area_agrees_with_quadrature() {
    for d in corpus() {
        let m = domain_metrics(&d);
        assert!(inside_hull(&m.hull, m.centroid), "{d}");
        let q = integrate(&d, |_, _| 1.0, 2, 0.05).unwrap();
        let tol = if d.is_curved() { 1e-5 } else { 1e-12 };
        assert!((q - m.area).abs() <= tol * m.area, "{d}: {q} vs {}", m.area);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rigid_motions_transform_metrics(angle in -3.0f64..3.0, sx in -5.0f64..5.0, sy in -5.0f64..5.0, k in 0usize..8) {
        let d = corpus().swap_remove(k);
        let motion = Placement::new(angle, [sx, sy]);
        let a = domain_metrics(&d);
        let b = domain_metrics(&d.moved(&motion));
        prop_assert!((a.area - b.area).abs() <= 1e-14 * a.area);
        let c = motion.apply(a.centroid);
        prop_assert!((c[0] - b.centroid[0]).abs() < 1e-12 && (c[1] - b.centroid[1]).abs() < 1e-12);
        prop_assert!((a.diameter - b.diameter).abs() < 1e-12);
    }

    #[test]
    fn random_ellipse_meshes_are_valid(a in 0.5f64..2.0, b in 0.5f64..2.0, h in 0.06f64..0.2, angle in 0.0f64..6.3) {
        let d = Domain::ellipse(a, b).unwrap().rotated(angle);
        let m = triangulate(&d, h).unwrap();
        prop_assert!(m.validate().is_ok());
        prop_assert!(m.min_angle_deg() >= 20.0);
        let line = boundary_polyline(&d, h).unwrap();
        prop_assert!((m.area() - line.area()).abs() < 1e-12 * line.area());
    }
}
