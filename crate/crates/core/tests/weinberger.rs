use std::f64::consts::PI;

use isospec::geometry::{domain_metrics, Domain};
use isospec::weinberger::*;

const UPS1_DISK: f64 = 11.491_813_320_823_285;
const UPS2_DISK: f64 = 132.061_773_400_651_51;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
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
fn field_vanishes_at_centers_of_symmetry() {
    let d = Domain::disk([0.7, -0.3], 1.2).unwrap();
    let p = TrialProfile::for_domain(&d).unwrap();
    let v = hopf_field(&d, [0.7, -0.3], &p).unwrap();
    assert!(v[0].hypot(v[1]) < 1e-10);
    let e = Domain::ellipse(1.5, 2.0 / 3.0).unwrap();
    let p = TrialProfile::for_domain(&e).unwrap();
    let v = hopf_field(&e, [0.0, 0.0], &p).unwrap();
    assert!(v[0].hypot(v[1]) < 1e-10);
    // off-center the field is nonzero
    let v = hopf_field(&e, [0.3, 0.1], &p).unwrap();
    assert!(v[0].hypot(v[1]) > 1e-3);
}

#[test]
fn field_is_translation_covariant() {
    let e = Domain::ellipse(1.3, 0.6).unwrap().rotated(0.4);
    let t = e.translated([3.0, -2.0]);
    let p = TrialProfile::for_domain(&e).unwrap();
    let a = hopf_field(&e, [0.2, 0.1], &p).unwrap();
    let b = hopf_field(&t, [3.2, -1.9], &p).unwrap();
    assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
}

#[test]
fn points_outside_the_hull_are_rejected() {
    let d = Domain::square(1.0).unwrap();
    let p = TrialProfile::for_domain(&d).unwrap();
    assert!(matches!(hopf_field(&d, [2.0, 0.5], &p), Err(WeinbergerError::OutsideHull(..))));
}

#[test]
fn symmetric_domains_are_centred_at_the_centroid() {
    for spec in ["ellipse:1.5,0.6667", "stadium:0.5,0.6", "disk:2,1,0.8"] {
        let d = Domain::parse(spec).unwrap();
        let c = find_center(&d, 1e-12).unwrap();
        let g = domain_metrics(&d).centroid;
        assert!((c.center[0] - g[0]).abs() < 1e-8 && (c.center[1] - g[1]).abs() < 1e-8, "{spec}");
    }
}

#[test]
fn scalene_triangle_center_matches_a_grid_scan() {
    let d = Domain::parse("polygon:0,0 2,0 0.4,1.1").unwrap();
    let setup = TrialSetup::new(&d).unwrap();
    let c = find_center_with(&setup, 1e-12).unwrap();
    assert!(c.residual < 1e-10);
    assert!(d.contains(c.center));
    // the root is strictly inside: away from all three edges
    assert!(c.center[1] > 0.05);
    // independent oracle: grid cells of step 0.05 on which both field
    // components change sign bracket the zeros of V
    let step = 0.05;
    let (nx, ny) = (40, 22);
    let mut grid = vec![vec![None; ny + 1]; nx + 1];
    for (i, col) in grid.iter_mut().enumerate() {
        for (j, cell) in col.iter_mut().enumerate() {
            let p = [step * i as f64, step * j as f64];
            if setup.in_hull(p) {
                *cell = Some(setup.field(p).unwrap());
            }
        }
    }
    let mut brackets = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let corners = [grid[i][j], grid[i + 1][j], grid[i][j + 1], grid[i + 1][j + 1]];
            if corners.iter().any(|c| c.is_none()) {
                continue;
            }
            let changes = |k: usize| {
                let v: Vec<f64> = corners.iter().map(|c| c.unwrap()[k]).collect();
                v.iter().any(|&x| x <= 0.0) && v.iter().any(|&x| x >= 0.0)
            };
            if changes(0) && changes(1) {
                brackets.push([step * i as f64, step * j as f64]);
            }
        }
    }
    assert!(!brackets.is_empty());
    assert!(brackets.iter().any(|b| {
        (b[0]..=b[0] + step).contains(&c.center[0]) && (b[1]..=b[1] + step).contains(&c.center[1])
    }));
}

#[test]
fn center_is_equivariant_under_rigid_motions() {
    let d = Domain::parse("polygon:0,0 2,0 0.4,1.1").unwrap();
    let moved = d.rotated(0.7).translated([1.5, -0.5]);
    let a = find_center(&d, 1e-13).unwrap().center;
    let b = find_center(&moved, 1e-13).unwrap().center;
    let pl = moved.placement();
    let want = pl.apply(a);
    assert!((want[0] - b[0]).abs() < 1e-10 && (want[1] - b[1]).abs() < 1e-10);
}

#[test]
fn quotient_is_domain_independent_at_fixed_area() {
    for d in corpus() {
        let area = domain_metrics(&d).area;
        for m in 1..=2u32 {
            let q = trial_quotient(&d, m).unwrap();
            let bound = TrialProfile::for_area(area).unwrap().mu1.powi(2 * m as i32);
            assert!(rel(q.identity, bound) < 1e-14, "{d} m={m}");
            assert!((q.quadrature - q.identity).abs() <= q.quadrature_error.max(1e-12 * bound), "{d} m={m}");
            assert!(rel(q.quadrature, q.identity) < 1e-6, "{d} m={m}");
        }
    }
}

#[test]
fn quotient_examples() {
    let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let q = trial_quotient(&disk, 1).unwrap();
    assert!(rel(q.identity, UPS1_DISK) < 1e-14);
    assert!((q.quadrature - q.identity).abs() < 1e-8 * UPS1_DISK);
    let e = Domain::ellipse(1.5, 2.0 / 3.0).unwrap();
    let q = trial_quotient(&e, 2).unwrap();
    assert!(rel(q.identity, UPS2_DISK) < 1e-14);
    assert!((q.identity - 132.062).abs() < 1e-3);
}

#[test]
fn certificates() {
    let disk = certify_upper_bound(&Domain::disk([0.0, 0.0], 1.0).unwrap(), 1).unwrap();
    assert!(disk.valid);
    assert!((disk.bound - 11.49182).abs() < 1e-5);
    let sq = certify_upper_bound(&Domain::square(1.0).unwrap(), 1).unwrap();
    assert!(sq.valid);
    assert!(rel(sq.bound, UPS1_DISK * PI * PI) < 1e-14);
    assert!((sq.bound - 113.42).abs() < 0.01);
    // cos(pi x) on the unit square has biharmonic eigenvalue pi^4 < bound
    assert!(PI.powi(4) < sq.bound);
    let e = certify_upper_bound(&Domain::ellipse(1.5, 2.0 / 3.0).unwrap(), 1).unwrap();
    assert_eq!(e.bound, disk.bound);
    let json = serde_json::to_value(&disk).unwrap();
    let keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    let mut want = vec![
        "domain", "m", "n", "area", "R", "center", "field_residual", "mean_residuals",
        "quotient_identity", "quotient_quadrature", "bound", "valid",
    ];
    want.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, want);
}

#[test]
fn certificates_hold_mean_zero_on_the_corpus() {
    for d in corpus() {
        let c = certify_upper_bound(&d, 1).unwrap();
        assert!(c.valid, "{d}");
        assert!(c.field_residual <= FIELD_TOL);
        assert!(c.mean_residuals.iter().all(|&r| r < MEAN_TOL), "{d}");
    }
}

#[test]
fn invalid_powers_are_rejected() {
    let d = Domain::square(1.0).unwrap();
    assert!(matches!(certify_upper_bound(&d, 0), Err(WeinbergerError::Power(0))));
    assert!(matches!(trial_quotient(&d, 9), Err(WeinbergerError::Power(9))));
    assert!(matches!(find_center(&d, 0.0), Err(WeinbergerError::Tolerance(_))));
}
