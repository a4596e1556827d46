use isospec::ballspec::{neumann_spectrum_ball, BallSpec};
use isospec::geometry::{domain_metrics, Domain};
use isospec::mps::*;

// first zero of J_1', 30 digits
const NU11: f64 = 1.841_183_781_340_659_3;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn disk() -> Domain {
    Domain::disk([0.0, 0.0], 1.0).unwrap()
}

fn basis(problem: MpsProblem, omega: f64) -> MpsBasis {
    MpsBasis {
        problem,
        omega,
        terms: 20,
        center: [0.0, 0.0],
    }
}

fn basis_on(d: &Domain, problem: MpsProblem, omega: f64) -> MpsBasis {
    MpsBasis {
        center: domain_metrics(d).centroid,
        ..basis(problem, omega)
    }
}

#[test]
fn sigma_at_and_away_from_disk_eigenfrequencies() {
    let d = disk();
    assert!(mps_sigma(&d, &basis(MpsProblem::LaplaceNeumann, NU11)).unwrap() < 1e-8);
    assert!(mps_sigma(&d, &basis(MpsProblem::LaplaceNeumann, 1.5)).unwrap() > 1e-2);
    let s = mps_sigma(&d, &basis(MpsProblem::PolyharmNeumann(1), NU11)).unwrap();
    assert!(s < 1e-8);
    assert!((MpsProblem::PolyharmNeumann(1).eigenvalue(NU11) - 11.4918).abs() < 1e-4);
}

#[test]
fn sigma_stays_in_unit_interval() {
    let scan = mps_find(&disk(), MpsProblem::PolyharmNeumann(1), (0.5, 3.0), 12).unwrap();
    assert!(scan.curve.sigmas.iter().all(|s| (0.0..=1.0).contains(s)));
    assert_eq!(scan.curve.omegas.len(), 101);
}

#[test]
fn disk_minima_match_the_ball_spectrum() {
    let scan = mps_find(&disk(), MpsProblem::LaplaceNeumann, (1.5, 4.0), 20).unwrap();
    let spectrum = neumann_spectrum_ball(&BallSpec::new(2, 1.0).unwrap(), 12, 1).unwrap();
    let first = scan.eigen[0];
    assert!(rel(first.eigenvalue, 3.389_957_716_671_888_7) < 1e-8);
    let good: Vec<_> = scan.eigen.iter().filter(|e| e.sigma < 1e-6).collect();
    assert!(good.len() >= 3);
    for e in good {
        let best = spectrum
            .entries
            .iter()
            .map(|s| rel(e.eigenvalue, s.value))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-7, "{e:?}");
    }
}

#[test]
fn sigma_is_invariant_under_rigid_motions() {
    let e = Domain::ellipse(1.5, 2.0 / 3.0).unwrap();
    let moved = e.rotated(0.8).translated([1.0, 2.0]);
    for w in [0.9, 1.3, 1.7] {
        for p in [MpsProblem::LaplaceNeumann, MpsProblem::PolyharmNeumann(1)] {
            let a = mps_sigma(&e, &basis_on(&e, p, w)).unwrap();
            let b = mps_sigma(&moved, &basis_on(&moved, p, w)).unwrap();
            assert!((a - b).abs() < 1e-10, "{p:?} w={w} {a} {b}");
        }
    }
}

#[test]
fn converged_minima_are_stable_in_the_truncation() {
    let e = Domain::ellipse(1.5, 2.0 / 3.0).unwrap();
    let a = mps_find(&e, MpsProblem::LaplaceNeumann, (0.8, 2.0), 20).unwrap();
    let b = mps_find(&e, MpsProblem::LaplaceNeumann, (0.8, 2.0), 40).unwrap();
    assert!(rel(a.eigen[0].eigenvalue, b.eigen[0].eigenvalue) < 1e-8);
}

#[test]
fn ellipse_biharmonic_minimum_is_the_squared_laplacian_one() {
    let e = Domain::ellipse(1.5, 2.0 / 3.0).unwrap();
    let lap = mps_find(&e, MpsProblem::LaplaceNeumann, (0.8, 2.0), 20).unwrap();
    let bi = mps_find(&e, MpsProblem::PolyharmNeumann(1), (0.8, 2.0), 20).unwrap();
    let mu = lap.eigen[0].eigenvalue;
    assert!(rel(bi.eigen[0].eigenvalue, mu * mu) < 1e-3);
}

#[test]
fn unsupported_inputs() {
    let d = disk();
    assert!(matches!(
        mps_sigma(&d, &basis(MpsProblem::PolyharmNeumann(2), 1.0)),
        Err(MpsError::Power(2))
    ));
    assert!(matches!(
        mps_find(&d, MpsProblem::LaplaceNeumann, (2.0, 1.0), 10),
        Err(MpsError::Interval(..))
    ));
    assert!(matches!(mps_find(&d, MpsProblem::LaplaceNeumann, (1.0, 2.0), 61), Err(MpsError::Terms(61))));
    let tri = Domain::parse("polygon:0,0 2,0 0.4,1.1").unwrap();
    assert!(matches!(
        mps_sigma(&tri, &basis(MpsProblem::LaplaceNeumann, 1.0)),
        Err(MpsError::Nonsmooth(_))
    ));
    // a long thin superellipse about its centroid is still star-shaped
    let s = Domain::superellipse(2.0, 0.3, 6.0).unwrap();
    assert!(mps_sigma(&s, &basis(MpsProblem::LaplaceNeumann, 1.0)).is_ok());
    // an expansion center outside the domain is rejected
    let off = MpsBasis {
        center: [3.0, 0.0],
        ..basis(MpsProblem::LaplaceNeumann, 1.0)
    };
    assert!(matches!(mps_sigma(&s, &off), Err(MpsError::NotStarShaped(..))));
    // no minimum in a window without eigenfrequencies is an empty result
    let scan = mps_find(&d, MpsProblem::LaplaceNeumann, (0.3, 1.2), 10).unwrap();
    assert!(scan.eigen.is_empty());
}

#[test]
fn sigma_curve_csv() {
    let scan = mps_find(&disk(), MpsProblem::LaplaceNeumann, (1.5, 2.0), 8).unwrap();
    let csv = scan.curve.to_csv();
    assert!(csv.starts_with("omega,sigma\n"));
    assert_eq!(SigmaCurve::from_csv(&csv).unwrap(), scan.curve);
}
