//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Timed runs use a single worker thread.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use isospec::ballspec::{mu1_ball, neumann_spectrum_ball, upsilon1_ball, upsilon1_poly_ball, BallSpec};
use isospec::cli::{verify, FemArgs, VerificationReport, DEFAULT_H};
use isospec::fem::{convergence_study, eig_mesh, EigOptions, Operator};
use isospec::geometry::{domain_metrics, triangulate, Domain};
use isospec::mps::{mps_find, MpsProblem};
use isospec::specfun::{bessel_j, BesselOrder, RadialProfile};
use isospec::weinberger::{certify_upper_bound, find_center, trial_quotient, FIELD_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Upsilon_1` of the unit disk as quoted, from `nu_{1,1} = 1.8411838`.
const UPSILON_DISK: f64 = 11.49182;
/// `Upsilon_hat` of the unit disk for `m = 2`, as quoted.
const UPSILON_DISK_M2: f64 = 132.062;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn serial<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn fem_args() -> FemArgs {
    FemArgs {
        h: DEFAULT_H.to_vec(),
        order: 2,
        tol: isospec::fem::RESIDUAL_TOL,
    }
}

fn timed_verify(spec: &str, m: u32) -> (VerificationReport, f64) {
    let d = Domain::parse(spec).unwrap();
    let t = Instant::now();
    let r = serial(|| verify(&d, m, &fem_args(), None)).unwrap();
    (r, t.elapsed().as_secs_f64())
}

fn area_pi_ellipse(aspect: f64) -> String {
    format!("ellipse:{},{}", aspect.sqrt(), 1.0 / aspect.sqrt())
}

fn corpus() -> Vec<Domain> {
    [
        "disk:0,0,1",
        &area_pi_ellipse(1.2),
        &area_pi_ellipse(1.5),
        &area_pi_ellipse(2.0),
        "stadium:0.5,0.6",
        "polygon:0,0 1,0 1,1 0,1",
        "polygon:0,0 2,0 0.4,1.1",
    ]
    .iter()
    .map(|s| Domain::parse(s).unwrap())
    .collect()
}

fn criterion_1(disk: &(VerificationReport, f64)) -> Outcome {
    let (r, secs) = disk;
    let e = rel(r.upsilon_fem, UPSILON_DISK);
    outcome(
        e < 0.01 && *secs < 60.0,
        format!("disk Upsilon_fem {:.8}, relative error {e:.2e} (< 1e-2), {secs:.1} s (< 60 s)", r.upsilon_fem),
    )
}

fn criterion_2() -> Outcome {
    let b = BallSpec::new(2, 1.0).unwrap();
    let mu = mu1_ball(&b).unwrap();
    let mut algebraic = true;
    for m in 1..=4u32 {
        let mut p = 1.0;
        for _ in 0..2 * m {
            p *= mu;
        }
        algebraic &= upsilon1_poly_ball(&b, m).unwrap() == p;
    }
    let (r, secs) = timed_verify("disk:0,0,1", 2);
    let e = rel(r.upsilon_fem, UPSILON_DISK_M2);
    outcome(
        algebraic && e < 0.02 && secs < 180.0,
        format!(
            "Upsilon_hat = mu_1^(2m) exactly for m = 1..4: {algebraic}; FEM m=2 {:.5}, relative error {e:.2e} (< 2e-2), {secs:.1} s (< 180 s)",
            r.upsilon_fem
        ),
    )
}

fn criterion_3(ellipses: &[(f64, VerificationReport, f64)]) -> Outcome {
    let exact = upsilon1_ball(&BallSpec::new(2, 1.0).unwrap()).unwrap();
    let mut pass = (exact - UPSILON_DISK).abs() < 1e-5;
    let mut parts = Vec::new();
    for (aspect, r, secs) in ellipses {
        let strict = r.upsilon_fem + r.error_bar < UPSILON_DISK;
        let bound_ok = rel(r.certificate.bound, exact) <= 1e-10;
        pass &= strict && bound_ok && r.certificate.valid && *secs < 120.0;
        parts.push(format!(
            "aspect {aspect}: {:.6} + {:.1e} < {UPSILON_DISK}, bound err {:.1e}, {secs:.1} s",
            r.upsilon_fem,
            r.error_bar,
            rel(r.certificate.bound, exact)
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut worst_a: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    let mut pass = true;
    for d in corpus() {
        let radius = (domain_metrics(&d).area / PI).sqrt();
        let mu = mu1_ball(&BallSpec::new(2, radius).unwrap()).unwrap();
        for m in 1..=2u32 {
            let q = trial_quotient(&d, m).unwrap();
            let target = mu.powi(2 * m as i32);
            let ea = rel(q.identity, target);
            let eb = rel(q.quadrature, q.identity);
            worst_a = worst_a.max(ea);
            worst_b = worst_b.max(eb);
            let within = (q.quadrature - q.identity).abs() <= q.quadrature_error.max(1e-14 * target);
            pass &= ea <= 1e-14 && eb <= 1e-6 && within;
        }
    }
    outcome(
        pass,
        format!("path (a) worst {worst_a:.1e} (<= 1e-14); path (b) worst {worst_b:.1e} (<= 1e-6, within the error estimate)"),
    )
}

fn criterion_5() -> Outcome {
    let d = Domain::parse("polygon:0,0 2,0 0.4,1.1").unwrap();
    let c = find_center(&d, FIELD_TOL).unwrap();
    let cert = certify_upper_bound(&d, 1).unwrap();
    let mean = cert.mean_residuals.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let moved = d.rotated(0.7);
    let cm = find_center(&moved, FIELD_TOL).unwrap().center;
    let want = moved.placement().apply(c.center);
    let drift = (want[0] - cm[0]).abs().max((want[1] - cm[1]).abs());
    outcome(
        c.residual < 1e-10 && mean < 1e-8 && drift < 1e-10,
        format!(
            "center ({:.10}, {:.10}), residual {:.1e} (< 1e-10), mean residual {mean:.1e} (< 1e-8), rotation drift {drift:.1e} (< 1e-10)",
            c.center[0], c.center[1], c.residual
        ),
    )
}

fn criterion_6() -> Outcome {
    let d = Domain::square(1.0).unwrap();
    let mesh = triangulate(&d, 0.02).unwrap();
    let opts = EigOptions::default();
    let mu = eig_mesh(&mesh, 1, Operator::Laplacian, &opts).unwrap().values[0];
    let up = eig_mesh(&mesh, 1, Operator::Polyharmonic(1), &opts).unwrap().values[0];
    let (e1, e2) = (rel(mu, PI * PI), rel(up, PI.powi(4)));
    outcome(
        e1 < 3e-3 && e2 < 6e-3,
        format!("mu_1 {mu:.8} error {e1:.1e} (< 3e-3); Upsilon_1 {up:.6} error {e2:.1e} (< 6e-3)"),
    )
}

fn criterion_7() -> Outcome {
    let e = Domain::ellipse(1.5, 2.0 / 3.0).unwrap();
    let study = convergence_study(&e, Operator::Laplacian, &DEFAULT_H, &EigOptions::default()).unwrap();
    let scan = mps_find(&e, MpsProblem::LaplaceNeumann, (0.8, 2.0), 30).unwrap();
    let mps = scan.eigen[0].eigenvalue;
    let e1 = rel(mps, study.estimate);
    let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let scan = mps_find(&disk, MpsProblem::LaplaceNeumann, (1.5, 4.0), 30).unwrap();
    let exact = neumann_spectrum_ball(&BallSpec::new(2, 1.0).unwrap(), 3, 1).unwrap();
    let mut e2: f64 = 0.0;
    let mut found = 0;
    for s in &exact.entries {
        if let Some(best) = scan.eigen.iter().map(|x| rel(x.eigenvalue, s.value)).min_by(f64::total_cmp) {
            e2 = e2.max(best);
            found += 1;
        }
    }
    outcome(
        e1 < 1e-3 && e2 < 1e-7 && found == 3,
        format!(
            "ellipse MPS {mps:.8} vs FEM {:.8}: {e1:.1e} (< 1e-3); disk levels 1..3 worst {e2:.1e} (< 1e-7)",
            study.estimate
        ),
    )
}

fn criterion_8() -> Outcome {
    let opts = EigOptions::default();
    let mut worst: f64 = 0.0;
    for (spec, h) in [("disk:0,0,1", 0.08), ("ellipse:1.5,0.6667", 0.08), ("polygon:0,0 2,0 0.4,1.1", 0.1)] {
        let mesh = triangulate(&Domain::parse(spec).unwrap(), h).unwrap();
        for order in [1, 2] {
            let o = EigOptions { order, ..opts };
            let lap = eig_mesh(&mesh, 4, Operator::Laplacian, &o).unwrap();
            let bi = eig_mesh(&mesh, 4, Operator::Polyharmonic(1), &o).unwrap();
            for (a, b) in lap.values.iter().zip(&bi.values) {
                worst = worst.max(rel(*b, a * a));
            }
        }
    }
    outcome(worst <= 1e-9, format!("worst |Upsilon - mu^2| / Upsilon {worst:.1e} (<= 1e-9) over 3 meshes, P1 and P2"))
}

fn j(nu: f64, x: f64) -> f64 {
    if nu == -0.5 {
        (2.0 / (PI * x)).sqrt() * x.cos()
    } else {
        bessel_j(BesselOrder::new(nu).unwrap(), x).unwrap()
    }
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let mut recurrence: f64 = 0.0;
    for nu in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let mut x = 0.1;
        while x < 40.0 {
            let (lo, mid, hi) = (j(nu - 1.0, x), j(nu, x), j(nu + 1.0, x));
            let rhs = 2.0 * nu / x * mid;
            recurrence = recurrence.max((lo + hi - rhs).abs() / lo.abs().max(hi.abs()).max(rhs.abs()));
            x += 0.0137;
        }
    }
    let mut ode: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    for n in 2..=5usize {
        let p = RadialProfile::for_ball(n, 1.0).unwrap();
        let nf = n as f64;
        for _ in 0..100 {
            let r: f64 = rng.random_range(0.01..3.0);
            let (g, gp) = p.eval(r).unwrap();
            let gpp = p.second_derivative(r).unwrap();
            let terms = [gpp, (nf - 1.0) / r * gp, p.mu() * g, (nf - 1.0) / (r * r) * g];
            let scale = terms.iter().fold(0.0f64, |a, t| a.max(t.abs()));
            ode = ode.max((terms[0] + terms[1] + terms[2] - terms[3]).abs() / scale);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        recurrence <= 1e-11 && ode <= 1e-10 && secs < 10.0,
        format!("recurrence {recurrence:.1e} (<= 1e-11), ODE residual {ode:.1e} (<= 1e-10), {secs:.2} s (< 10 s)"),
    )
}

fn criterion_10(disk: &(VerificationReport, f64), smooth: &[VerificationReport]) -> Outcome {
    let r = &disk.0;
    let mut pass = r.margin.abs() <= r.error_bar;
    let mut parts = vec![format!("disk |margin| {:.1e} <= error bar {:.1e}", r.margin.abs(), r.error_bar)];
    for s in smooth {
        let strict = s.upsilon_fem + s.error_bar < s.bound;
        pass &= strict && !s.nonsmooth;
        parts.push(format!("{}: margin {:.3}", s.domain, s.margin));
    }
    outcome(pass, parts.join("; "))
}

fn run(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let res = catch_unwind(AssertUnwindSafe(f));
    let (pass, detail) = match res {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    println!("criterion {n:>2}: {}  {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() {
    // the libtest runner passes filter flags; this target has no filters
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let disk = timed_verify("disk:0,0,1", 1);
    let ellipses: Vec<(f64, VerificationReport, f64)> = [1.2, 1.5, 2.0]
        .into_iter()
        .map(|a| {
            let (r, s) = timed_verify(&area_pi_ellipse(a), 1);
            (a, r, s)
        })
        .collect();
    let mut smooth: Vec<VerificationReport> = ellipses.iter().map(|(_, r, _)| r.clone()).collect();
    smooth.push(timed_verify("stadium:0.5,0.6", 1).0);

    let results = [
        run(1, || criterion_1(&disk)),
        run(2, criterion_2),
        run(3, || criterion_3(&ellipses)),
        run(4, criterion_4),
        run(5, criterion_5),
        run(6, criterion_6),
        run(7, criterion_7),
        run(8, criterion_8),
        run(9, criterion_9),
        run(10, || criterion_10(&disk, &smooth)),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
