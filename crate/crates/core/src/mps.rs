//! Method of particular solutions for Neumann eigenvalues on smooth,
//! star-shaped planar domains.
//!
//! Trial functions are Fourier-Bessel expansions about the centroid. For
//! `Delta^2` the factorization `Delta^2 - w^4 = (Delta - w^2)(Delta + w^2)`
//! adds the modified family `I_j(w r)`, with `Delta` acting as `-w^2` on
//! the `J` part and `+w^2` on the `I` part. Eigenfrequencies are the
//! minima of the smallest generalized singular value of the boundary
//! system relative to interior values.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{domain_metrics, Domain, Point};
use crate::specfun::{iv_scaled, jv};

pub const MAX_TERMS: usize = 60;
/// Boundary collocation points per angular term.
const BOUNDARY_FACTOR: usize = 4;
/// Interior normalization points per angular term.
const INTERIOR_FACTOR: usize = 2;
/// Singular values of the stacked system below this fraction of the
/// largest span no usable direction.
const RANK_TOL: f64 = 1e-14;
const INTERIOR_SEED: u64 = 0x1e7e_5eed;
/// Grid step of the frequency scan relative to the interval.
const GRID_FRACTION: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum MpsError {
    #[error("MPS needs a smooth boundary; {0} domains are not supported")]
    Nonsmooth(&'static str),
    #[error("domain is not star-shaped about ({0}, {1})")]
    NotStarShaped(f64, f64),
    #[error("angular truncation {0} outside 1..=60")]
    Terms(usize),
    #[error("frequency must be finite and positive, got {0}")]
    Frequency(f64),
    #[error("interval ({0}, {1}) is not a positive increasing range")]
    Interval(f64, f64),
    #[error("only m = 1 is implemented for the poly-Laplacian, got {0}")]
    Power(usize),
    #[error("collocation system has numerical rank 0 at w = {0}")]
    IllConditioned(f64),
}

pub type Result<T> = std::result::Result<T, MpsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MpsProblem {
    LaplaceNeumann,
    /// `Delta^{2m}`; only `m = 1` is supported.
    PolyharmNeumann(usize),
}

impl MpsProblem {
    /// Eigenvalue belonging to frequency `w`: `w^2` for the Laplacian and
    /// `w^{4m}` for `Delta^{2m}`.
    pub fn eigenvalue(self, omega: f64) -> f64 {
        match self {
            MpsProblem::LaplaceNeumann => omega * omega,
            MpsProblem::PolyharmNeumann(m) => omega.powi(4 * m as i32),
        }
    }

    fn check(self) -> Result<()> {
        match self {
            MpsProblem::PolyharmNeumann(m) if m != 1 => Err(MpsError::Power(m)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MpsBasis {
    pub problem: MpsProblem,
    pub omega: f64,
    pub terms: usize,
    /// Expansion center; the domain must be star-shaped about it.
    pub center: Point,
}

/// Boundary and interior samples shared by all frequencies.
#[derive(Debug, Clone)]
pub struct Collocation {
    pub center: Point,
    /// boundary points with outward unit normals
    pub boundary: Vec<(Point, Point)>,
    pub interior: Vec<Point>,
    pub terms: usize,
}

impl Collocation {
    /// Samples for an expansion about the centroid.
    pub fn new(d: &Domain, terms: usize) -> Result<Self> {
        Self::with_center(d, terms, domain_metrics(d).centroid)
    }

    pub fn with_center(d: &Domain, terms: usize, center: Point) -> Result<Self> {
        if !(1..=MAX_TERMS).contains(&terms) {
            return Err(MpsError::Terms(terms));
        }
        if d.nonsmooth() {
            return Err(MpsError::Nonsmooth(d.kind()));
        }
        let nb = BOUNDARY_FACTOR * terms.max(8);
        let boundary: Vec<(Point, Point)> = (0..nb)
            .map(|k| {
                let u = k as f64 / nb as f64;
                (d.boundary_point(u).unwrap(), d.boundary_normal(u).unwrap())
            })
            .collect();
        // star-shaped: polar angle about the center increases monotonically
        let mut turned = 0.0;
        for k in 0..nb {
            let p = boundary[k].0;
            let q = boundary[(k + 1) % nb].0;
            let a = (p[1] - center[1]).atan2(p[0] - center[0]);
            let b = (q[1] - center[1]).atan2(q[0] - center[0]);
            let mut da = b - a;
            if da <= -std::f64::consts::PI {
                da += 2.0 * std::f64::consts::PI;
            } else if da > std::f64::consts::PI {
                da -= 2.0 * std::f64::consts::PI;
            }
            if !(da > 0.0) {
                return Err(MpsError::NotStarShaped(center[0], center[1]));
            }
            turned += da;
        }
        if (turned - 2.0 * std::f64::consts::PI).abs() > 1e-9 {
            return Err(MpsError::NotStarShaped(center[0], center[1]));
        }
        // interior points drawn in the body frame so they move with the domain
        let pl = d.placement();
        let local: Vec<Point> = boundary.iter().map(|(p, _)| pl.inverse_apply(*p)).collect();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &local {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(INTERIOR_SEED);
        let ni = INTERIOR_FACTOR * terms.max(8);
        let mut interior = Vec::with_capacity(ni);
        while interior.len() < ni {
            let p = [
                lo[0] + rng.random::<f64>() * (hi[0] - lo[0]),
                lo[1] + rng.random::<f64>() * (hi[1] - lo[1]),
            ];
            if d.shape().contains_local(p) {
                interior.push(pl.apply(p));
            }
        }
        Ok(Self {
            center,
            boundary,
            interior,
            terms,
        })
    }

    fn max_radius(&self) -> f64 {
        self.boundary
            .iter()
            .map(|(p, _)| p)
            .chain(&self.interior)
            .map(|p| (p[0] - self.center[0]).hypot(p[1] - self.center[1]))
            .fold(0.0, f64::max)
    }

    /// Stacked system: boundary rows first, then interior value rows.
    fn matrix(&self, problem: MpsProblem, omega: f64) -> (DMatrix<f64>, usize) {
        let with_i = matches!(problem, MpsProblem::PolyharmNeumann(_));
        let n = self.terms;
        let per_family = 2 * n + 1;
        let cols = if with_i { 2 * per_family } else { per_family };
        let nb = self.boundary.len();
        let boundary_rows = if with_i { 2 * nb } else { nb };
        let rows = boundary_rows + self.interior.len();
        let mut a = DMatrix::zeros(rows, cols);
        // I_j columns share the factor e^{-x_max} so nothing overflows
        let x_max = omega * self.max_radius();
        let radial = |x: f64| -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
            let j: Vec<f64> = (0..=n + 1).map(|k| jv(k as f64, x)).collect();
            let jp: Vec<f64> = (0..=n)
                .map(|k| if k == 0 { -j[1] } else { 0.5 * (j[k - 1] - j[k + 1]) })
                .collect();
            if !with_i {
                return (j, jp, Vec::new(), Vec::new());
            }
            let w = (x - x_max).exp();
            let i: Vec<f64> = (0..=n + 1).map(|k| iv_scaled(k as f64, x) * w).collect();
            let ip: Vec<f64> = (0..=n)
                .map(|k| if k == 0 { i[1] } else { 0.5 * (i[k - 1] + i[k + 1]) })
                .collect();
            (j, jp, i, ip)
        };
        let polar = |p: Point| {
            let dx = p[0] - self.center[0];
            let dy = p[1] - self.center[1];
            (dx.hypot(dy), dy.atan2(dx))
        };
        // normal derivative of f(w r) trig(k t) given f, f'
        let dn = |f: f64, fp: f64, k: usize, r: f64, t: f64, nrm: Point, sine: bool| {
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            let (val_r, val_t) = if sine {
                (omega * fp * s, kf * f * c / r)
            } else {
                (omega * fp * c, -kf * f * s / r)
            };
            let (st, ct) = t.sin_cos();
            let er = [ct, st];
            let et = [-st, ct];
            val_r * (er[0] * nrm[0] + er[1] * nrm[1]) + val_t * (et[0] * nrm[0] + et[1] * nrm[1])
        };
        for (row, &(p, nrm)) in self.boundary.iter().enumerate() {
            let (r, t) = polar(p);
            let (j, jp, i, ip) = radial(omega * r);
            for k in 0..=n {
                // cos(k t) in column 2k, sin(k t) in column 2k - 1
                for sine in [false, true] {
                    if sine && k == 0 {
                        continue;
                    }
                    let col = if sine { 2 * k - 1 } else { 2 * k };
                    let cj = dn(j[k], jp[k], k, r, t, nrm, sine);
                    a[(row, col)] = cj;
                    if with_i {
                        let ci = dn(i[k], ip[k], k, r, t, nrm, sine);
                        a[(row, per_family + col)] = ci;
                        // d_n Delta u: -w^2 on J, +w^2 on I (scaled by 1/w^2)
                        a[(nb + row, col)] = -cj;
                        a[(nb + row, per_family + col)] = ci;
                    }
                }
            }
        }
        for (q, &p) in self.interior.iter().enumerate() {
            let row = boundary_rows + q;
            let (r, t) = polar(p);
            let (j, _, i, _) = radial(omega * r);
            for k in 0..=n {
                let (s, c) = (k as f64 * t).sin_cos();
                a[(row, 2 * k)] = j[k] * c;
                if k > 0 {
                    a[(row, 2 * k - 1)] = j[k] * s;
                }
                if with_i {
                    a[(row, per_family + 2 * k)] = i[k] * c;
                    if k > 0 {
                        a[(row, per_family + 2 * k - 1)] = i[k] * s;
                    }
                }
            }
        }
        (a, boundary_rows)
    }

    /// Smallest generalized singular value `min |B c| / |[B; I] c|`.
    pub fn sigma(&self, problem: MpsProblem, omega: f64) -> Result<f64> {
        problem.check()?;
        if !(omega.is_finite() && omega > 0.0) {
            return Err(MpsError::Frequency(omega));
        }
        let (mut a, nb) = self.matrix(problem, omega);
        for mut col in a.column_iter_mut() {
            let s = col.amax();
            if s > 0.0 {
                col /= s;
            }
        }
        let svd = a.svd(true, false);
        let u = svd.u.expect("requested U");
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > RANK_TOL * smax)
            .collect();
        if keep.is_empty() {
            return Err(MpsError::IllConditioned(omega));
        }
        let ub = DMatrix::from_fn(nb, keep.len(), |i, j| u[(i, keep[j])]);
        let s = ub.singular_values();
        Ok(s.min().clamp(0.0, 1.0))
    }
}

/// `sigma(w)` for `basis` on `d`.
pub fn mps_sigma(d: &Domain, basis: &MpsBasis) -> Result<f64> {
    let c = Collocation::with_center(d, basis.terms, basis.center)?;
    c.sigma(basis.problem, basis.omega)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SigmaCurve {
    pub omegas: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl SigmaCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega,sigma\n");
        for (w, v) in self.omegas.iter().zip(&self.sigmas) {
            s.push_str(&format!("{:.16e},{:.16e}\n", w, v));
        }
        s
    }

    pub fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "omega,sigma" => {}
            _ => return Err("line 1: expected header omega,sigma".into()),
        }
        let mut omegas = Vec::new();
        let mut sigmas = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |p: Option<&str>| -> std::result::Result<f64, String> {
                p.ok_or_else(|| format!("line {}: missing field", i + 1))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| format!("line {}: {}", i + 1, e))
            };
            omegas.push(parse(parts.next())?);
            sigmas.push(parse(parts.next())?);
            if parts.next().is_some() {
                return Err(format!("line {}: too many fields", i + 1));
            }
        }
        Ok(Self { omegas, sigmas })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MpsEigen {
    pub omega: f64,
    pub eigenvalue: f64,
    /// `sigma` at the minimum; small values mean a reliable eigenvalue.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MpsScan {
    pub problem: MpsProblem,
    pub terms: usize,
    pub curve: SigmaCurve,
    pub eigen: Vec<MpsEigen>,
}

fn golden_min(c: &Collocation, problem: MpsProblem, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let mut fa = c.sigma(problem, a)?;
    let mut fb = c.sigma(problem, b)?;
    while hi - lo > 1e-14 * hi {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = c.sigma(problem, a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = c.sigma(problem, b)?;
        }
    }
    Ok(if fa < fb { (a, fa) } else { (b, fb) })
}

/// Scan `sigma` over `(lo, hi)` with step `0.01 (hi - lo)` and refine
/// each interior local minimum by golden-section search.
pub fn mps_find(d: &Domain, problem: MpsProblem, interval: (f64, f64), terms: usize) -> Result<MpsScan> {
    problem.check()?;
    let (lo, hi) = interval;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(MpsError::Interval(lo, hi));
    }
    let c = Collocation::new(d, terms)?;
    let steps = (1.0 / GRID_FRACTION).round() as usize;
    let omegas: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let sigmas: Vec<f64> = omegas
        .par_iter()
        .map(|&w| c.sigma(problem, w))
        .collect::<Result<_>>()?;
    let mut eigen = Vec::new();
    for k in 1..steps {
        if sigmas[k] <= sigmas[k - 1] && sigmas[k] < sigmas[k + 1] {
            let (w, s) = golden_min(&c, problem, omegas[k - 1], omegas[k + 1])?;
            eigen.push(MpsEigen {
                omega: w,
                eigenvalue: problem.eigenvalue(w),
                sigma: s,
            });
        }
    }
    Ok(MpsScan {
        problem,
        terms,
        curve: SigmaCurve { omegas, sigmas },
        eigen,
    })
}
