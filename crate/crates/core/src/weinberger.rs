//! Trial functions `u_i = G(r) x_i / r` centred at a zero of the Hopf
//! field, and the upper-bound certificate
//! `Upsilon_1(Omega) <= mu_1(B_Omega)^{2m}` they realize.
//!
//! `G` is the first radial Neumann profile of the equal-area disk, used
//! for all `r >= 0` without modification. With `L = d^2/dr^2 + (1/r) d/dr
//! - 1/r^2`, the pointwise identity `(L^m G)^2 = mu_1^{2m} G^2` makes the
//! Rayleigh quotient independent of the domain; the certificate checks it
//! both through the identity and by direct quadrature of `(L^m G)^2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::ballspec::{mu1_ball, upsilon1_poly_ball, BallError, BallSpec, MAX_POLY_M};
use crate::geometry::metrics::hull_source;
use crate::geometry::{convex_hull, domain_metrics, Domain, DomainRule, GeometryError, Point};
use crate::specfun::{jv, RadialProfile, SpecFunError};

/// Quadrature mesh size relative to the equal-area radius.
const MESH_FACTOR: f64 = 1.0 / 12.0;
/// Newton step budget.
const MAX_NEWTON: usize = 60;
/// Below this `s r` the operator is applied to the power series.
const SERIES_SWITCH: f64 = 3.0;
const SERIES_TERMS: usize = 40;
/// Default scaled tolerance on the Hopf field.
pub const FIELD_TOL: f64 = 1e-12;
/// Scaled tolerance on each `|int u_i|` for a valid certificate.
pub const MEAN_TOL: f64 = 1e-8;
/// Relative agreement required between the two quotient paths.
pub const QUOTIENT_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum WeinbergerError {
    #[error("Hopf field did not vanish after {iterations} Newton steps (best scaled residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("point ({0}, {1}) is outside the convex hull")]
    OutsideHull(f64, f64),
    #[error("m = {0} outside 1..=8")]
    Power(u32),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

pub type Result<T> = std::result::Result<T, WeinbergerError>;

/// `G(r) = g(r) = J_1(sqrt(mu_1) r)` for the disk of the same area.
#[derive(Debug, Clone, Copy)]
pub struct TrialProfile {
    pub n: usize,
    pub mu1: f64,
    pub radius: f64,
    profile: RadialProfile,
}

impl TrialProfile {
    pub fn for_area(area: f64) -> Result<Self> {
        let radius = (area / PI).sqrt();
        let ball = BallSpec::new(2, radius)?;
        Ok(Self {
            n: 2,
            mu1: mu1_ball(&ball)?,
            radius,
            profile: RadialProfile::for_ball(2, radius)?,
        })
    }

    pub fn for_domain(d: &Domain) -> Result<Self> {
        Self::for_area(domain_metrics(d).area)
    }

    pub fn scale(&self) -> f64 {
        self.profile.scale()
    }

    pub fn g(&self, r: f64) -> f64 {
        self.profile.eval_unchecked(r).0
    }

    pub fn g_prime(&self, r: f64) -> f64 {
        self.profile.eval_unchecked(r).1
    }

    /// `G(r)/r`, equal to `G'(0)` at the origin.
    pub fn g_over_r(&self, r: f64) -> f64 {
        self.profile.g_over_r(r)
    }

    /// `L^m G` evaluated without the radial equation: termwise on the
    /// power series near the origin, and through the derivative formula
    /// `J_1^{(k)}(x) = 2^{-k} sum_j (-1)^j C(k, j) J_{1-k+2j}(x)` beyond.
    pub fn lm_g(&self, m: u32, r: f64) -> f64 {
        let s = self.scale();
        if s * r < SERIES_SWITCH {
            let a = self.profile.series_coefficients(SERIES_TERMS);
            let n = self.n as f64;
            let mut total = 0.0;
            for (k, ak) in a.iter().enumerate() {
                if k < m as usize {
                    continue;
                }
                // L r^{2j+1} = 2j (2j + n) r^{2j-1}
                let mut c = *ak;
                for i in 0..m as usize {
                    let j = (k - i) as f64;
                    c *= 2.0 * j * (2.0 * j + n);
                }
                total += c * r.powi((2 * (k - m as usize) + 1) as i32);
            }
            return total;
        }
        let x = s * r;
        let mut total = 0.0;
        for ((e, d), c) in operator_expansion(self.n, m) {
            total += c * r.powi(-(e as i32)) * s.powi(d as i32) * j1_derivative(d, x);
        }
        total
    }
}

/// `J_k` for integer `k` of either sign.
fn j_integer(k: i64, x: f64) -> f64 {
    let v = jv(k.unsigned_abs() as f64, x);
    if k < 0 && k % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `d^k/dx^k J_1(x)`.
fn j1_derivative(k: u32, x: f64) -> f64 {
    let mut binom = 1.0;
    let mut sum = 0.0;
    for j in 0..=k {
        if j > 0 {
            binom *= (k - j + 1) as f64 / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * j_integer(1 - k as i64 + 2 * j as i64, x);
    }
    sum / 2f64.powi(k as i32)
}

/// `L^m` as a sum of `c r^{-e} D^d`, keyed by `(e, d)`.
fn operator_expansion(n: usize, m: u32) -> BTreeMap<(u32, u32), f64> {
    let a = (n - 1) as f64;
    let mut terms = BTreeMap::from([((0u32, 0u32), 1.0)]);
    for _ in 0..m {
        let mut next = BTreeMap::new();
        let mut add = |k: (u32, u32), v: f64| *next.entry(k).or_insert(0.0) += v;
        for (&(e, d), &c) in &terms {
            let ef = e as f64;
            // D^2 (r^{-e} D^d)
            add((e + 2, d), c * ef * (ef + 1.0));
            add((e + 1, d + 1), -2.0 * c * ef);
            add((e, d + 2), c);
            // (n-1) r^{-1} D (r^{-e} D^d)
            add((e + 2, d), -a * c * ef);
            add((e + 1, d + 1), a * c);
            // -(n-1) r^{-2} r^{-e} D^d
            add((e + 2, d), -a * c);
        }
        terms = next.into_iter().filter(|(_, v)| *v != 0.0).collect();
    }
    terms
}

/// Quadrature of the trial integrands over one domain.
pub struct TrialSetup {
    pub domain: Domain,
    pub profile: TrialProfile,
    pub rule: DomainRule,
    pub area: f64,
    hull: Vec<Point>,
    diameter: f64,
    centroid: Point,
}

impl TrialSetup {
    pub fn new(d: &Domain) -> Result<Self> {
        let metrics = domain_metrics(d);
        let profile = TrialProfile::for_area(metrics.area)?;
        let rule = DomainRule::new(d, MESH_FACTOR * profile.radius)?;
        Ok(Self {
            domain: d.clone(),
            profile,
            rule,
            area: metrics.area,
            hull: convex_hull(&hull_source(d)),
            diameter: metrics.diameter,
            centroid: metrics.centroid,
        })
    }

    pub fn in_hull(&self, p: Point) -> bool {
        let h = &self.hull;
        (0..h.len()).all(|i| {
            let a = h[i];
            let b = h[(i + 1) % h.len()];
            (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
        })
    }

    /// `V(x0) = int (x - x0) G(r) / r`.
    pub fn field(&self, x0: Point) -> Result<[f64; 2]> {
        let p = &self.profile;
        let vx = self.rule.integrate(
            |x, y| {
                let (dx, dy) = (x - x0[0], y - x0[1]);
                dx * p.g_over_r(dx.hypot(dy))
            },
            7,
        )?;
        let vy = self.rule.integrate(
            |x, y| {
                let (dx, dy) = (x - x0[0], y - x0[1]);
                dy * p.g_over_r(dx.hypot(dy))
            },
            7,
        )?;
        Ok([vx, vy])
    }

    /// `int |G(r)|`, the scale of all field residuals.
    pub fn scale(&self, x0: Point) -> Result<f64> {
        let p = &self.profile;
        Ok(self
            .rule
            .integrate(|x, y| p.g((x - x0[0]).hypot(y - x0[1])).abs(), 7)?)
    }
}

/// Hopf field of `d` at `x0`.
pub fn hopf_field(d: &Domain, x0: Point, p: &TrialProfile) -> Result<[f64; 2]> {
    let mut setup = TrialSetup::new(d)?;
    setup.profile = *p;
    if !setup.in_hull(x0) {
        return Err(WeinbergerError::OutsideHull(x0[0], x0[1]));
    }
    setup.field(x0)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CenterSearch {
    pub center: Point,
    /// `|V(center)| / int |G|`.
    pub residual: f64,
    pub iterations: usize,
    pub start: Point,
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Damped Newton iteration on `V` from the centroid, with a
/// central-difference Jacobian; steps are halved until the residual
/// decreases and the iterate stays in the convex hull.
pub fn find_center_with(setup: &TrialSetup, tol: f64) -> Result<CenterSearch> {
    if !(tol > 0.0) {
        return Err(WeinbergerError::Tolerance(tol));
    }
    let start = setup.centroid;
    let step = 1e-5 * setup.diameter;
    let mut x = start;
    let mut v = setup.field(x)?;
    let mut res = norm(v) / setup.scale(x)?;
    for it in 0..MAX_NEWTON {
        if res <= tol {
            return Ok(CenterSearch {
                center: x,
                residual: res,
                iterations: it,
                start,
            });
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += step;
            xm[k] -= step;
            let (fp, fm) = (setup.field(xp)?, setup.field(xm)?);
            for i in 0..2 {
                jac[i][k] = (fp[i] - fm[i]) / (2.0 * step);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let dx = [
            (jac[1][1] * v[0] - jac[0][1] * v[1]) / det,
            (jac[0][0] * v[1] - jac[1][0] * v[0]) / det,
        ];
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial = [x[0] - t * dx[0], x[1] - t * dx[1]];
            if det.is_finite() && det != 0.0 && setup.in_hull(trial) {
                let vt = setup.field(trial)?;
                let rt = norm(vt) / setup.scale(trial)?;
                if rt < res {
                    x = trial;
                    v = vt;
                    res = rt;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if res <= tol {
        return Ok(CenterSearch {
            center: x,
            residual: res,
            iterations: MAX_NEWTON,
            start,
        });
    }
    Err(WeinbergerError::NoConvergence {
        iterations: MAX_NEWTON,
        residual: res,
    })
}

/// Zero of the Hopf field with `|V| <= tol * int |G|`.
pub fn find_center(d: &Domain, tol: f64) -> Result<CenterSearch> {
    find_center_with(&TrialSetup::new(d)?, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrialQuotient {
    pub m: u32,
    /// `mu_1^{2m} int G^2 / int G^2`.
    pub identity: f64,
    /// `int (L^m G)^2 / int G^2` by quadrature.
    pub quadrature: f64,
    /// Estimate of the quadrature error in `quadrature`.
    pub quadrature_error: f64,
    pub center: Point,
}

pub fn trial_quotient_with(setup: &TrialSetup, center: Point, m: u32) -> Result<TrialQuotient> {
    if !(1..=MAX_POLY_M).contains(&m) {
        return Err(WeinbergerError::Power(m));
    }
    let p = &setup.profile;
    let r = |x: f64, y: f64| (x - center[0]).hypot(y - center[1]);
    let (den, den_err) = setup.rule.integrate_with_error(|x, y| p.g(r(x, y)).powi(2))?;
    let (num, num_err) = setup.rule.integrate_with_error(|x, y| p.lm_g(m, r(x, y)).powi(2))?;
    let lam = p.mu1.powi(2 * m as i32);
    let identity = lam * den / den;
    let quadrature = num / den;
    // first-order propagation of both estimates plus a round-off floor
    let quadrature_error = quadrature * (num_err / num.abs() + den_err / den.abs()) + 64.0 * f64::EPSILON * quadrature;
    Ok(TrialQuotient {
        m,
        identity,
        quadrature,
        quadrature_error,
        center,
    })
}

/// Both quotient paths at the Hopf center of `d`.
pub fn trial_quotient(d: &Domain, m: u32) -> Result<TrialQuotient> {
    let setup = TrialSetup::new(d)?;
    let c = find_center_with(&setup, FIELD_TOL)?;
    trial_quotient_with(&setup, c.center, m)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrialCertificate {
    pub domain: String,
    pub m: u32,
    pub n: usize,
    pub area: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub center: Point,
    pub field_residual: f64,
    pub mean_residuals: Vec<f64>,
    pub quotient_identity: f64,
    pub quotient_quadrature: f64,
    pub bound: f64,
    pub valid: bool,
    #[serde(skip)]
    pub quadrature_error: f64,
    #[serde(skip)]
    pub start: Point,
}

/// Certificate for `Upsilon_1(Omega) <= bound` with
/// `bound = mu_1(B_Omega)^{2m}`. Tolerance failures make it invalid
/// instead of raising.
pub fn certify_upper_bound(d: &Domain, m: u32) -> Result<TrialCertificate> {
    if !(1..=MAX_POLY_M).contains(&m) {
        return Err(WeinbergerError::Power(m));
    }
    let setup = TrialSetup::new(d)?;
    let ball = BallSpec::new(2, setup.profile.radius)?;
    let bound = upsilon1_poly_ball(&ball, m)?;
    let (center, field_residual, start) = match find_center_with(&setup, FIELD_TOL) {
        Ok(c) => (c.center, c.residual, c.start),
        Err(WeinbergerError::NoConvergence { .. }) => {
            let c = setup.centroid;
            (c, norm(setup.field(c)?) / setup.scale(c)?, c)
        }
        Err(e) => return Err(e),
    };
    let scale = setup.scale(center)?;
    let p = &setup.profile;
    let mean_residuals: Vec<f64> = (0..2)
        .map(|i| {
            let v = setup.rule.integrate(
                |x, y| {
                    let d = [x - center[0], y - center[1]];
                    p.g(d[0].hypot(d[1])) * if d[0] == 0.0 && d[1] == 0.0 { 0.0 } else { d[i] / d[0].hypot(d[1]) }
                },
                7,
            )?;
            Ok(v.abs() / scale)
        })
        .collect::<Result<_>>()?;
    let q = trial_quotient_with(&setup, center, m)?;
    let gap = (q.quadrature - q.identity).abs();
    let valid = field_residual <= FIELD_TOL
        && mean_residuals.iter().all(|&r| r <= MEAN_TOL)
        && gap <= q.quadrature_error.max(1e-12 * bound)
        && gap <= QUOTIENT_TOL * bound
        && (q.identity - bound).abs() <= 1e-12 * bound;
    Ok(TrialCertificate {
        domain: d.spec_string(),
        m,
        n: 2,
        area: setup.area,
        radius: setup.profile.radius,
        center,
        field_residual,
        mean_residuals,
        quotient_identity: q.identity,
        quotient_quadrature: q.quadrature,
        bound,
        valid,
        quadrature_error: q.quadrature_error,
        start,
    })
}
