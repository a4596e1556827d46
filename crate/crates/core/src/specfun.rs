//! Bessel functions of real order, the radial Neumann eigenprofile
//! `g(r) = r^{-(n-2)/2} J_{n/2}(s r)` and zero finding for the radial
//! Neumann condition on the unit ball.
//!
//! `J_nu` is evaluated by its power series for small arguments and by
//! Steed's continued-fraction method (CF1 + CF2 with downward recurrence)
//! otherwise. Half-integer orders with `x >= nu` use the closed
//! trigonometric forms of the spherical Bessel functions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Argument above which the power series is abandoned for `J_nu`.
const SERIES_LIMIT: f64 = 2.0;
/// Largest argument accepted by [`bessel_i`] before reporting overflow.
pub const BESSEL_I_MAX_ARG: f64 = 500.0;

const SCAN_STEP: f64 = 0.1;
const BISECT_WIDTH: f64 = 1e-13;
const MAX_DIMENSION: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("negative argument x = {0}")]
    NegativeArgument(f64),
    #[error("non-finite input")]
    NonFinite,
    #[error("invalid Bessel order {0}: must be finite and non-negative")]
    InvalidOrder(f64),
    #[error("I_{nu}({x}) overflows; use the scaled variant")]
    Overflow { nu: f64, x: f64 },
    #[error("derivative of J_{0} is unbounded at the origin")]
    SingularDerivative(f64),
    #[error("dimension n = {0} outside the supported range 2..=16")]
    Dimension(usize),
    #[error("no sign change bracketing the first derivative zero for n = {n} below x = {limit}")]
    Bracketing { n: usize, limit: f64 },
    #[error("zero scan failed to resolve zero (j = {j}, l = {l})")]
    ScanResolution { j: usize, l: usize },
    #[error("continued fraction failed to converge for nu = {nu}, x = {x}")]
    Convergence { nu: f64, x: f64 },
    #[error("malformed zero table: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

/// Order of a Bessel function; finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(Self(nu))
        } else {
            Err(SpecFunError::InvalidOrder(nu))
        }
    }

    /// Order `j + (n-2)/2` of the degree-`j` radial solution in dimension `n`.
    pub fn for_degree(n: usize, j: usize) -> Self {
        Self(j as f64 + (n as f64 - 2.0) / 2.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite);
    }
    if x < 0.0 {
        return Err(SpecFunError::NegativeArgument(x));
    }
    Ok(())
}

/// `Gamma(nu + 1)`, exact products for integer and half-integer `nu`.
pub(crate) fn gamma_plus_one(nu: f64) -> f64 {
    if nu <= 170.0 && (2.0 * nu).fract() == 0.0 {
        if nu.fract() == 0.0 {
            (1..=nu as u64).fold(1.0, |acc, k| acc * k as f64)
        } else {
            let k = (nu - 0.5) as u64;
            (0..=k).fold(PI.sqrt(), |acc, i| acc * (i as f64 + 0.5))
        }
    } else {
        statrs::function::gamma::gamma(nu + 1.0)
    }
}

fn ln_gamma_plus_one(nu: f64) -> f64 {
    if nu <= 170.0 {
        gamma_plus_one(nu).ln()
    } else {
        statrs::function::gamma::ln_gamma(nu + 1.0)
    }
}

/// Integer power by repeated squaring; deterministic bit pattern for a
/// given `(x, k)` independent of platform `powi` lowering.
pub fn ipow(x: f64, k: u32) -> f64 {
    let mut base = x;
    let mut exp = k;
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        exp >>= 1;
        if exp > 0 {
            base *= base;
        }
    }
    acc
}

fn j_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = if nu > 150.0 {
        (nu * half.ln() - ln_gamma_plus_one(nu)).exp()
    } else {
        half.powf(nu) / gamma_plus_one(nu)
    };
    let mut sum = term;
    for k in 1..300 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Spherical-Bessel route for `nu = k + 1/2`, valid when `x >= nu`
/// (upward recurrence is stable there).
fn j_half_integer(k: usize, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let mut prev = s / x;
    if k == 0 {
        return (2.0 * x / PI).sqrt() * prev;
    }
    let mut cur = s / (x * x) - c / x;
    for i in 1..k {
        let next = (2 * i + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    (2.0 * x / PI).sqrt() * cur
}

/// Steed's method: CF1 for `J'_nu/J_nu`, downward recurrence to
/// `mu = nu - nl` in `[-1/2, 1/2)`, CF2 for `(p + iq)` and the Wronskian
/// for normalisation. Requires `x >= 2`.
fn j_steed(nu: f64, x: f64) -> Result<f64> {
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;
    const MAXIT: usize = 100_000;

    let nl = ((nu - x + 1.5).floor()).max(0.0) as usize;
    let mu = nu - nl as f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::Convergence { nu, x });
    }

    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let mut rjl1 = rjl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > 1e250 {
            rjl *= 1e-250;
            rjpl *= 1e-250;
            rjl1 *= 1e-250;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2
    let mut a = 0.25 - mu * mu;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    converged = false;
    for i in 2..MAXIT {
        a += (2 * (i - 1)) as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::Convergence { nu, x });
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    Ok(rjl1 * (rjmu / rjl))
}

/// `J_nu(x)` for already validated inputs.
pub(crate) fn jv(nu: f64, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        return j_series(nu, x);
    }
    let twice = 2.0 * nu;
    if twice.fract() == 0.0 && nu.fract() != 0.0 && x >= nu {
        return j_half_integer((nu - 0.5) as usize, x);
    }
    // Steed only fails for absurd arguments outside the supported range.
    j_steed(nu, x).unwrap_or_else(|_| j_series(nu, x))
}

/// `J'_nu(x)` for validated inputs; `x > 0` unless `nu == 0` or `nu >= 1`.
pub(crate) fn jv_prime(nu: f64, x: f64) -> f64 {
    if nu == 0.0 {
        -jv(1.0, x)
    } else if nu >= 1.0 {
        0.5 * (jv(nu - 1.0, x) - jv(nu + 1.0, x))
    } else {
        nu / x * jv(nu, x) - jv(nu + 1.0, x)
    }
}

/// Bessel function of the first kind `J_nu(x)`, `x >= 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(jv(order.0, x))
}

/// `dJ_nu/dx` via `J'_nu = (J_{nu-1} - J_{nu+1})/2` (`nu >= 1`),
/// `J'_0 = -J_1`, and `J'_nu = (nu/x) J_nu - J_{nu+1}` for `0 < nu < 1`.
pub fn bessel_j_prime(order: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x)?;
    let nu = order.0;
    if x == 0.0 && nu > 0.0 && nu < 1.0 {
        return Err(SpecFunError::SingularDerivative(nu));
    }
    Ok(jv_prime(nu, x))
}

fn i_series_scaled(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = (nu * half.ln() - ln_gamma_plus_one(nu) - x).exp();
    let mut sum = term;
    for k in 1..2000 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

fn i_asymptotic_scaled(nu: f64, x: f64) -> f64 {
    let four_nu2 = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (four_nu2 - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

pub(crate) fn iv_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 600.0 {
        i_series_scaled(nu, x)
    } else {
        i_asymptotic_scaled(nu, x)
    }
}

pub(crate) fn iv(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if nu > 150.0 {
        (nu * half.ln() - ln_gamma_plus_one(nu)).exp()
    } else {
        half.powf(nu) / gamma_plus_one(nu)
    };
    let mut sum = term;
    for k in 1..2000 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Modified Bessel function `I_nu(x)` for `0 <= x <= 500`.
pub fn bessel_i(order: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x)?;
    if x > BESSEL_I_MAX_ARG {
        return Err(SpecFunError::Overflow { nu: order.0, x });
    }
    let v = iv(order.0, x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SpecFunError::Overflow { nu: order.0, x })
    }
}

/// Exponentially scaled `e^{-x} I_nu(x)`, any finite `x >= 0`.
pub fn bessel_i_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(iv_scaled(order.0, x))
}

/// The first-degree radial Neumann profile `g(r) = r^{-(n-2)/2} J_{n/2}(s r)`.
///
/// Constructed through [`RadialProfile::for_ball`] the pairing `s R = p_n`
/// holds, so `g'(R) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    n: usize,
    scale: f64,
    radius: f64,
}

/// Below this value of `s r` the profile is summed from its own power
/// series `g = sum a_k r^{2k+1}`, which has no removable singularity.
const PROFILE_SERIES_LIMIT: f64 = 0.5;

impl RadialProfile {
    /// Profile with an arbitrary scale; `radius` is carried for bookkeeping.
    pub fn new(n: usize, scale: f64, radius: f64) -> Result<Self> {
        if !(2..=MAX_DIMENSION).contains(&n) {
            return Err(SpecFunError::Dimension(n));
        }
        if !(scale.is_finite() && radius.is_finite()) {
            return Err(SpecFunError::NonFinite);
        }
        if scale <= 0.0 || radius <= 0.0 {
            return Err(SpecFunError::NegativeArgument(scale.min(radius)));
        }
        Ok(Self { n, scale, radius })
    }

    /// Profile of the first nonzero Neumann eigenfunctions on `B_R`.
    pub fn for_ball(n: usize, radius: f64) -> Result<Self> {
        let p = first_radial_deriv_zero(n)?;
        Self::new(n, p / radius, radius)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// `s = sqrt(mu_1)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `mu_1 = s^2`.
    pub fn mu(&self) -> f64 {
        self.scale * self.scale
    }

    fn order(&self) -> f64 {
        0.5 * self.n as f64
    }

    /// Coefficients `a_k` of `g(r) = sum_k a_k r^{2k+1}`.
    pub fn series_coefficients(&self, terms: usize) -> Vec<f64> {
        let nu = self.order();
        let hs = 0.5 * self.scale;
        let mut a = Vec::with_capacity(terms);
        let mut c = hs.powf(nu) / gamma_plus_one(nu);
        for k in 0..terms {
            if k > 0 {
                let kf = k as f64;
                c *= -hs * hs / (kf * (kf + nu));
            }
            a.push(c);
        }
        a
    }

    /// `g'(0)`, the leading series coefficient.
    pub fn slope_at_origin(&self) -> f64 {
        let nu = self.order();
        (0.5 * self.scale).powf(nu) / gamma_plus_one(nu)
    }

    fn eval_series(&self, r: f64) -> (f64, f64) {
        let a = self.series_coefficients(12);
        let r2 = r * r;
        let mut g = 0.0;
        let mut gp = 0.0;
        let mut pow = 1.0;
        for (k, ak) in a.iter().enumerate() {
            gp += (2 * k + 1) as f64 * ak * pow;
            g += ak * pow * r;
            pow *= r2;
        }
        (g, gp)
    }

    /// `(g(r), g'(r))` for `r >= 0`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        check_arg(r)?;
        Ok(self.eval_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> (f64, f64) {
        let x = self.scale * r;
        if x < PROFILE_SERIES_LIMIT {
            return self.eval_series(r);
        }
        let nu = self.order();
        let w = r.powf(-(nu - 1.0));
        let j = jv(nu, x);
        let jm = jv(nu - 1.0, x);
        let g = w * j;
        let gp = w * (self.scale * jm - (self.n as f64 - 1.0) / r * j);
        (g, gp)
    }

    /// `g(r)/r`, finite at the origin where it equals `g'(0)`.
    pub(crate) fn g_over_r(&self, r: f64) -> f64 {
        let x = self.scale * r;
        if x < PROFILE_SERIES_LIMIT {
            let a = self.series_coefficients(12);
            let r2 = r * r;
            let mut pow = 1.0;
            let mut s = 0.0;
            for ak in &a {
                s += ak * pow;
                pow *= r2;
            }
            s
        } else {
            self.eval_unchecked(r).0 / r
        }
    }

    /// `g''(r)` from Bessel recurrences only (no use of the radial ODE).
    pub fn second_derivative(&self, r: f64) -> Result<f64> {
        check_arg(r)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let nu = self.order();
        let s = self.scale;
        let x = s * r;
        let a = nu - 1.0;
        let jm = jv(nu - 1.0, x);
        let j0 = jv(nu, x);
        let jp = jv(nu + 1.0, x);
        let d1 = 0.5 * (jm - jp);
        let d2 = 0.5 * ((nu - 1.0) / x * jm - 2.0 * j0 + (nu + 1.0) / x * jp);
        let w = r.powf(-a);
        Ok(a * (a + 1.0) * w / (r * r) * j0 - 2.0 * a * s * w / r * d1 + s * s * w * d2)
    }
}

/// The radial Neumann target for degree `j`:
/// `d/dx [x^{-(n-2)/2} J_{j+(n-2)/2}(x)] = 0  <=>  j J_mu(x) - x J_{mu+1}(x) = 0`.
fn neumann_target(n: usize, j: usize, x: f64) -> f64 {
    let mu = BesselOrder::for_degree(n, j).value();
    j as f64 * jv(mu, x) - x * jv(mu + 1.0, x)
}

fn neumann_target_prime(n: usize, j: usize, x: f64) -> f64 {
    let mu = BesselOrder::for_degree(n, j).value();
    let jm = jv(mu, x);
    let jp = jv(mu + 1.0, x);
    let d = mu / x * jm - jp;
    j as f64 * d + mu * jp - x * jm
}

/// Bisect `[lo, hi]` (sign change assumed) to width 1e-13, then one Newton
/// polish that is kept only if it stays inside the bracket and lowers the residual.
fn polish_zero(n: usize, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = neumann_target(n, j, lo);
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = neumann_target(n, j, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = neumann_target(n, j, mid);
    let dfm = neumann_target_prime(n, j, mid);
    let newton = mid - fm / dfm;
    if newton.is_finite()
        && newton >= lo - BISECT_WIDTH
        && newton <= hi + BISECT_WIDTH
        && neumann_target(n, j, newton).abs() <= fm.abs()
    {
        newton
    } else {
        mid
    }
}

/// First `count` positive zeros of the degree-`j` radial Neumann target on
/// the unit ball. The root at the origin (`j = 0`) is skipped.
pub fn radial_deriv_zeros(n: usize, j: usize, count: usize) -> Result<Vec<f64>> {
    if !(2..=MAX_DIMENSION).contains(&n) {
        return Err(SpecFunError::Dimension(n));
    }
    let mut zeros = Vec::with_capacity(count);
    let mut x = SCAN_STEP;
    let mut fx = neumann_target(n, j, x);
    // zeros grow roughly like pi*l + j; bound the scan generously
    let limit = (j as f64 + 10.0) + PI * (count as f64 + 4.0) * 2.0;
    while zeros.len() < count {
        let next = x + SCAN_STEP;
        if next > limit {
            return Err(SpecFunError::ScanResolution {
                j,
                l: zeros.len() + 1,
            });
        }
        let fnext = neumann_target(n, j, next);
        if fx == 0.0 {
            zeros.push(x);
        } else if (fx < 0.0) != (fnext < 0.0) && fnext != 0.0 {
            let z = polish_zero(n, j, x, next);
            if !(z >= x && z <= next) {
                return Err(SpecFunError::ScanResolution {
                    j,
                    l: zeros.len() + 1,
                });
            }
            zeros.push(z);
        }
        x = next;
        fx = fnext;
    }
    // consecutive zeros closer than the scan step would have been missed in pairs
    for (l, w) in zeros.windows(2).enumerate() {
        if w[1] - w[0] < SCAN_STEP {
            return Err(SpecFunError::ScanResolution { j, l: l + 2 });
        }
    }
    Ok(zeros)
}

/// `p_n`: the first positive zero of `d/dr [r^{-(n-2)/2} J_{n/2}(r)]`.
/// `mu_1(B_R) = (p_n / R)^2`.
pub fn first_radial_deriv_zero(n: usize) -> Result<f64> {
    if !(2..=MAX_DIMENSION).contains(&n) {
        return Err(SpecFunError::Dimension(n));
    }
    // p_n < n + 2 for all n in range; the first sign change must lie below.
    let limit = n as f64 + 2.0;
    let mut x = SCAN_STEP;
    let mut fx = neumann_target(n, 1, x);
    while x < limit {
        let next = x + SCAN_STEP;
        let fnext = neumann_target(n, 1, next);
        if (fx < 0.0) != (fnext < 0.0) {
            return Ok(polish_zero(n, 1, x, next));
        }
        x = next;
        fx = fnext;
    }
    Err(SpecFunError::Bracketing { n, limit })
}

/// Residual of the Neumann target at `x` together with its derivative,
/// exposed for checking zero quality.
pub fn neumann_target_residual(n: usize, j: usize, x: f64) -> (f64, f64) {
    (neumann_target(n, j, x), neumann_target_prime(n, j, x))
}

/// Table of `nu_{j,l}` for `0 <= j <= j_max`, `1 <= l <= l_max` on the unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivZeroTable {
    n: usize,
    entries: Vec<Vec<f64>>,
}

impl DerivZeroTable {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn j_max(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn l_max(&self) -> usize {
        self.entries[0].len()
    }

    /// `nu_{j,l}` with 1-based radial index `l`.
    pub fn get(&self, j: usize, l: usize) -> Option<f64> {
        if l == 0 {
            return None;
        }
        self.entries.get(j).and_then(|row| row.get(l - 1)).copied()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.entries[j]
    }

    /// `(j, l, nu)` triples in table order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().enumerate().map(move |(l, &v)| (j, l + 1, v)))
    }
}

pub fn deriv_zero_table(n: usize, j_max: usize, l_max: usize) -> Result<DerivZeroTable> {
    if l_max == 0 {
        return Err(SpecFunError::ScanResolution { j: 0, l: 0 });
    }
    let entries = (0..=j_max)
        .map(|j| radial_deriv_zeros(n, j, l_max))
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivZeroTable { n, entries })
}

const TABLE_HEADER: &str = "nu-table v1";

impl fmt::Display for DerivZeroTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{TABLE_HEADER}")?;
        for (j, l, v) in self.iter() {
            writeln!(f, "{} {} {} {:.17e}", self.n, j, l, v)?;
        }
        Ok(())
    }
}

impl FromStr for DerivZeroTable {
    type Err = SpecFunError;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == TABLE_HEADER => {}
            other => {
                return Err(SpecFunError::Parse(format!(
                    "expected header {TABLE_HEADER:?}, found {other:?}"
                )))
            }
        }
        let mut n_seen = None;
        let mut entries: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let bad = || SpecFunError::Parse(format!("line {}: {line:?}", lineno + 2));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad());
            }
            let n: usize = fields[0].parse().map_err(|_| bad())?;
            let j: usize = fields[1].parse().map_err(|_| bad())?;
            let l: usize = fields[2].parse().map_err(|_| bad())?;
            let v: f64 = fields[3].parse().map_err(|_| bad())?;
            if *n_seen.get_or_insert(n) != n {
                return Err(bad());
            }
            if j == entries.len() {
                entries.push(Vec::new());
            }
            let row = entries.get_mut(j).ok_or_else(bad)?;
            if l != row.len() + 1 || row.last().is_some_and(|&prev| prev >= v) {
                return Err(bad());
            }
            row.push(v);
        }
        let n = n_seen.ok_or_else(|| SpecFunError::Parse("empty table".into()))?;
        let l_max = entries[0].len();
        if entries.iter().any(|r| r.len() != l_max) {
            return Err(SpecFunError::Parse("ragged table".into()));
        }
        Ok(DerivZeroTable { n, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(order(0.0), 0.0).unwrap(), 1.0);
        assert!(bessel_j(order(0.5), PI).unwrap().abs() < 1e-15);
        assert_eq!(bessel_j_prime(order(0.0), 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(order(0.0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(order(1.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            bessel_j(order(1.0), -1.0),
            Err(SpecFunError::NegativeArgument(_))
        ));
        assert!(matches!(
            bessel_j(order(1.0), f64::NAN),
            Err(SpecFunError::NonFinite)
        ));
        assert!(BesselOrder::new(-0.5).is_err());
        assert!(BesselOrder::new(f64::INFINITY).is_err());
        assert!(matches!(
            bessel_i(order(0.0), 501.0),
            Err(SpecFunError::Overflow { .. })
        ));
        assert!(matches!(
            bessel_j_prime(order(0.5), 0.0),
            Err(SpecFunError::SingularDerivative(_))
        ));
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[0.3, 1.0, 2.5, 7.0, 13.0, 31.0] {
            let j12 = (2.0 / (PI * x)).sqrt() * x.sin();
            let j32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(order(0.5), x).unwrap() - j12).abs() < 1e-14);
            assert!((bessel_j(order(1.5), x).unwrap() - j32).abs() < 1e-14);
            let i12 = (2.0 / (PI * x)).sqrt() * x.sinh();
            let rel = (bessel_i(order(0.5), x).unwrap() - i12).abs() / i12;
            assert!(rel < 1e-13, "x={x} rel={rel}");
        }
    }

    #[test]
    fn steed_matches_series_at_switch() {
        for &nu in &[0.0, 0.5, 1.0, 1.7, 3.0, 12.0] {
            let a = j_series(nu, 2.0);
            let b = j_steed(nu, 2.0).unwrap();
            assert!((a - b).abs() < 1e-14, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn large_argument_reference_values() {
        // J_0(50), J_1(50) reference values
        let j0 = bessel_j(order(0.0), 50.0).unwrap();
        let j1 = bessel_j(order(1.0), 50.0).unwrap();
        assert!((j0 - 0.055_812_327_669_251_86).abs() < 1e-14, "{j0}");
        assert!((j1 - (-0.097_511_828_125_175_35)).abs() < 1e-14, "{j1}");
    }

    #[test]
    fn scaled_i_is_consistent() {
        for &x in &[0.5, 5.0, 40.0, 300.0] {
            let a = bessel_i(order(1.0), x).unwrap() * (-x).exp();
            let b = bessel_i_scaled(order(1.0), x).unwrap();
            assert!((a - b).abs() <= 1e-13 * b, "x={x}");
        }
        // asymptotic branch against a large-x half-integer closed form
        let x = 800.0;
        let exact = (2.0 / (PI * x)).sqrt() * 0.5 * (1.0 - (-2.0 * x).exp());
        let got = bessel_i_scaled(order(0.5), x).unwrap();
        assert!((got - exact).abs() < 1e-15 * exact.max(1.0));
    }

    #[test]
    fn first_zero_n3_and_table_order() {
        let p3 = first_radial_deriv_zero(3).unwrap();
        assert!((p3 - 2.081_575_978_0).abs() < 1e-8, "{p3}");
        let t = deriv_zero_table(2, 3, 4).unwrap();
        assert!(t.get(1, 1).unwrap() < t.get(0, 1).unwrap());
        for j in 0..=3 {
            for w in t.row(j).windows(2) {
                assert!(w[0] < w[1]);
            }
        }
        assert!(t.get(0, 0).is_none());
        assert!(t.get(9, 1).is_none());
    }

    #[test]
    fn table_text_roundtrip_and_rejects_garbage() {
        let t = deriv_zero_table(3, 2, 3).unwrap();
        let text = t.to_string();
        assert!(text.starts_with("nu-table v1\n3 0 1 "));
        let back: DerivZeroTable = text.parse().unwrap();
        assert_eq!(back, t);
        assert!("nu-table v2\n".parse::<DerivZeroTable>().is_err());
        assert!("nu-table v1\n2 0 2 1.0\n".parse::<DerivZeroTable>().is_err());
    }

    #[test]
    fn profile_origin_limits() {
        let p = RadialProfile::for_ball(2, 1.0).unwrap();
        let (g, gp) = p.eval(0.0).unwrap();
        assert_eq!(g, 0.0);
        assert!((gp - p.scale() / 2.0).abs() < 1e-15);
        assert_eq!(p.g_over_r(0.0), gp);
        // series and Bessel branches agree across the switch
        let r = PROFILE_SERIES_LIMIT / p.scale();
        let (a, ap) = p.eval_series(r);
        let x = p.scale() * r;
        let b = jv(1.0, x);
        let bp = p.scale() * jv(0.0, x) - jv(1.0, x) / r;
        assert!((a - b).abs() < 1e-16 && (ap - bp).abs() < 1e-15);
    }

    #[test]
    fn ipow_matches_repeated_multiplication() {
        let x = 3.389_958_5_f64;
        assert_eq!(ipow(x, 2), x * x);
        assert_eq!(ipow(x, 4), (x * x) * (x * x));
        assert_eq!(ipow(x, 0), 1.0);
    }
}
