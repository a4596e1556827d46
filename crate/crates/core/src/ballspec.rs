//! Exact Neumann spectra of `Delta`, `Delta^2` and `Delta^{2m}` on balls
//! `B_R(0)` in `R^n`, the first eigenfunctions `g(r) x_i / r`, and
//! Bessel-Fourier projection of radial samples.
//!
//! Every eigenvalue of a power of the Laplacian is built from the Laplacian
//! level `lambda = (nu_{j,l} / R)^2` by repeated multiplication, so the
//! entries for different powers are exact integer powers of each other.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::quadrature::CompositeGauss;
use crate::specfun::{
    deriv_zero_table, first_radial_deriv_zero, ipow, jv, radial_deriv_zeros, DerivZeroTable,
    RadialProfile, SpecFunError,
};

/// Largest `m` accepted by [`upsilon1_poly_ball`].
pub const MAX_POLY_M: u32 = 8;

const PROJECTION_PANELS: usize = 32;
const PROJECTION_ORDER: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallError {
    #[error("dimension n = {0} outside 2..=16")]
    Dimension(usize),
    #[error("radius must be finite and positive, got {0}")]
    Radius(f64),
    #[error("power m = {0} outside 1..={MAX_POLY_M}")]
    Power(u32),
    #[error("zero table too small; need j_max >= {j_max} and l_max >= {l_max}")]
    TableExhausted { j_max: usize, l_max: usize },
    #[error("table dimension {table} does not match ball dimension {ball}")]
    TableDimension { table: usize, ball: usize },
    #[error("coordinate index {i} outside 1..={n}")]
    Index { i: usize, n: usize },
    #[error("point has {got} coordinates, expected {n}")]
    PointDimension { got: usize, n: usize },
    #[error("point at distance {r} lies outside the ball of radius {radius}")]
    Outside { r: f64, radius: f64 },
    #[error("non-finite sample {value} at r = {r}")]
    NonFiniteSample { r: f64, value: f64 },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

pub type Result<T> = std::result::Result<T, BallError>;

/// The ball `B_R(0)` in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSpec {
    n: usize,
    radius: f64,
}

impl BallSpec {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if !(2..=16).contains(&n) {
            return Err(BallError::Dimension(n));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(BallError::Radius(radius));
        }
        Ok(Self { n, radius })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Profile of the first nonzero eigenfunctions, with `s R = p_n`.
    pub fn profile(&self) -> Result<RadialProfile> {
        Ok(RadialProfile::for_ball(self.n, self.radius)?)
    }
}

/// `mu_1(B_R) = (p_n / R)^2`.
pub fn mu1_ball(b: &BallSpec) -> Result<f64> {
    let x = first_radial_deriv_zero(b.n)? / b.radius;
    Ok(x * x)
}

/// `Upsilon_1(B_R) = mu_1^2`, the first nonzero Neumann eigenvalue of `Delta^2`.
pub fn upsilon1_ball(b: &BallSpec) -> Result<f64> {
    let mu = mu1_ball(b)?;
    Ok(mu * mu)
}

/// First nonzero Neumann eigenvalue of `Delta^{2m}`: `mu_1^{2m}`.
pub fn upsilon1_poly_ball(b: &BallSpec, m: u32) -> Result<f64> {
    if !(1..=MAX_POLY_M).contains(&m) {
        return Err(BallError::Power(m));
    }
    Ok(ipow(mu1_ball(b)?, 2 * m))
}

/// Dimension of the space of degree-`j` spherical harmonics on `S^{n-1}`:
/// `C(j+n-1, n-1) - C(j+n-3, n-1)`.
pub fn harmonic_multiplicity(n: usize, j: usize) -> u64 {
    fn binom(a: i64, k: i64) -> u64 {
        if a < k || k < 0 {
            return 0;
        }
        let k = k.min(a - k);
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (a - i) as u128 / (i + 1) as u128;
        }
        c as u64
    }
    let (n, j) = (n as i64, j as i64);
    binom(j + n - 1, n - 1) - binom(j + n - 3, n - 1)
}

/// One eigenvalue level of `Delta^k` on a ball with its mode labels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpectrumEntry {
    pub value: f64,
    pub degree: usize,
    pub radial_index: usize,
    pub multiplicity: u64,
}

/// Sorted nonzero Neumann levels of `Delta^power` on a ball; the constant
/// mode (value 0, multiplicity 1) is kept apart from `entries`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BallSpectrum {
    pub n: usize,
    pub radius: f64,
    pub power: u32,
    pub zero_mode_multiplicity: u64,
    pub entries: Vec<SpectrumEntry>,
}

impl BallSpectrum {
    /// CSV with header `power,n,R,j,l,multiplicity,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("power,n,R,j,l,multiplicity,value\n");
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{},{:.16e},{},{},{},{:.16e}",
                self.power, self.n, self.radius, e.degree, e.radial_index, e.multiplicity, e.value
            );
        }
        s
    }
}

/// The `count` smallest nonzero Neumann levels of `Delta^power` on `b`.
///
/// `power` is the exponent of the Laplacian: 1 for `Delta`, 2 for
/// `Delta^2`, `2m` for `Delta^{2m}`. Each value is `lambda^power` with
/// `lambda = (nu_{j,l} / R)^2`.
pub fn neumann_spectrum_ball(b: &BallSpec, count: usize, power: u32) -> Result<BallSpectrum> {
    // rows j = 1..=count already hold `count` values below any (j > count, l)
    // and each row holds `count` values below any (j, l > count)
    let size = count.max(1);
    let table = deriv_zero_table(b.n, size, size)?;
    neumann_spectrum_from_table(b, &table, count, power)
}

/// As [`neumann_spectrum_ball`] with a caller-supplied zero table. Fails
/// when the table cannot certify that the selection is the global minimum.
pub fn neumann_spectrum_from_table(
    b: &BallSpec,
    table: &DerivZeroTable,
    count: usize,
    power: u32,
) -> Result<BallSpectrum> {
    if table.dimension() != b.n {
        return Err(BallError::TableDimension {
            table: table.dimension(),
            ball: b.n,
        });
    }
    if power == 0 {
        return Err(BallError::Power(power));
    }
    let mut all: Vec<(usize, usize, f64)> = table.iter().collect();
    all.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal));
    let exhausted = BallError::TableExhausted {
        j_max: count.max(1),
        l_max: count.max(1),
    };
    if all.len() < count {
        return Err(exhausted);
    }
    let chosen = &all[..count];
    if let Some(&(_, _, top)) = chosen.last() {
        // unlisted zeros exceed the last entry of every row and the first
        // entry of the last row (zeros increase in l and, for j >= 1, in j)
        let row_ends_ok = (0..=table.j_max()).all(|j| top <= *table.row(j).last().unwrap());
        let next_row_ok = table.j_max() >= 1 && top <= table.row(table.j_max())[0];
        if !(row_ends_ok && next_row_ok) {
            return Err(exhausted);
        }
    }
    let entries = chosen
        .iter()
        .map(|&(j, l, nu)| {
            let x = nu / b.radius;
            SpectrumEntry {
                value: ipow(x * x, power),
                degree: j,
                radial_index: l,
                multiplicity: harmonic_multiplicity(b.n, j),
            }
        })
        .collect();
    Ok(BallSpectrum {
        n: b.n,
        radius: b.radius,
        power,
        zero_mode_multiplicity: 1,
        entries,
    })
}

fn check_point(b: &BallSpec, x: &[f64]) -> Result<f64> {
    if x.len() != b.n {
        return Err(BallError::PointDimension { got: x.len(), n: b.n });
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !r.is_finite() || r > b.radius * (1.0 + 1e-12) {
        return Err(BallError::Outside { r, radius: b.radius });
    }
    Ok(r)
}

fn check_index(b: &BallSpec, i: usize) -> Result<()> {
    if i == 0 || i > b.n {
        return Err(BallError::Index { i, n: b.n });
    }
    Ok(())
}

/// First nonzero eigenfunction `g(r) x_i / r` (1-based `i`), zero at the origin.
pub fn ball_eigenfunction(b: &BallSpec, i: usize, x: &[f64]) -> Result<f64> {
    check_index(b, i)?;
    let r = check_point(b, x)?;
    let p = b.profile()?;
    Ok(p.g_over_r(r) * x[i - 1])
}

/// Gradient of [`ball_eigenfunction`]:
/// `(g/r) e_i + x_i (g' - g/r) x / r^2`.
pub fn ball_eigenfunction_gradient(b: &BallSpec, i: usize, x: &[f64]) -> Result<Vec<f64>> {
    check_index(b, i)?;
    let r = check_point(b, x)?;
    let p = b.profile()?;
    let q = p.g_over_r(r);
    let mut grad = vec![0.0; b.n];
    grad[i - 1] = q;
    if r > 0.0 {
        let (_, gp) = p.eval_unchecked(r);
        let c = x[i - 1] * (gp - q) / (r * r);
        for (gk, xk) in grad.iter_mut().zip(x) {
            *gk += c * xk;
        }
    }
    Ok(grad)
}

/// Radial factor `r^{-(n-2)/2} J_{j+(n-2)/2}(nu r / R)` of the degree-`j` mode.
pub fn radial_mode(n: usize, j: usize, nu: f64, radius: f64, r: f64) -> f64 {
    let shift = 0.5 * (n as f64 - 2.0);
    let order = j as f64 + shift;
    let x = nu * r / radius;
    if shift == 0.0 {
        return jv(order, x);
    }
    if r == 0.0 {
        return if order - shift == 0.0 {
            // limit of r^{-shift} J_shift(c r) at the origin
            let c = nu / radius;
            (0.5 * c).powf(shift) / crate::specfun::gamma_plus_one(shift)
        } else {
            0.0
        };
    }
    r.powf(-shift) * jv(order, x)
}

/// Degree-`j`, radial-index-`l` Neumann mode on the disk of radius `R`:
/// `J_j(nu_{j,l} r / R)` times `cos(j theta)` or `sin(j theta)`.
pub fn disk_mode(radius: f64, j: usize, l: usize, sine: bool, x: f64, y: f64) -> Result<f64> {
    if l == 0 {
        return Err(BallError::TableExhausted { j_max: j, l_max: 1 });
    }
    let nu = radial_deriv_zeros(2, j, l)?[l - 1];
    let r = x.hypot(y);
    let th = y.atan2(x);
    let ang = if sine {
        (j as f64 * th).sin()
    } else {
        (j as f64 * th).cos()
    };
    Ok(jv(j as f64, nu * r / radius) * ang)
}

/// Coefficients of a radial sample against the degree-`j` modes,
/// orthogonal in the `r^{n-1}`-weighted inner product on `[0, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselFourierCoeffs {
    pub n: usize,
    pub degree: usize,
    pub radius: f64,
    pub zeros: Vec<f64>,
    pub coeffs: Vec<f64>,
    /// `int_0^R j_j(nu_l r / R)^2 r^{n-1} dr` for each mode.
    pub norms: Vec<f64>,
}

impl BesselFourierCoeffs {
    /// Partial sum `sum_l c_l j_j(nu_l r / R)`.
    pub fn reconstruct(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.zeros)
            .map(|(c, &nu)| c * radial_mode(self.n, self.degree, nu, self.radius, r))
            .sum()
    }

    /// `sum_l c_l^2 ||j_l||^2`, the weighted norm of the partial sum.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().zip(&self.norms).map(|(c, w)| c * c * w).sum()
    }
}

/// Composite Gauss rule on `[0, R]` used for projections and weighted norms.
pub fn projection_rule(radius: f64) -> CompositeGauss {
    CompositeGauss::new(0.0, radius, PROJECTION_PANELS, PROJECTION_ORDER)
}

/// `int_0^R f(r)^2 r^{n-1} dr` with the projection rule.
pub fn weighted_norm_sq(b: &BallSpec, f: impl Fn(f64) -> f64) -> f64 {
    let w = b.n as i32 - 1;
    projection_rule(b.radius).integrate(|r| {
        let v = f(r);
        v * v * r.powi(w)
    })
}

/// Project `samples` onto the first `count` degree-`j` radial modes.
pub fn bessel_fourier_project(
    samples: impl Fn(f64) -> f64,
    b: &BallSpec,
    degree: usize,
    count: usize,
) -> Result<BesselFourierCoeffs> {
    let zeros = radial_deriv_zeros(b.n, degree, count)?;
    let rule = projection_rule(b.radius);
    let wexp = b.n as i32 - 1;
    let mut psi = Vec::with_capacity(rule.nodes.len());
    for &r in &rule.nodes {
        let v = samples(r);
        if !v.is_finite() {
            return Err(BallError::NonFiniteSample { r, value: v });
        }
        psi.push(v);
    }
    let mut coeffs = Vec::with_capacity(count);
    let mut norms = Vec::with_capacity(count);
    for &nu in &zeros {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&r, &w), &p) in rule.nodes.iter().zip(&rule.weights).zip(&psi) {
            let phi = radial_mode(b.n, degree, nu, b.radius, r);
            let wr = w * r.powi(wexp);
            num += wr * p * phi;
            den += wr * phi * phi;
        }
        coeffs.push(num / den);
        norms.push(den);
    }
    Ok(BesselFourierCoeffs {
        n: b.n,
        degree,
        radius: b.radius,
        zeros,
        coeffs,
        norms,
    })
}
