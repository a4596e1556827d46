use super::eigen::{eig_mesh, EigOptions, Operator};
use super::{FemError, Result};
use crate::geometry::{triangulate, Domain};

const MIN_RATE: f64 = 0.5;
const MAX_RATE: f64 = 8.0;

/// Least-squares fit `lambda(h) = limit + coefficient * h^rate`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerFit {
    pub limit: f64,
    pub coefficient: f64,
    pub rate: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceStudy {
    pub domain: String,
    pub operator: Operator,
    pub m: Option<usize>,
    pub order: usize,
    pub h: Vec<f64>,
    pub ndof: Vec<usize>,
    /// Lowest nonzero eigenvalue per mesh size.
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub monotone: bool,
    pub fit: Option<PowerFit>,
    /// Extrapolated limit; the finest value when extrapolation is withheld.
    pub estimate: f64,
    /// `|estimate - finest|`, or the last change when not monotone.
    pub error_bar: f64,
    pub nonsmooth: bool,
}

fn linear_fit(h: &[f64], v: &[f64], rate: f64) -> PowerFit {
    let n = h.len() as f64;
    let x: Vec<f64> = h.iter().map(|t| t.powf(rate)).collect();
    let sx: f64 = x.iter().sum();
    let sy: f64 = v.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let coefficient = (n * sxy - sx * sy) / det;
    let limit = (sy - coefficient * sx) / n;
    let rss = x
        .iter()
        .zip(v)
        .map(|(a, b)| (limit + coefficient * a - b).powi(2))
        .sum();
    PowerFit {
        limit,
        coefficient,
        rate,
        rss,
    }
}

/// Rate minimizing the residual sum of squares: a coarse scan of
/// `[0.5, 8]` followed by golden-section refinement.
pub fn fit_power_law(h: &[f64], v: &[f64]) -> Option<PowerFit> {
    if h.len() < 3 || h.len() != v.len() {
        return None;
    }
    let steps = 750;
    let rate_at = |k: usize| MIN_RATE + (MAX_RATE - MIN_RATE) * k as f64 / steps as f64;
    let best_k = (0..=steps)
        .min_by(|&a, &b| linear_fit(h, v, rate_at(a)).rss.total_cmp(&linear_fit(h, v, rate_at(b)).rss))?;
    let (mut lo, mut hi) = (rate_at(best_k.saturating_sub(1)), rate_at((best_k + 1).min(steps)));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if linear_fit(h, v, a).rss < linear_fit(h, v, b).rss {
            hi = b;
        } else {
            lo = a;
        }
    }
    let fit = linear_fit(h, v, 0.5 * (lo + hi));
    fit.limit.is_finite().then_some(fit)
}

/// Strictly monotone in the refinement direction.
fn is_monotone(v: &[f64]) -> bool {
    let inc = v.windows(2).all(|w| w[1] > w[0]);
    let dec = v.windows(2).all(|w| w[1] < w[0]);
    inc || dec
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub monotone: bool,
    pub fit: Option<PowerFit>,
    pub estimate: f64,
    pub error_bar: f64,
}

/// Power-law extrapolation of `values` over descending `h`. A
/// non-monotone sequence gets no fit; the finest value is returned with
/// the last change as its error bar.
pub fn extrapolate(h: &[f64], values: &[f64]) -> Extrapolation {
    let finest = *values.last().expect("nonempty sequence");
    let monotone = values.len() >= 2 && is_monotone(values);
    let fit = if monotone { fit_power_law(h, values) } else { None };
    let (estimate, error_bar) = match fit {
        Some(f) => (f.limit, (f.limit - finest).abs()),
        None if values.len() >= 2 => (finest, (values[values.len() - 2] - finest).abs()),
        None => (finest, f64::INFINITY),
    };
    Extrapolation {
        monotone,
        fit,
        estimate,
        error_bar,
    }
}

/// Lowest nonzero eigenvalue over descending mesh sizes with power-law
/// extrapolation to `h = 0`.
pub fn convergence_study(d: &Domain, operator: Operator, h_list: &[f64], opts: &EigOptions) -> Result<ConvergenceStudy> {
    if h_list.len() < 3 || h_list.windows(2).any(|w| !(w[1] < w[0])) || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(FemError::MeshSizes(h_list.to_vec()));
    }
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    let mut ndof = Vec::new();
    for &h in h_list {
        let mesh = triangulate(d, h)?;
        let r = eig_mesh(&mesh, 1, operator, opts)?;
        values.push(r.values[0]);
        residuals.push(r.residuals[0]);
        ndof.push(r.ndof);
    }
    let x = extrapolate(h_list, &values);
    Ok(ConvergenceStudy {
        domain: d.spec_string(),
        operator,
        m: operator.m(),
        order: opts.order,
        h: h_list.to_vec(),
        ndof,
        values,
        residuals,
        monotone: x.monotone,
        fit: x.fit,
        estimate: x.estimate,
        error_bar: x.error_bar,
        nonsmooth: d.nonsmooth(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_power_law() {
        let h = [0.4, 0.2, 0.1, 0.05];
        let v: Vec<f64> = h.iter().map(|t: &f64| 3.0 + 0.7 * t.powf(2.3)).collect();
        let f = fit_power_law(&h, &v).unwrap();
        assert!((f.rate - 2.3).abs() < 1e-6);
        assert!((f.limit - 3.0).abs() < 1e-9);
    }

    #[test]
    fn monotonicity() {
        assert!(is_monotone(&[3.0, 2.0, 1.5]));
        assert!(!is_monotone(&[3.0, 2.0, 2.5]));
    }
}
