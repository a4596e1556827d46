use rayon::prelude::*;

use super::mesh::triangulate_level;
use super::quadrature::{integrate_triangle, TriangleRule};
use super::{Domain, GeometryError, Mesh, Result};

/// Pairwise summation with a fixed split, so the result depends only on
/// the order of `v`.
pub fn pairwise_sum(v: &mut [f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => {
            let (a, b) = v.split_at_mut(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn per_triangle<F>(mesh: &Mesh, rule: TriangleRule, f: &F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let c = mesh.corners(t);
            let v = integrate_triangle(rule, c, f);
            if v.is_finite() {
                Ok(v)
            } else {
                // locate the offending node for the report
                let mut at = (f64::NAN, f64::NAN);
                for &(l, _) in rule.points() {
                    let x = l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0];
                    let y = l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1];
                    if !f(x, y).is_finite() {
                        at = (x, y);
                        break;
                    }
                }
                Err(GeometryError::NonFinite(at.0, at.1))
            }
        })
        .collect()
}

/// Composite rule over `mesh`, exact per triangle for polynomials of
/// total degree `degree <= 7`. The reduction order is fixed, so the
/// result does not depend on the number of threads.
pub fn integrate_mesh<F>(mesh: &Mesh, f: F, degree: usize) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let rule = TriangleRule::for_degree(degree).ok_or(GeometryError::RuleDegree(degree))?;
    let mut parts = per_triangle(mesh, rule, &f)?;
    Ok(pairwise_sum(&mut parts))
}

/// Degree-7 value with the difference to the embedded degree-4 rule as an
/// error estimate.
pub fn integrate_mesh_with_error<F>(mesh: &Mesh, f: F) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let mut hi = per_triangle(mesh, TriangleRule::Degree7, &f)?;
    let mut lo = per_triangle(mesh, TriangleRule::Degree4, &f)?;
    let a = pairwise_sum(&mut hi);
    let b = pairwise_sum(&mut lo);
    Ok((a, (a - b).abs()))
}

/// Meshes and weights of a reusable domain quadrature.
///
/// Polygons are meshed exactly. Curved domains carry an `O(h_b^2)`
/// polygonization error, removed to leading order by one Richardson step
/// between the boundary spacing and its nested halving.
#[derive(Debug, Clone)]
pub struct DomainRule {
    levels: Vec<(Mesh, f64)>,
}

impl DomainRule {
    pub fn new(d: &Domain, h: f64) -> Result<Self> {
        let coarse = triangulate_level(d, h, 0)?;
        if !d.is_curved() {
            return Ok(Self {
                levels: vec![(coarse, 1.0)],
            });
        }
        let fine = triangulate_level(d, h, 1)?;
        Ok(Self {
            levels: vec![(fine, 4.0 / 3.0), (coarse, -1.0 / 3.0)],
        })
    }

    /// The finest mesh of the rule.
    pub fn mesh(&self) -> &Mesh {
        &self.levels[0].0
    }

    pub fn integrate<F>(&self, f: F, degree: usize) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let mut total = 0.0;
        for (mesh, w) in &self.levels {
            total += w * integrate_mesh(mesh, &f, degree)?;
        }
        Ok(total)
    }

    /// Degree-7 value and `|I_7 - I_4|` combined over the levels.
    pub fn integrate_with_error<F>(&self, f: F) -> Result<(f64, f64)>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let (mut total, mut err) = (0.0, 0.0);
        for (mesh, w) in &self.levels {
            let (v, e) = integrate_mesh_with_error(mesh, &f)?;
            total += w * v;
            err += w.abs() * e;
        }
        Ok((total, err))
    }
}

/// `int_Omega f` over a triangulation of `d` with target size `h`; see
/// [`DomainRule`] for the treatment of curved boundaries.
pub fn integrate<F>(d: &Domain, f: F, degree: usize, h: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if degree > 7 {
        return Err(GeometryError::RuleDegree(degree));
    }
    DomainRule::new(d, h)?.integrate(f, degree)
}
