use rayon::prelude::*;

use super::sparse::CsrMatrix;
use super::{FemError, Result};
use crate::geometry::quadrature::TriangleRule;
use crate::geometry::{Mesh, Point};

/// Mass and stiffness operators of continuous Lagrange elements.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub order: usize,
    /// Vertex dofs come first, in mesh order; for order 2 the edge
    /// midpoints follow in sorted edge order.
    pub dof_coords: Vec<Point>,
    pub num_vertices: usize,
}

impl OperatorPair {
    pub fn dimension(&self) -> usize {
        self.mass.n
    }
}

/// Local dof lists per triangle: `[a, b, c]` for order 1, and
/// `[a, b, c, ab, bc, ca]` for order 2.
fn dof_map(mesh: &Mesh, order: usize) -> (Vec<Vec<usize>>, Vec<Point>) {
    let nv = mesh.num_vertices();
    let mut coords = mesh.vertices.clone();
    if order == 1 {
        return (mesh.triangles.iter().map(|t| t.to_vec()).collect(), coords);
    }
    let edges: Vec<[usize; 2]> = mesh.edges().into_iter().map(|(e, _)| e).collect();
    for e in &edges {
        let p = mesh.vertices[e[0]];
        let q = mesh.vertices[e[1]];
        coords.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
    }
    let edge_dof = |a: usize, b: usize| {
        let key = if a < b { [a, b] } else { [b, a] };
        nv + edges.binary_search(&key).expect("edge of a mesh triangle")
    };
    let dofs = mesh
        .triangles
        .iter()
        .map(|&[a, b, c]| vec![a, b, c, edge_dof(a, b), edge_dof(b, c), edge_dof(c, a)])
        .collect();
    (dofs, coords)
}

/// Element mass and stiffness, row-major `k x k`.
fn element_matrices(c: [Point; 3], order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let det = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    if !(det.abs() > 0.0) {
        return Err(FemError::Degenerate);
    }
    let area = 0.5 * det.abs();
    // gradients of the barycentric coordinates
    let g = [
        [(c[1][1] - c[2][1]) / det, (c[2][0] - c[1][0]) / det],
        [(c[2][1] - c[0][1]) / det, (c[0][0] - c[2][0]) / det],
        [(c[0][1] - c[1][1]) / det, (c[1][0] - c[0][0]) / det],
    ];
    let gd = |i: usize, j: usize| g[i][0] * g[j][0] + g[i][1] * g[j][1];
    if order == 1 {
        let mut m = vec![area / 12.0; 9];
        let mut a = vec![0.0; 9];
        for i in 0..3 {
            m[4 * i] = area / 6.0;
            for j in 0..3 {
                a[3 * i + j] = area * gd(i, j);
            }
        }
        return Ok((m, a));
    }
    const EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
    let mut m = vec![0.0; 36];
    let mut a = vec![0.0; 36];
    for &(l, w) in TriangleRule::Degree4.points() {
        let mut phi = [0.0; 6];
        let mut grad = [[0.0; 2]; 6];
        for i in 0..3 {
            phi[i] = l[i] * (2.0 * l[i] - 1.0);
            let s = 4.0 * l[i] - 1.0;
            grad[i] = [s * g[i][0], s * g[i][1]];
        }
        for (k, &[i, j]) in EDGES.iter().enumerate() {
            phi[3 + k] = 4.0 * l[i] * l[j];
            grad[3 + k] = [
                4.0 * (l[j] * g[i][0] + l[i] * g[j][0]),
                4.0 * (l[j] * g[i][1] + l[i] * g[j][1]),
            ];
        }
        let wa = w * area;
        for i in 0..6 {
            for j in 0..6 {
                m[6 * i + j] += wa * phi[i] * phi[j];
                a[6 * i + j] += wa * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
            }
        }
    }
    Ok((m, a))
}

/// Assemble consistent mass and stiffness matrices for `order` 1 or 2.
pub fn assemble(mesh: &Mesh, order: usize) -> Result<OperatorPair> {
    if order != 1 && order != 2 {
        return Err(FemError::Order(order));
    }
    let (dofs, coords) = dof_map(mesh, order);
    let n = coords.len();
    let mut pattern = vec![Vec::new(); n];
    for local in &dofs {
        for &i in local {
            pattern[i].extend_from_slice(local);
        }
    }
    let mut mass = CsrMatrix::from_pattern(pattern);
    let mut stiffness = mass.clone();
    let elements: Vec<(Vec<f64>, Vec<f64>)> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| element_matrices(mesh.corners(t), order))
        .collect::<Result<_>>()?;
    // sequential scatter in triangle order keeps the sums deterministic
    for (local, (me, ae)) in dofs.iter().zip(&elements) {
        let k = local.len();
        for (r, &i) in local.iter().enumerate() {
            for (s, &j) in local.iter().enumerate() {
                mass.add(i, j, me[k * r + s]);
                stiffness.add(i, j, ae[k * r + s]);
            }
        }
    }
    Ok(OperatorPair {
        mass,
        stiffness,
        order,
        dof_coords: coords,
        num_vertices: mesh.num_vertices(),
    })
}

/// Diagonal mass with the total preserved and entries proportional to the
/// consistent diagonal; positive for both element orders.
pub fn lumped_mass(m: &CsrMatrix) -> CsrMatrix {
    let d = m.diag();
    let total: f64 = m.vals.iter().sum();
    let trace: f64 = d.iter().sum();
    CsrMatrix::diagonal(&d.iter().map(|x| x * total / trace).collect::<Vec<_>>())
}
