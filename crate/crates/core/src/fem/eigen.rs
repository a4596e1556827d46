use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assemble::{assemble, lumped_mass, OperatorPair};
use super::solver::{cg, InnerSolver, NeumannSolver};
use super::sparse::{axpy, dot, CsrMatrix};
use super::{FemError, Result};
use crate::geometry::Mesh;

/// Largest supported `m` for `Delta^{2m}`.
pub const MAX_M: usize = 4;
/// Relative residual contract on returned pairs.
pub const RESIDUAL_TOL: f64 = 1e-9;
const RITZ_TOL: f64 = 1e-12;
const STALL_BLOCKS: usize = 3;
const STALL_LEVEL: f64 = 1e-10;
const DEFAULT_SEED: u64 = 0x5eed_f00d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Laplacian,
    /// `Delta^{2m}` with vanishing normal derivatives of `Delta^j u`.
    Polyharmonic(usize),
}

impl Operator {
    /// Exponent of the Laplacian: 1 for `Delta`, `2m` for `Delta^{2m}`.
    pub fn power(self) -> usize {
        match self {
            Operator::Laplacian => 1,
            Operator::Polyharmonic(m) => 2 * m,
        }
    }

    pub fn m(self) -> Option<usize> {
        match self {
            Operator::Laplacian => None,
            Operator::Polyharmonic(m) => Some(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EigOptions {
    pub order: usize,
    pub inner: InnerSolver,
    /// Diagonal mass; fast but perturbs the discrete squaring identity.
    pub lumped: bool,
    pub seed: u64,
    pub tol: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            order: 2,
            inner: InnerSolver::Cholesky,
            lumped: false,
            seed: DEFAULT_SEED,
            tol: RESIDUAL_TOL,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EigResult {
    pub operator: Operator,
    pub m: Option<usize>,
    pub power: usize,
    pub order: usize,
    pub h: f64,
    pub ndof: usize,
    /// Ascending nonzero eigenvalues.
    pub values: Vec<f64>,
    /// Relative residuals `||K v - lambda M v|| / (max(1, lambda) ||v||_M)`,
    /// evaluated through the Laplacian pencil (see [`pencil_residual`]).
    pub residuals: Vec<f64>,
    /// `M`-orthonormal coefficient vectors over the dofs.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl EigResult {
    /// Values of eigenvector `k` at the mesh vertices.
    pub fn vertex_values(&self, k: usize, num_vertices: usize) -> &[f64] {
        &self.vectors[k][..num_vertices]
    }
}

fn m_norm(m: &CsrMatrix, v: &[f64]) -> f64 {
    dot(v, &m.mul(v)).sqrt()
}

/// Relative residual of `K v = lambda M v` with `K = A (M^-1 A)^{p-1}`.
///
/// With `mu = lambda^{1/p}` this is `p mu^{p-1} ||A v - mu M v||_{M^-1}`
/// over `max(1, lambda) ||v||_M`, the first-order size of the backward
/// error in `lambda`. Forming `K v` directly would amplify round-off in
/// `v` by the `p`-th power of the largest discrete eigenvalue.
pub fn pencil_residual(ops_a: &CsrMatrix, ops_m: &CsrMatrix, power: usize, lambda: f64, v: &[f64]) -> Result<f64> {
    let p = power as f64;
    let mu = lambda.powf(1.0 / p);
    let mut r = ops_a.mul(v);
    axpy(-mu, &ops_m.mul(v), &mut r);
    let w = cg(ops_m, &r, 1e-14, 10 * ops_m.n + 100)?.0;
    let rn = dot(&r, &w).max(0.0).sqrt();
    Ok(p * mu.powf(p - 1.0) * rn / (lambda.max(1.0) * m_norm(ops_m, v)))
}

/// Smallest `count` nonzero eigenvalues of `operator` on `mesh`.
pub fn eig_mesh(mesh: &Mesh, count: usize, operator: Operator, opts: &EigOptions) -> Result<EigResult> {
    let ops = assemble(mesh, opts.order)?;
    eig_operator(&ops, mesh.h, count, operator, opts)
}

pub fn eig_neumann_laplacian(mesh: &Mesh, count: usize) -> Result<EigResult> {
    eig_mesh(mesh, count, Operator::Laplacian, &EigOptions::default())
}

pub fn eig_polyharmonic_neumann(mesh: &Mesh, count: usize, m: usize) -> Result<EigResult> {
    eig_mesh(mesh, count, Operator::Polyharmonic(m), &EigOptions::default())
}

/// Block Krylov iteration on `T = (A^+ M)^p` in the `M` inner product with
/// full reorthogonalization; the constants are projected out of every
/// vector. The eigenvalues of `T` are `1 / lambda`.
pub fn eig_operator(ops: &OperatorPair, h: f64, count: usize, operator: Operator, opts: &EigOptions) -> Result<EigResult> {
    if count == 0 {
        return Err(FemError::Count(count));
    }
    if let Operator::Polyharmonic(m) = operator {
        if m == 0 || m > MAX_M {
            return Err(FemError::Power(m));
        }
    }
    let n = ops.dimension();
    if count + 1 >= n {
        return Err(FemError::Count(count));
    }
    let lumped;
    let mass = if opts.lumped {
        lumped = lumped_mass(&ops.mass);
        &lumped
    } else {
        &ops.mass
    };
    let solver = NeumannSolver::new(&ops.stiffness, mass, opts.inner)?;
    let power = operator.power();
    let apply_t = |v: &[f64]| -> Result<Vec<f64>> {
        let mut x = v.to_vec();
        for _ in 0..power {
            x = solver.solve(&mass.mul(&x))?;
        }
        Ok(x)
    };

    let block = count.max(2) + 1;
    let max_dim = (n - 1).min(60 * block + 100);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vector = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        solver.deflate(&mut v);
        v
    };

    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut mq: Vec<Vec<f64>> = Vec::new();
    let mut z: Vec<Vec<f64>> = Vec::new();
    // H = Q^T M T Q, grown by bordering
    let mut hmat: Vec<Vec<f64>> = Vec::new();
    let mut next: Vec<Vec<f64>> = (0..block).map(|_| random_vector(&mut rng)).collect();
    let mut last_worst = f64::INFINITY;
    let mut stalled = 0;
    let mut accepted: Option<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> = None;
    let mut last_failure = (0, f64::INFINITY);

    while q.len() < max_dim {
        let mut added = 0;
        for mut x in std::mem::take(&mut next) {
            let mut tries = 0;
            loop {
                let norm0 = m_norm(mass, &x);
                for _ in 0..2 {
                    for (qi, mqi) in q.iter().zip(&mq) {
                        let c = dot(mqi, &x);
                        axpy(-c, qi, &mut x);
                    }
                }
                solver.deflate(&mut x);
                let norm = m_norm(mass, &x);
                if norm > 1e-8 * norm0 && norm > 0.0 {
                    x.iter_mut().for_each(|v| *v /= norm);
                    break;
                }
                // breakdown: the direction is already spanned, draw a fresh one
                tries += 1;
                if tries > 3 {
                    return Err(FemError::Breakdown);
                }
                x = random_vector(&mut rng);
            }
            if q.len() >= max_dim {
                break;
            }
            let zx = apply_t(&x)?;
            let mx = mass.mul(&x);
            q.push(x);
            mq.push(mx);
            z.push(zx);
            added += 1;
        }
        let k = q.len();
        let old = k - added;
        for row in hmat.iter_mut() {
            row.resize(k, 0.0);
        }
        hmat.resize(k, vec![0.0; k]);
        for j in old..k {
            for i in 0..k {
                hmat[i][j] = dot(&mq[i], &z[j]);
                if i < old {
                    hmat[j][i] = dot(&mq[j], &z[i]);
                }
            }
        }
        let h_dense = DMatrix::from_fn(k, k, |i, j| 0.5 * (hmat[i][j] + hmat[j][i]));
        let eig = SymmetricEigen::new(h_dense);
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let want = count.min(k);
        let mut converged = k >= count;
        let mut worst: f64 = 0.0;
        for &c in idx.iter().take(want) {
            let theta = eig.eigenvalues[c];
            let s = eig.eigenvectors.column(c);
            let mut r = vec![0.0; n];
            for j in 0..k {
                axpy(s[j], &z[j], &mut r);
                axpy(-theta * s[j], &q[j], &mut r);
            }
            let rel = m_norm(mass, &r) / theta.abs();
            worst = worst.max(rel);
            if rel > RITZ_TOL {
                converged = false;
            }
        }
        // at the round-off floor the Ritz residual stops improving even
        // though the vectors may still gain in the explicit residual
        stalled = if worst < STALL_LEVEL && worst > 0.5 * last_worst { stalled + 1 } else { 0 };
        last_worst = worst;
        if k >= count && (converged || stalled >= STALL_BLOCKS || q.len() >= max_dim) {
            let mut values = Vec::with_capacity(count);
            let mut vectors = Vec::with_capacity(count);
            let mut residuals = Vec::with_capacity(count);
            for (i, &c) in idx.iter().take(count).enumerate() {
                let theta = eig.eigenvalues[c];
                if !(theta > 0.0) {
                    return Err(FemError::NotConverged { index: i, residual: f64::INFINITY });
                }
                let mut y = vec![0.0; n];
                for (j, qj) in q.iter().enumerate() {
                    axpy(eig.eigenvectors[(j, c)], qj, &mut y);
                }
                solver.deflate(&mut y);
                let norm = m_norm(mass, &y);
                y.iter_mut().for_each(|v| *v /= norm);
                let lambda = 1.0 / theta;
                let res = pencil_residual(&ops.stiffness, mass, power, lambda, &y)?;
                if !(res <= opts.tol) {
                    last_failure = (i, res);
                    break;
                }
                values.push(lambda);
                vectors.push(y);
                residuals.push(res);
            }
            if values.len() == count {
                accepted = Some((values, vectors, residuals));
                break;
            }
            stalled = 0;
        }
        next = z[k - added..].to_vec();
    }

    let (values, vectors, residuals) = accepted.ok_or(FemError::NotConverged {
        index: last_failure.0,
        residual: last_failure.1,
    })?;
    let mut warnings = Vec::new();
    if let Operator::Polyharmonic(m) = operator {
        if m >= 3 {
            warnings.push(format!(
                "power {} nests {} stiffness solves; round-off grows with each",
                power, power
            ));
        }
    }
    Ok(EigResult {
        operator,
        m: operator.m(),
        power,
        order: ops.order,
        h,
        ndof: n,
        values,
        residuals,
        vectors,
        warnings,
    })
}
