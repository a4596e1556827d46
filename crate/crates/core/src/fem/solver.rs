use std::collections::VecDeque;

use super::sparse::{axpy, dot, CsrMatrix};
use super::{FemError, Result};

/// Reverse Cuthill-McKee ordering; `perm[k]` is the original index placed
/// at position `k`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, placed: &[bool]| {
        let mut level = vec![usize::MAX; n];
        level[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut depth = 0;
        let mut last = vec![start];
        while let Some(i) = queue.pop_front() {
            for &j in a.row(i).0 {
                if !placed[j] && level[j] == usize::MAX {
                    level[j] = level[i] + 1;
                    if level[j] > depth {
                        depth = level[j];
                        last.clear();
                    }
                    if level[j] == depth {
                        last.push(j);
                    }
                    queue.push_back(j);
                }
            }
        }
        let far = *last.iter().min_by_key(|&&j| (degree[j], j)).unwrap();
        (depth, far)
    };
    for seed in 0..n {
        if placed[seed] {
            continue;
        }
        // pseudo-peripheral start within this component
        let mut start = seed;
        let (mut depth, mut far) = bfs_levels(start, &placed);
        loop {
            let (d2, f2) = bfs_levels(far, &placed);
            if d2 <= depth {
                break;
            }
            start = far;
            depth = d2;
            far = f2;
        }
        let begin = order.len();
        placed[start] = true;
        order.push(start);
        let mut head = begin;
        while head < order.len() {
            let i = order[head];
            head += 1;
            let mut next: Vec<usize> = a.row(i).0.iter().copied().filter(|&j| !placed[j]).collect();
            next.sort_by_key(|&j| (degree[j], j));
            for j in next {
                placed[j] = true;
                order.push(j);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor stored by rows over the envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factor the leading `size` rows of `a` in the order `perm`.
    fn factor(a: &CsrMatrix, perm: Vec<usize>, size: usize) -> Result<Self> {
        let mut inv = vec![usize::MAX; a.n];
        for (k, &i) in perm[..size].iter().enumerate() {
            inv[i] = k;
        }
        let mut first = vec![0usize; size];
        let mut offset = vec![0usize; size + 1];
        for k in 0..size {
            let (cols, _) = a.row(perm[k]);
            first[k] = cols.iter().map(|&j| inv[j]).filter(|&j| j <= k).min().unwrap_or(k);
            offset[k + 1] = offset[k] + (k - first[k] + 1);
        }
        let mut data = vec![0.0; offset[size]];
        for k in 0..size {
            let (cols, vals) = a.row(perm[k]);
            for (&j, &v) in cols.iter().zip(vals) {
                let jj = inv[j];
                if jj != usize::MAX && jj <= k {
                    data[offset[k] + jj - first[k]] = v;
                }
            }
        }
        for i in 0..size {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(offset[i]);
            let row = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let rj = &done[offset[j]..offset[j + 1]];
                let s: f64 = row[lo - fi..j - fi]
                    .iter()
                    .zip(&rj[lo - fj..j - fj])
                    .map(|(p, q)| p * q)
                    .sum();
                row[j - fi] = (row[j - fi] - s) / rj[j - fj];
            }
            let s: f64 = row[..i - fi].iter().map(|x| x * x).sum();
            let d = row[i - fi] - s;
            if !(d > 0.0) {
                return Err(FemError::NotPositiveDefinite(i));
            }
            row[i - fi] = d.sqrt();
        }
        Ok(Self {
            perm,
            first,
            offset,
            data,
        })
    }

    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let perm = rcm_ordering(a);
        Self::factor(a, perm, a.n)
    }

    pub fn size(&self) -> usize {
        self.first.len()
    }

    pub fn envelope_len(&self) -> usize {
        self.data.len()
    }

    fn solve_permuted(&self, y: &mut [f64]) {
        let n = self.size();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(p, q)| p * q).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
    }

    /// Solve `A x = b` for a full (non-pinned) factorization.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.perm[..self.size()].iter().map(|&i| b[i]).collect();
        self.solve_permuted(&mut y);
        let mut x = vec![0.0; b.len()];
        for (k, &i) in self.perm[..self.size()].iter().enumerate() {
            x[i] = y[k];
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradients; converged when
/// `||b - A x|| <= tol ||b||`. Consistent singular systems are allowed.
pub fn cg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = a.n;
    let dinv: Vec<f64> = a.diag().iter().map(|d| 1.0 / d).collect();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(p, q)| p * q).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut best = f64::INFINITY;
    for it in 1..=max_iter {
        a.mul_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let res = dot(&r, &r).sqrt() / bnorm;
        best = best.min(res);
        if res <= tol {
            return Ok((x, it));
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&dinv) {
            *zi = ri * di;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(FemError::CgDiverged { iterations: max_iter, residual: best })
}

/// How `A x = b` is solved on the mean-zero complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolver {
    /// Envelope Cholesky of `A` with one pinned dof.
    #[default]
    Cholesky,
    /// Jacobi CG to relative tolerance `1e-12`.
    Cg,
}

pub const INNER_TOL: f64 = 1e-12;

/// Solver for the singular Neumann stiffness matrix whose null space is
/// the constants. Right-hand sides are projected onto `1^perp` and
/// solutions are returned `M`-orthogonal to the constants.
pub struct NeumannSolver<'a> {
    a: &'a CsrMatrix,
    m: &'a CsrMatrix,
    m_ones: Vec<f64>,
    m_total: f64,
    kind: InnerSolver,
    factor: Option<EnvelopeCholesky>,
}

impl<'a> NeumannSolver<'a> {
    pub fn new(a: &'a CsrMatrix, m: &'a CsrMatrix, kind: InnerSolver) -> Result<Self> {
        let m_ones = m.mul(&vec![1.0; m.n]);
        let m_total: f64 = m_ones.iter().sum();
        let factor = match kind {
            InnerSolver::Cholesky => {
                // pinning the last dof in RCM order leaves an SPD leading block
                let perm = rcm_ordering(a);
                Some(EnvelopeCholesky::factor(a, perm, a.n - 1)?)
            }
            InnerSolver::Cg => None,
        };
        Ok(Self {
            a,
            m,
            m_ones,
            m_total,
            kind,
            factor,
        })
    }

    pub fn kind(&self) -> InnerSolver {
        self.kind
    }

    /// Remove the constant component in the `M` inner product.
    pub fn deflate(&self, v: &mut [f64]) {
        let c = dot(&self.m_ones, v) / self.m_total;
        for x in v.iter_mut() {
            *x -= c;
        }
    }

    pub fn mass(&self) -> &CsrMatrix {
        self.m
    }

    /// `x = A^+ b` on the complement, `M`-orthogonal to constants.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mean = b.iter().sum::<f64>() / b.len() as f64;
        let rhs: Vec<f64> = b.iter().map(|x| x - mean).collect();
        let mut x = match &self.factor {
            Some(f) => {
                // one step of iterative refinement against the unpinned matrix
                let mut x = f.solve(&rhs);
                let ax = self.a.mul(&x);
                let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(p, q)| p - q).collect();
                let rm = r.iter().sum::<f64>() / r.len() as f64;
                r.iter_mut().for_each(|v| *v -= rm);
                axpy(1.0, &f.solve(&r), &mut x);
                x
            }
            None => cg(self.a, &rhs, INNER_TOL, 20 * self.a.n + 100)?.0,
        };
        self.deflate(&mut x);
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize, shift: f64) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![i];
                if i > 0 {
                    r.push(i - 1);
                }
                if i + 1 < n {
                    r.push(i + 1);
                }
                r
            })
            .collect();
        let mut a = CsrMatrix::from_pattern(rows);
        for i in 0..n - 1 {
            a.add(i, i, 1.0);
            a.add(i + 1, i + 1, 1.0);
            a.add(i, i + 1, -1.0);
            a.add(i + 1, i, -1.0);
        }
        for i in 0..n {
            a.add(i, i, shift);
        }
        a
    }

    #[test]
    fn cholesky_and_cg_agree() {
        let a = path_laplacian(50, 0.1);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let x1 = EnvelopeCholesky::new(&a).unwrap().solve(&b);
        let (x2, _) = cg(&a, &b, 1e-14, 1000).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-10);
        }
        let r = a.mul(&x1);
        assert!(r.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn singular_solve_on_complement() {
        let a = path_laplacian(40, 0.0);
        let m = CsrMatrix::diagonal(&vec![1.0; 40]);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).cos()).collect();
        let mut bp = b.clone();
        let mean = bp.iter().sum::<f64>() / 40.0;
        bp.iter_mut().for_each(|x| *x -= mean);
        for kind in [InnerSolver::Cholesky, InnerSolver::Cg] {
            let s = NeumannSolver::new(&a, &m, kind).unwrap();
            let x = s.solve(&b).unwrap();
            let ax = a.mul(&x);
            assert!(ax.iter().zip(&bp).all(|(p, q)| (p - q).abs() < 1e-9));
            assert!(x.iter().sum::<f64>().abs() < 1e-10);
        }
    }
}
