//! Mixed finite elements for the Neumann problems of `Delta` and
//! `Delta^{2m}` on planar domains.
//!
//! With mass `M` and stiffness `A` of continuous P1 or P2 elements, the
//! poly-Laplacian is `K_m = A (M^-1 A)^{2m-1}`. Both boundary conditions
//! are natural, so nothing is constrained. Eigenpairs are found by block
//! Krylov iteration on `(A^+ M)^{2m}` restricted to the `M`-orthogonal
//! complement of the constants.

pub mod assemble;
pub mod convergence;
pub mod eigen;
pub mod solver;
pub mod sparse;

pub use assemble::{assemble, lumped_mass, OperatorPair};
pub use convergence::{convergence_study, extrapolate, fit_power_law, Extrapolation, ConvergenceStudy, PowerFit};
pub use eigen::{
    eig_mesh, eig_neumann_laplacian, eig_operator, eig_polyharmonic_neumann, pencil_residual, EigOptions, EigResult,
    Operator, MAX_M, RESIDUAL_TOL,
};
pub use solver::{InnerSolver, NeumannSolver};
pub use sparse::CsrMatrix;

use crate::geometry::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum FemError {
    #[error("element order {0} is not supported (use 1 or 2)")]
    Order(usize),
    #[error("degenerate triangle")]
    Degenerate,
    #[error("matrix not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
    #[error("conjugate gradients stalled after {iterations} iterations (best relative residual {residual:.3e})")]
    CgDiverged { iterations: usize, residual: f64 },
    #[error("Krylov breakdown persisted after fresh start vectors")]
    Breakdown,
    #[error("eigenpair {index} did not converge (relative residual {residual:.3e})")]
    NotConverged { index: usize, residual: f64 },
    #[error("cannot compute {0} eigenvalues on this mesh")]
    Count(usize),
    #[error("m = {0} is outside 1..=4")]
    Power(usize),
    #[error("mesh sizes must be at least three positive, strictly decreasing values: {0:?}")]
    MeshSizes(Vec<f64>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, FemError>;
