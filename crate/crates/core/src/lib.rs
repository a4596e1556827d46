//! Neumann eigenvalues of the Laplacian and of the even poly-Laplacians
//! `Delta^{2m}`: exact values on balls, finite-element and
//! particular-solution computations on planar domains, and trial-function
//! certificates for the upper bound `Upsilon_1(Omega) <= Upsilon_1(B_Omega)`.

pub mod specfun;
pub mod ballspec;
pub mod geometry;
pub mod fem;
pub mod weinberger;
pub mod mps;
pub mod cli;
