//! Python bindings. Structured results (reports, studies, certificates)
//! are returned as JSON strings; load them with `json.loads`.

use isospec::ballspec::{mu1_ball, neumann_spectrum_ball, upsilon1_ball, upsilon1_poly_ball, BallSpec};
use isospec::cli::{self, FemArgs};
use isospec::fem::{convergence_study, eig_mesh, EigOptions, Operator};
use isospec::geometry::{triangulate, Domain};
use isospec::mps::{mps_find, mps_sigma, MpsBasis, MpsProblem};
use isospec::specfun::{bessel_i, bessel_j, BesselOrder};
use isospec::weinberger::{certify_upper_bound, find_center, FIELD_TOL};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn domain(spec: &str) -> PyResult<Domain> {
    cli::resolve_domain(spec).map_err(value_err)
}

fn operator(name: &str, m: usize) -> PyResult<Operator> {
    match name {
        "laplace" => Ok(Operator::Laplacian),
        "poly" => Ok(Operator::Polyharmonic(m)),
        other => Err(PyValueError::new_err(format!("operator must be `laplace` or `poly`, got `{other}`"))),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(runtime_err)
}

/// `J_nu(x)`.
#[pyfunction]
fn bessel_j_value(nu: f64, x: f64) -> PyResult<f64> {
    bessel_j(BesselOrder::new(nu).map_err(value_err)?, x).map_err(value_err)
}

/// `I_nu(x)`.
#[pyfunction]
fn bessel_i_value(nu: f64, x: f64) -> PyResult<f64> {
    bessel_i(BesselOrder::new(nu).map_err(value_err)?, x).map_err(value_err)
}

/// `(mu_1, Upsilon_1, mu_1^{2m})` for the ball of radius `radius` in `R^n`.
#[pyfunction]
#[pyo3(signature = (n, radius = 1.0, m = 1))]
fn ball(n: usize, radius: f64, m: u32) -> PyResult<(f64, f64, f64)> {
    let b = BallSpec::new(n, radius).map_err(value_err)?;
    Ok((
        mu1_ball(&b).map_err(value_err)?,
        upsilon1_ball(&b).map_err(value_err)?,
        upsilon1_poly_ball(&b, m).map_err(value_err)?,
    ))
}

/// The `count` lowest nonzero levels of `Delta^power` on a ball as
/// `(value, degree, radial_index, multiplicity)` tuples.
#[pyfunction]
#[pyo3(signature = (n, radius, count, power = 1))]
fn ball_spectrum(n: usize, radius: f64, count: usize, power: u32) -> PyResult<Vec<(f64, usize, usize, u64)>> {
    let b = BallSpec::new(n, radius).map_err(value_err)?;
    let s = neumann_spectrum_ball(&b, count, power).map_err(value_err)?;
    Ok(s.entries.iter().map(|e| (e.value, e.degree, e.radial_index, e.multiplicity)).collect())
}

/// Lowest nonzero FEM eigenvalues on one mesh.
#[pyfunction]
#[pyo3(signature = (spec, h, count = 1, operator_name = "laplace", m = 1, order = 2))]
fn fem_eigenvalues(
    py: Python<'_>,
    spec: &str,
    h: f64,
    count: usize,
    operator_name: &str,
    m: usize,
    order: usize,
) -> PyResult<Vec<f64>> {
    let d = domain(spec)?;
    let op = operator(operator_name, m)?;
    let opts = EigOptions {
        order,
        ..EigOptions::default()
    };
    py.detach(|| {
        let mesh = triangulate(&d, h).map_err(value_err)?;
        eig_mesh(&mesh, count, op, &opts).map(|r| r.values).map_err(runtime_err)
    })
}

/// FEM convergence study as JSON.
#[pyfunction]
#[pyo3(signature = (spec, h, operator_name = "poly", m = 1, order = 2))]
fn convergence(py: Python<'_>, spec: &str, h: Vec<f64>, operator_name: &str, m: usize, order: usize) -> PyResult<String> {
    let d = domain(spec)?;
    let op = operator(operator_name, m)?;
    let opts = EigOptions {
        order,
        ..EigOptions::default()
    };
    let study = py.detach(|| convergence_study(&d, op, &h, &opts)).map_err(runtime_err)?;
    to_json(&study)
}

/// Trial-function center `(x, y, scaled residual)`.
#[pyfunction]
fn center(py: Python<'_>, spec: &str) -> PyResult<(f64, f64, f64)> {
    let d = domain(spec)?;
    let c = py.detach(|| find_center(&d, FIELD_TOL)).map_err(runtime_err)?;
    Ok((c.center[0], c.center[1], c.residual))
}

/// Upper-bound certificate as JSON.
#[pyfunction]
#[pyo3(signature = (spec, m = 1))]
fn certify(py: Python<'_>, spec: &str, m: u32) -> PyResult<String> {
    let d = domain(spec)?;
    let c = py.detach(|| certify_upper_bound(&d, m)).map_err(runtime_err)?;
    to_json(&c)
}

/// Verification report as JSON; `mps_terms` enables the MPS cross-check.
#[pyfunction]
#[pyo3(signature = (spec, m = 1, h = vec![0.08, 0.04, 0.02], order = 2, mps_terms = None))]
fn verify(py: Python<'_>, spec: &str, m: u32, h: Vec<f64>, order: usize, mps_terms: Option<usize>) -> PyResult<String> {
    let d = domain(spec)?;
    let args = FemArgs {
        h,
        order,
        tol: isospec::fem::RESIDUAL_TOL,
    };
    let report = py.detach(|| cli::verify(&d, m, &args, mps_terms)).map_err(runtime_err)?;
    to_json(&report)
}

fn problem(name: &str) -> PyResult<MpsProblem> {
    match name {
        "laplace" => Ok(MpsProblem::LaplaceNeumann),
        "poly" => Ok(MpsProblem::PolyharmNeumann(1)),
        other => Err(PyValueError::new_err(format!("operator must be `laplace` or `poly`, got `{other}`"))),
    }
}

/// MPS subspace angle `sigma(omega)`.
#[pyfunction]
#[pyo3(signature = (spec, omega, terms = 30, operator_name = "laplace"))]
fn sigma(py: Python<'_>, spec: &str, omega: f64, terms: usize, operator_name: &str) -> PyResult<f64> {
    let d = domain(spec)?;
    let p = problem(operator_name)?;
    let center = isospec::geometry::domain_metrics(&d).centroid;
    let basis = MpsBasis {
        problem: p,
        omega,
        terms,
        center,
    };
    py.detach(|| mps_sigma(&d, &basis)).map_err(value_err)
}

/// MPS minima in `(lo, hi)` as `(omega, eigenvalue, sigma)` tuples.
#[pyfunction]
#[pyo3(signature = (spec, lo, hi, terms = 30, operator_name = "laplace"))]
fn mps_eigenvalues(
    py: Python<'_>,
    spec: &str,
    lo: f64,
    hi: f64,
    terms: usize,
    operator_name: &str,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let d = domain(spec)?;
    let p = problem(operator_name)?;
    let scan = py.detach(|| mps_find(&d, p, (lo, hi), terms)).map_err(value_err)?;
    Ok(scan.eigen.iter().map(|e| (e.omega, e.eigenvalue, e.sigma)).collect())
}

/// Run the command-line front end in-process; returns its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    let mut full = vec!["isospec".to_string()];
    full.extend(args);
    py.detach(|| cli::run(full))
}

#[pymodule]
fn pyisospec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bessel_j_value, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i_value, m)?)?;
    m.add_function(wrap_pyfunction!(ball, m)?)?;
    m.add_function(wrap_pyfunction!(ball_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(fem_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(center, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(mps_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
