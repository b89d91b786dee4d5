//! Python bindings: operator matrices, spectra, unitary matrix elements and the verification suites.

use locop::cli::{operator_grid, parse_symbol, resolve_toml, run_records};
use locop::experiments::records_to_json;
use locop::geometry::GroupElement;
use locop::operators::{
    localization_matrix as build_localization, radial_toeplitz_diagonal, spectral_summary, toeplitz_matrix as build_toeplitz,
    OperatorMatrix, SymbolDomain, SymbolSpec,
};
use locop::spaces::{CoefficientVector, SpaceParams};
use locop::unitaries;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: locop::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn space_and_symbol(space: &str, weight: f64, symbol: &str) -> PyResult<(SpaceParams, SymbolSpec)> {
    let (space, domain) = match space {
        "bergman" => (SpaceParams::bergman(weight), SymbolDomain::Disc),
        "fock" => (SpaceParams::fock(weight), SymbolDomain::Plane),
        other => return Err(PyValueError::new_err(format!("unknown space `{other}`, expected bergman or fock"))),
    };
    let space = space.map_err(py_err)?;
    let symbol = parse_symbol("symbol", symbol, domain).map_err(py_err)?;
    Ok((space, symbol))
}

fn rows(m: &OperatorMatrix) -> Vec<Vec<Complex64>> {
    (0..m.size()).map(|i| (0..m.size()).map(|k| m.entries[(i, k)]).collect()).collect()
}

fn window(space: SpaceParams, coeffs: &[f64]) -> PyResult<CoefficientVector> {
    let b: Vec<Complex64> = coeffs.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    CoefficientVector::from_orthonormal(space, &b).map_err(py_err)
}

/// N×N Toeplitz matrix, rows indexed by the output basis vector.
#[pyfunction]
#[pyo3(signature = (space, weight, symbol, n))]
fn toeplitz_matrix(space: &str, weight: f64, symbol: &str, n: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let (space, symbol) = space_and_symbol(space, weight, symbol)?;
    let grid = operator_grid(&space, &symbol, 2 * n).map_err(py_err)?;
    Ok(rows(&build_toeplitz(&space, &symbol, n, &grid).map_err(py_err)?))
}

/// Eigenvalues (descending) of the N×N Toeplitz truncation.
#[pyfunction]
#[pyo3(signature = (space, weight, symbol, n))]
fn toeplitz_spectrum(space: &str, weight: f64, symbol: &str, n: usize) -> PyResult<Vec<f64>> {
    let (space, symbol) = space_and_symbol(space, weight, symbol)?;
    let grid = operator_grid(&space, &symbol, 2 * n).map_err(py_err)?;
    let m = build_toeplitz(&space, &symbol, n, &grid).map_err(py_err)?;
    Ok(spectral_summary(&m, None, &[]).map_err(py_err)?.eigenvalues)
}

/// Diagonal of a radial Toeplitz operator in the orthonormal monomial basis.
#[pyfunction]
#[pyo3(signature = (space, weight, symbol, n))]
fn radial_diagonal(space: &str, weight: f64, symbol: &str, n: usize) -> PyResult<Vec<f64>> {
    let (space, symbol) = space_and_symbol(space, weight, symbol)?;
    radial_toeplitz_diagonal(&space, &symbol, n).map_err(py_err)
}

/// N×N localization matrix with windows given by orthonormal-basis coefficients.
#[pyfunction]
#[pyo3(signature = (space, weight, symbol, phi, psi, n))]
fn localization_matrix(space: &str, weight: f64, symbol: &str, phi: Vec<f64>, psi: Vec<f64>, n: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let (space, symbol) = space_and_symbol(space, weight, symbol)?;
    let (phi, psi) = (window(space, &phi)?, window(space, &psi)?);
    let degree = 2 * n + 2 * phi.degree().max(psi.degree());
    let grid = operator_grid(&space, &symbol, degree).map_err(py_err)?;
    Ok(rows(&build_localization(&space, &symbol, &phi, &psi, n, 1, &grid).map_err(py_err)?))
}

/// ⟨U^α_{e^{iθ},a} e_j, e_k⟩ on the weighted Bergman space.
#[pyfunction]
fn mobius_element(alpha: f64, theta: f64, a: Complex64, j: usize, k: usize) -> PyResult<Complex64> {
    let g = GroupElement::new(theta, a).map_err(py_err)?;
    unitaries::u_matrix_element(alpha, &g, j, k).map_err(py_err)
}

/// ⟨W^β_z e_j, e_k⟩ on the Fock space.
#[pyfunction]
fn weyl_element(beta: f64, z: Complex64, j: usize, k: usize) -> PyResult<Complex64> {
    unitaries::w_matrix_element(beta, z, j, k).map_err(py_err)
}

/// Runs a verification suite configured by TOML text; returns (passed, records as JSON).
#[pyfunction]
#[pyo3(signature = (command, config = ""))]
fn run_suite(py: Python<'_>, command: &str, config: &str) -> PyResult<(bool, String)> {
    let resolved = resolve_toml(command, config).map_err(py_err)?;
    let records = py.detach(|| run_records(&resolved)).map_err(py_err)?;
    let passed = records.iter().all(|r| r.passed());
    Ok((passed, records_to_json(&records).map_err(py_err)?))
}

#[pymodule]
fn locop_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(toeplitz_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(toeplitz_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(radial_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(localization_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(mobius_element, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_element, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
