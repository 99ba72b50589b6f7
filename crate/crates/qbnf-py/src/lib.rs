//! Python bindings: the main engine operations over the same JSON
//! contracts as the command-line tool, plus direct numeric entry points
//! for the verification layers.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qbnf_core::inversion::invert_qbnf;
use qbnf_core::normal_form::{
    jet_normal_form, weyl_to_functional, JetDto, NormalFormDto, NormalFormSeries, PotentialJet,
};
use qbnf_core::spectra::{predict_eigenvalues, solve_eigenvalues, EigensolverConfig};
use qbnf_core::weyl::Sign;

fn val_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_jet(jet_json: &str) -> PyResult<PotentialJet> {
    let dto: JetDto = serde_json::from_str(jet_json).map_err(val_err)?;
    PotentialJet::from_dto(&dto).map_err(val_err)
}

/// Quantum Birkhoff normal form of a potential jet.
///
/// Takes a jet as JSON (`{"sign": "+", "E0": "0", "a": ["1", "0"]}`) and
/// returns the normal form as JSON with exact rational coefficients.
#[pyfunction]
#[pyo3(signature = (jet_json, max_degree = 10))]
fn forward(jet_json: &str, max_degree: u32) -> PyResult<String> {
    let jet = parse_jet(jet_json)?;
    let (nf, _) = jet_normal_form(&jet, max_degree).map_err(val_err)?;
    serde_json::to_string_pretty(&nf.to_dto()).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Recover the potential jet from a normal form, choosing the sign of the
/// cubic coefficient ("+" or "-").
#[pyfunction]
#[pyo3(signature = (nf_json, sign_choice = "+"))]
fn invert(nf_json: &str, sign_choice: &str) -> PyResult<String> {
    let dto: NormalFormDto = serde_json::from_str(nf_json).map_err(val_err)?;
    let nf = NormalFormSeries::from_dto(&dto).map_err(val_err)?;
    let sign = Sign::parse(sign_choice)
        .ok_or_else(|| PyValueError::new_err(format!("unrecognized sign {sign_choice:?}")))?;
    let (jet, _) = invert_qbnf(&nf, sign).map_err(val_err)?;
    serde_json::to_string_pretty(&jet.trimmed().to_dto())
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Eigenvalue predictions `E_0..E_levels` from the jet's functional normal
/// form at the given ħ.
#[pyfunction]
#[pyo3(signature = (jet_json, hbar, levels = 3, max_degree = 10))]
fn predict(jet_json: &str, hbar: f64, levels: usize, max_degree: u32) -> PyResult<Vec<f64>> {
    let jet = parse_jet(jet_json)?;
    let (nf, _) = jet_normal_form(&jet, max_degree).map_err(val_err)?;
    let fnf = weyl_to_functional(&nf);
    predict_eigenvalues(&fnf, hbar, levels).map_err(val_err)
}

/// Numerically computed eigenvalues of `−½ħ²ψ″ + Vψ` for the jet's
/// potential (Dirichlet finite differences, Richardson-extrapolated).
#[pyfunction]
#[pyo3(signature = (jet_json, hbar, levels = 3))]
fn solve(jet_json: &str, hbar: f64, levels: usize) -> PyResult<Vec<f64>> {
    let jet = parse_jet(jet_json)?;
    let np = jet.numeric();
    let cfg = EigensolverConfig::new(hbar, levels + 1);
    let sol = solve_eigenvalues(&|x| np.eval(x), &cfg).map_err(val_err)?;
    Ok(sol.eigenvalues)
}

/// ħ²-order energy coefficient of `V = x²/2 + a x³ + b x⁴` at level `n`
/// from second-order perturbation theory.
#[pyfunction]
fn hbar2_coefficient(a: f64, b: f64, n: u32) -> f64 {
    qbnf_core::spectra::perturbation_oracle(a, b, n)
}

#[pymodule]
fn qbnf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(forward, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(hbar2_coefficient, m)?)?;
    Ok(())
}
