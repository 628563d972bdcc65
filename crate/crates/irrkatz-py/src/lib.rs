use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use irrkatz::corpus::{corpus, find};
use irrkatz::formal::{extract_formal_data, fuchs_defect, FormalData};
use irrkatz::lattice::LatticeVector;
use irrkatz::reduce::reduce as reduce_vector;
use irrkatz::rootsys::RootBasis;
use irrkatz::weylalg::parse_operator;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn load(formal_json: &str) -> PyResult<FormalData> {
    FormalData::from_json(formal_json).map_err(value_error)
}

/// Formal data of an operator as JSON.
#[pyfunction]
fn analyze(op: &str) -> PyResult<String> {
    let p = parse_operator(op).map_err(value_error)?;
    Ok(extract_formal_data(&p).map_err(value_error)?.to_json())
}

/// Diagram label of the basis built from formal data.
#[pyfunction]
fn diagram_label(formal_json: &str) -> PyResult<String> {
    let m = LatticeVector::from_formal(&load(formal_json)?);
    Ok(RootBasis::build(&m.shape).map_err(value_error)?.classify())
}

/// `(verdict, idx, transcript)` for the multiplicity vector of formal data.
#[pyfunction]
fn reduce(formal_json: &str) -> PyResult<(String, i64, String)> {
    let m = LatticeVector::from_formal(&load(formal_json)?);
    let basis = RootBasis::build(&m.shape).map_err(value_error)?;
    let t = reduce_vector(&m).map_err(value_error)?;
    Ok((t.verdict.to_string(), basis.idx(&m), t.to_json_lines()))
}

/// Fuchs defect as text; `"0"` for Fuchsian data.
#[pyfunction]
fn fuchs(formal_json: &str) -> PyResult<String> {
    Ok(fuchs_defect(&load(formal_json)?).to_string())
}

/// Names of the bundled examples.
#[pyfunction]
fn examples() -> Vec<String> {
    corpus().iter().map(|e| e.name.to_string()).collect()
}

/// Operator text of a bundled example at the given seed.
#[pyfunction]
#[pyo3(signature = (name, seed=0))]
fn example_operator(name: &str, seed: u64) -> PyResult<String> {
    let e = find(name).ok_or_else(|| value_error(format!("unknown example {name}")))?;
    Ok(e.instantiate(&e.values_for_seed(seed)))
}

#[pymodule]
fn irrkatz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(diagram_label, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(fuchs, m)?)?;
    m.add_function(wrap_pyfunction!(examples, m)?)?;
    m.add_function(wrap_pyfunction!(example_operator, m)?)?;
    Ok(())
}
