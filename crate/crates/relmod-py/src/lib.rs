//! Python bindings for the relational-model library: the `Model` class plus
//! a few constructors, with reports returned as plain dictionaries.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString};
use relmod::fit::{Algorithm, ExtendedMode, FitOptions};
use relmod::io;
use relmod::model::{Distribution, ModelMatrix, Observed};
use relmod::oracle::OracleOptions;
use serde_json::Value;
use std::str::FromStr;

fn value_to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else {
                n.as_f64()
                    .ok_or_else(|| PyValueError::new_err("non-finite number in report"))?
                    .into_pyobject(py)?
                    .into_any()
            }
        }
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, value_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn observed(model: &ModelMatrix, counts: Vec<f64>) -> PyResult<Observed> {
    if counts.len() != model.n_cells() {
        return Err(PyValueError::new_err(format!(
            "expected {} counts, got {}",
            model.n_cells(),
            counts.len()
        )));
    }
    Observed::new(counts).map_err(to_value_err)
}

fn fit_options(
    algorithm: &str,
    extended: &str,
    tol_inner: f64,
    tol_outer: f64,
) -> PyResult<FitOptions> {
    Ok(FitOptions {
        tol_inner,
        tol_outer,
        algorithm: Algorithm::from_str(algorithm).map_err(PyValueError::new_err)?,
        extended: ExtendedMode::from_str(extended).map_err(PyValueError::new_err)?,
        ..FitOptions::default()
    })
}

/// A validated relational-model matrix with its sample space.
#[pyclass(frozen)]
struct Model {
    inner: ModelMatrix,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (matrix, cells, name=None))]
    fn new(matrix: Vec<Vec<i64>>, cells: Vec<String>, name: Option<String>) -> PyResult<Self> {
        let model = relmod::model::validate_model(matrix, cells).map_err(to_value_err)?;
        let model = match name {
            Some(n) => model.with_name(n),
            None => model,
        };
        Ok(Model { inner: model })
    }

    /// Parses the JSON model format {name, cells, matrix, description?}.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Model {
            inner: io::model_from_str(text, "<string>").map_err(to_value_err)?,
        })
    }

    /// Reads a model file from disk.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Model {
            inner: io::read_model(std::path::Path::new(path)).map_err(to_value_err)?,
        })
    }

    fn to_json(&self) -> String {
        io::model_to_value(&self.inner).to_string()
    }

    #[getter]
    fn name(&self) -> Option<&str> {
        self.inner.name()
    }

    #[getter]
    fn cells(&self) -> Vec<String> {
        self.inner.space().labels().to_vec()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<i64>> {
        self.inner.rows().to_vec()
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    fn has_overall_effect(&self) -> bool {
        relmod::model::has_overall_effect(&self.inner)
    }

    fn is_saturated(&self) -> bool {
        self.inner.is_saturated()
    }

    /// Canonical integer kernel basis, one row per degree of freedom.
    fn kernel_basis(&self) -> Vec<Vec<i64>> {
        relmod::kernel::kernel_basis(&self.inner).rows().to_vec()
    }

    fn degrees_of_freedom(&self) -> usize {
        relmod::kernel::kernel_basis(&self.inner).k()
    }

    /// Structural report (dimensions, kernel basis, odds ratios) as a dict.
    fn inspect<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        value_to_py(py, &io::inspect_report(&self.inner, None))
    }

    /// Generalized odds ratios as a list of dicts.
    fn odds_ratios<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = io::inspect_report(&self.inner, None);
        value_to_py(py, &report["odds_ratios"])
    }

    /// Model with the all-ones row prepended.
    fn add_overall(&self) -> PyResult<Model> {
        Ok(Model {
            inner: relmod::transform::add_overall(&self.inner).map_err(to_value_err)?,
        })
    }

    /// Removes the overall effect; returns (reduced_model, report).
    fn remove_overall<'py>(&self, py: Python<'py>) -> PyResult<(Model, Bound<'py, PyAny>)> {
        let report = relmod::transform::remove_overall(&self.inner).map_err(to_value_err)?;
        let value = io::transform_report(&self.inner, &report.reduced, Some(&report));
        Ok((
            Model {
                inner: report.reduced.clone(),
            },
            value_to_py(py, &value["report"])?,
        ))
    }

    /// Augments the sample space with the "no feature present" cell.
    fn homogenize(&self) -> PyResult<Model> {
        Ok(Model {
            inner: relmod::transform::homogenize(&self.inner).map_err(to_value_err)?,
        })
    }

    /// `D log p` for a strictly positive probability vector.
    fn membership_residuals(&self, probs: Vec<f64>) -> PyResult<Vec<f64>> {
        let p = Distribution::from_weights(&probs).map_err(to_value_err)?;
        let basis = relmod::kernel::kernel_basis(&self.inner);
        relmod::kernel::membership_residuals(&p, &basis).map_err(to_value_err)
    }

    /// Log-linear parameters of a member; returns (theta, theta0, residual).
    #[pyo3(signature = (probs, tol=1e-8))]
    fn log_linear_params(
        &self,
        probs: Vec<f64>,
        tol: f64,
    ) -> PyResult<(Vec<f64>, Option<f64>, f64)> {
        let p = Distribution::from_weights(&probs).map_err(to_value_err)?;
        let params =
            relmod::kernel::log_linear_params(&p, &self.inner, tol).map_err(to_value_err)?;
        Ok((params.theta, params.theta0, params.residual))
    }

    /// Maximum likelihood fit; returns the full report as a dict.
    #[pyo3(signature = (counts, algorithm="auto", extended="auto", tol_inner=1e-10, tol_outer=1e-10))]
    fn fit<'py>(
        &self,
        py: Python<'py>,
        counts: Vec<f64>,
        algorithm: &str,
        extended: &str,
        tol_inner: f64,
        tol_outer: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let data = observed(&self.inner, counts)?;
        let opts = fit_options(algorithm, extended, tol_inner, tol_outer)?;
        let result = relmod::fit::fit(&self.inner, &data, &opts).map_err(to_runtime_err)?;
        value_to_py(py, &io::fit_report(&self.inner, &result))
    }

    /// MLE existence certification; facial-set indices are 1-based.
    fn exists<'py>(&self, py: Python<'py>, counts: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        let data = observed(&self.inner, counts)?;
        let report = relmod::facial::existence_check(&self.inner, &data);
        value_to_py(py, &io::exists_report(&self.inner, &report))
    }

    /// Brute-force likelihood maximizer (desk-scale validation).
    #[pyo3(signature = (counts, seed=20240101))]
    fn oracle<'py>(&self, py: Python<'py>, counts: Vec<f64>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let data = observed(&self.inner, counts)?;
        let opts = OracleOptions {
            seed,
            ..OracleOptions::default()
        };
        let result =
            relmod::oracle::brute_force_mle(&self.inner, &data, &opts).map_err(to_runtime_err)?;
        value_to_py(py, &io::oracle_report(&self.inner, &result, None))
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(name={:?}, J={}, I={})",
            self.inner.name().unwrap_or("model"),
            self.inner.n_rows(),
            self.inner.n_cells()
        )
    }
}

/// Aitchison-Silvey independence of `t` binary features.
#[pyfunction]
fn as_independence(t: usize) -> PyResult<Model> {
    if !(2..=6).contains(&t) {
        return Err(PyValueError::new_err("supported for 2..=6 features"));
    }
    Ok(Model {
        inner: relmod::catalog::as_independence(t),
    })
}

/// Mutual independence of `t` binary features on the full table.
#[pyfunction]
fn mutual_independence(t: usize) -> PyResult<Model> {
    if !(2..=6).contains(&t) {
        return Err(PyValueError::new_err("supported for 2..=6 features"));
    }
    Ok(Model {
        inner: relmod::catalog::mutual_independence(t),
    })
}

#[pymodule]
fn relmod_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(as_independence, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_independence, m)?)?;
    Ok(())
}
