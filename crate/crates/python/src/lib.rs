//! Python bindings. Structured results come back as plain dicts and lists
//! with the same shape as the CLI's JSON.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use framepaver_core as fp;
use fp::gram::{fit_envelope, GramSystem as CoreGram, LayoutKind};
use fp::oracle::{min_partition_with, OracleOptions};
use fp::partition::PaveOptions;
use fp::{DecayEnvelope, Error, IndexRange, Paving};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Accepts a JSON string or any object `json.dumps` can handle.
fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => py.import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    serde_json::from_str(&text).map_err(err)
}

fn interval(i: fp::Interval) -> (f64, f64) {
    (i.lo, i.hi)
}

/// Cross-Gram system `G[n][m] = |f_n(τ_m)|`, indices 1-based.
#[pyclass(name = "GramSystem", module = "framepaver", frozen)]
struct PyGram {
    inner: CoreGram,
}

fn core_result<T>(r: Result<T, Error>) -> PyResult<T> {
    r.map_err(err)
}

#[pymethods]
impl PyGram {
    #[new]
    #[pyo3(signature = (rows, envelope=None, diag_floor=None))]
    fn new(rows: Vec<Vec<f64>>, envelope: Option<(f64, f64)>, diag_floor: Option<f64>) -> PyResult<Self> {
        let mut g = core_result(CoreGram::dense(rows))?;
        if let Some((a, s)) = envelope {
            g = core_result(g.with_envelope(core_result(DecayEnvelope::new(a, s))?))?;
        }
        if let Some(c) = diag_floor {
            g = core_result(g.with_diag_floor(c))?;
        }
        Ok(Self { inner: g })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreGram::from_json_str(text).map(|inner| Self { inner }).map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    /// Exact power law `A/(1+|n−m|)^s` off the diagonal, `C` on it.
    #[staticmethod]
    #[pyo3(signature = (a, s, c, size, seed=None, layout="toeplitz"))]
    fn power_law(a: f64, s: f64, c: f64, size: usize, seed: Option<u64>, layout: &str) -> PyResult<Self> {
        let g = core_result(fp::power_law_gram(a, s, c, size, seed))?;
        Ok(Self { inner: core_result(g.to_layout(layout_kind(layout)?))? })
    }

    #[staticmethod]
    fn translates(window: Vec<f64>, period: usize) -> PyResult<Self> {
        Ok(Self { inner: core_result(fp::translate_frame_gram(&window, period))? })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn envelope(&self) -> Option<(f64, f64)> {
        self.inner.envelope().map(|e| (e.amplitude(), e.exponent()))
    }

    #[getter]
    fn diag_floor(&self) -> Option<f64> {
        self.inner.diag_floor()
    }

    fn get(&self, n: usize, m: usize) -> Option<f64> {
        self.inner.get(n, m)
    }

    fn entry_bound(&self, n: usize, m: usize) -> PyResult<(f64, f64)> {
        core_result(fp::entry_bound(&self.inner, n, m)).map(interval)
    }

    fn certified_min_a(&self, s: f64) -> PyResult<f64> {
        core_result(fp::certified_min_a(&self.inner, s))
    }

    #[pyo3(signature = (a, s, tol=fp::gram::DEFAULT_ENVELOPE_TOL))]
    fn verify_envelope(&self, py: Python<'_>, a: f64, s: f64, tol: f64) -> PyResult<Py<PyAny>> {
        let e = core_result(DecayEnvelope::new(a, s))?;
        to_py(py, &fp::verify_envelope(&self.inner, &e, tol))
    }

    fn diag_lower_bound(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &fp::diag_lower_bound(&self.inner))
    }

    fn fit_envelope(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &core_result(fit_envelope(&self.inner))?)
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    fn __repr__(&self) -> String {
        format!("GramSystem(size={}, envelope={:?}, diag_floor={:?})", self.size(), self.envelope(), self.diag_floor())
    }
}

fn layout_kind(name: &str) -> PyResult<LayoutKind> {
    match name {
        "dense" => Ok(LayoutKind::Dense),
        "banded" => Ok(LayoutKind::Banded),
        "toeplitz" => Ok(LayoutKind::Toeplitz),
        other => Err(PyValueError::new_err(format!("unknown layout {other:?}"))),
    }
}

#[pyfunction]
#[pyo3(signature = (s, tol=1e-12))]
fn zeta(s: f64, tol: f64) -> PyResult<(f64, f64)> {
    core_result(fp::zeta(s, tol)).map(interval)
}

#[pyfunction]
#[pyo3(signature = (s, tol=1e-9))]
fn d_s(s: f64, tol: f64) -> PyResult<(f64, f64)> {
    core_result(fp::d_s(s, tol)).map(interval)
}

#[pyfunction]
fn c_s(s: f64) -> PyResult<f64> {
    core_result(fp::c_s(s))
}

#[pyfunction]
fn verify_separation_bound(py: Python<'_>, s: f64, delta_max: usize, trunc: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &core_result(fp::verify_separation_bound(s, delta_max, trunc))?)
}

#[pyfunction]
fn choose_modulus(a: f64, s: f64, c: f64) -> PyResult<usize> {
    core_result(fp::choose_modulus(a, s, c))
}

/// Residue classes modulo `modulus`, over ℕ or over `1..=size`.
#[pyfunction]
#[pyo3(signature = (modulus, size=None))]
fn residue_partition(py: Python<'_>, modulus: usize, size: Option<usize>) -> PyResult<Py<PyAny>> {
    let range = size.map_or(IndexRange::Naturals, IndexRange::Prefix);
    to_py(py, &core_result(fp::residue_partition(modulus, range))?)
}

#[pyfunction]
fn certify(py: Python<'_>, g: &PyGram, paving: &Bound<'_, PyAny>, epsilon: f64) -> PyResult<Py<PyAny>> {
    let paving: Paving = from_py(py, paving)?;
    to_py(py, &core_result(fp::certify(&g.inner, &paving, epsilon))?)
}

/// Modulus, residue paving and certificate in one step.
#[pyfunction]
#[pyo3(signature = (g, epsilon=None, modulus=None))]
fn pave(py: Python<'_>, g: &PyGram, epsilon: Option<f64>, modulus: Option<usize>) -> PyResult<Py<PyAny>> {
    to_py(py, &core_result(fp::pave(&g.inner, PaveOptions { epsilon, modulus }))?)
}

#[pyfunction]
fn exact_margin(g: &PyGram, class: Vec<usize>) -> PyResult<f64> {
    core_result(fp::exact_margin(&g.inner, &class))
}

#[pyfunction]
#[pyo3(signature = (g, epsilon=fp::oracle::DEFAULT_EPSILON, cap=fp::oracle::DEFAULT_SIZE_CAP, parallel=false))]
fn min_partition(py: Python<'_>, g: &PyGram, epsilon: f64, cap: usize, parallel: bool) -> PyResult<Py<PyAny>> {
    let inner = g.inner.clone();
    let result = py.detach(move || min_partition_with(&inner, OracleOptions { epsilon, cap, parallel }));
    to_py(py, &core_result(result)?)
}

#[pyfunction]
#[pyo3(signature = (dim, vectors, functionals=None))]
fn frame_operator_check(
    py: Python<'_>,
    dim: usize,
    vectors: Vec<Vec<f64>>,
    functionals: Option<Vec<Vec<f64>>>,
) -> PyResult<Py<PyAny>> {
    let fs = core_result(fp::FrameSystem::new(dim, vectors, functionals))?;
    to_py(py, &fp::frame_operator_check(&fs))
}

#[pymodule]
fn framepaver(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGram>()?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(d_s, m)?)?;
    m.add_function(wrap_pyfunction!(c_s, m)?)?;
    m.add_function(wrap_pyfunction!(verify_separation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(choose_modulus, m)?)?;
    m.add_function(wrap_pyfunction!(residue_partition, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(pave, m)?)?;
    m.add_function(wrap_pyfunction!(exact_margin, m)?)?;
    m.add_function(wrap_pyfunction!(min_partition, m)?)?;
    m.add_function(wrap_pyfunction!(frame_operator_check, m)?)?;
    Ok(())
}
