//! Python bindings: a `Workspace` class mirroring the command-line tool and
//! a few dense linear-algebra helpers.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use modtrace_core::builtin;
use modtrace_core::frames::is_frame;
use modtrace_core::haagerup::{
    factorize_trace_class, haagerup_report, haagerup_upper, phi, verify_complete_isometry, SearchOptions,
};
use modtrace_core::linalg::{self, CMatrix, C64};
use modtrace_core::traceclass::{trace_beta, trace_class_summary, trace_norm_module};
use modtrace_core::workspace::{tensor_to_json, Workspace as CoreWorkspace};
use modtrace_core::Error;

create_exception!(modtrace, ModtraceError, PyException);
create_exception!(modtrace, NotTraceClassError, ModtraceError);
create_exception!(modtrace, NoConvergenceError, ModtraceError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NotTraceClass(_) => NotTraceClassError::new_err(e.to_string()),
        Error::NoConvergence { .. } => NoConvergenceError::new_err(e.to_string()),
        _ => ModtraceError::new_err(e.to_string()),
    }
}

fn json_value<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| ModtraceError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn matrix(rows: Vec<Vec<C64>>) -> PyResult<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    CMatrix::new(r, c, rows.into_iter().flatten().collect()).map_err(to_py)
}

type Rows = Vec<Vec<C64>>;

fn rows(m: &CMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// A validated workspace document.
#[pyclass(frozen)]
struct Workspace {
    inner: CoreWorkspace,
}

#[pymethods]
impl Workspace {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        CoreWorkspace::load(path).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreWorkspace::from_json(text).map(|inner| Self { inner }).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_value(py, &self.inner.summary())
    }

    fn operators(&self) -> Vec<String> {
        self.inner.operators().keys().cloned().collect()
    }

    fn tensors(&self) -> Vec<String> {
        self.inner.tensors().keys().cloned().collect()
    }

    /// `(is_frame, deviation)` for a stored frame.
    fn frame_check(&self, frame: &str) -> PyResult<(bool, f64)> {
        let (module, members) = self.inner.frame_members(frame).map_err(to_py)?;
        let check = is_frame(module, members).map_err(to_py)?;
        Ok((check.is_frame, check.deviation))
    }

    /// Trace verdict of a positive operator in a stored or built-in frame.
    fn trace<'py>(&self, py: Python<'py>, op: &str, frame: &str) -> PyResult<Bound<'py, PyAny>> {
        let t = self.inner.operator(op).map_err(to_py)?;
        let beta = self.inner.frame_for(frame, t.domain()).map_err(to_py)?;
        json_value(py, &trace_beta(t, &beta).map_err(to_py)?.to_json())
    }

    fn trace_class<'py>(&self, py: Python<'py>, op: &str) -> PyResult<Bound<'py, PyAny>> {
        let t = self.inner.operator(op).map_err(to_py)?;
        json_value(py, &trace_class_summary(t).map_err(to_py)?)
    }

    #[pyo3(signature = (op, frame = "canonical"))]
    fn factorize<'py>(&self, py: Python<'py>, op: &str, frame: &str) -> PyResult<Bound<'py, PyAny>> {
        let t = self.inner.operator(op).map_err(to_py)?;
        let beta = self.inner.frame_for(frame, t.domain()).map_err(to_py)?;
        let u = factorize_trace_class(t, &beta).map_err(to_py)?;
        let module = self.inner.module_name(t.domain()).unwrap_or("?");
        let report = serde_json::json!({
            "tensor": tensor_to_json(module, &u),
            "representation_upper": haagerup_upper(&u),
            "trace_norm": trace_norm_module(t).map_err(to_py)?,
            "reconstruction_error": phi(&u).map_err(to_py)?.distance(t),
        });
        json_value(py, &report)
    }

    fn haagerup<'py>(&self, py: Python<'py>, tensor: &str) -> PyResult<Bound<'py, PyAny>> {
        let u = self.inner.tensor(tensor).map_err(to_py)?;
        json_value(py, &haagerup_report(u).map_err(to_py)?)
    }

    #[pyo3(signature = (level, seed, tol = 1e-3, matrix = None, tensor = None, restarts = 16, probe_width = None))]
    #[allow(clippy::too_many_arguments)]
    fn verify_isometry<'py>(
        &self,
        py: Python<'py>,
        level: usize,
        seed: u64,
        tol: f64,
        matrix: Option<&str>,
        tensor: Option<&str>,
        restarts: usize,
        probe_width: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (instance, u) = self
            .inner
            .isometry_instance(level, seed, matrix, tensor)
            .map_err(to_py)?;
        let opts = SearchOptions {
            probe_width,
            restarts,
            seed,
            ..SearchOptions::default()
        };
        let report = py
            .detach(|| verify_complete_isometry(&u, &opts, tol))
            .map_err(to_py)?;
        let mut value = serde_json::to_value(&report).map_err(|e| ModtraceError::new_err(e.to_string()))?;
        value["instance"] = serde_json::json!(instance);
        json_value(py, &value)
    }
}

/// `(name, passed, detail)` for each built-in reproduction.
#[pyfunction]
fn paper_examples() -> Vec<(String, bool, String)> {
    builtin::run_all()
        .into_iter()
        .map(|o| (o.name.to_string(), o.passed, o.detail))
        .collect()
}

#[pyfunction]
fn trace_norm(m: Vec<Vec<C64>>) -> PyResult<f64> {
    linalg::trace_norm(&matrix(m)?).map_err(to_py)
}

#[pyfunction]
fn op_norm(m: Vec<Vec<C64>>) -> PyResult<f64> {
    linalg::op_norm(&matrix(m)?).map_err(to_py)
}

/// Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix.
#[pyfunction]
fn eigh(m: Vec<Vec<C64>>) -> PyResult<(Vec<f64>, Rows)> {
    let e = linalg::herm_eig(&matrix(m)?).map_err(to_py)?;
    Ok((e.values.clone(), rows(&e.vectors)))
}

/// `(u, singular values, v)` with `m = u diag(s) v*`.
#[pyfunction]
fn svd(m: Vec<Vec<C64>>) -> PyResult<(Rows, Vec<f64>, Rows)> {
    let s = linalg::svd(&matrix(m)?).map_err(to_py)?;
    Ok((rows(&s.u), s.sigma.clone(), rows(&s.v)))
}

/// `(isometry, modulus)` of the polar decomposition.
#[pyfunction]
fn polar(m: Vec<Vec<C64>>) -> PyResult<(Rows, Rows)> {
    let p = linalg::polar(&matrix(m)?).map_err(to_py)?;
    Ok((rows(&p.isometry), rows(&p.modulus)))
}

#[pyfunction]
fn sqrt_psd(m: Vec<Vec<C64>>) -> PyResult<Vec<Vec<C64>>> {
    Ok(rows(&linalg::sqrt_psd(&matrix(m)?).map_err(to_py)?))
}

#[pymodule]
fn modtrace(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ModtraceError", py.get_type::<ModtraceError>())?;
    m.add("NotTraceClassError", py.get_type::<NotTraceClassError>())?;
    m.add("NoConvergenceError", py.get_type::<NoConvergenceError>())?;
    m.add_class::<Workspace>()?;
    m.add_function(wrap_pyfunction!(paper_examples, m)?)?;
    m.add_function(wrap_pyfunction!(trace_norm, m)?)?;
    m.add_function(wrap_pyfunction!(op_norm, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(svd, m)?)?;
    m.add_function(wrap_pyfunction!(polar, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_psd, m)?)?;
    Ok(())
}
