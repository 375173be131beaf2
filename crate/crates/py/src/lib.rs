//! Python bindings. Matrices cross the boundary as nested sequences of
//! complex numbers (lists or NumPy arrays in, lists of lists out); reports
//! come back as plain dicts.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::sync::Arc;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use ncstoch_core::evaluator::{EvalContext, YBindings};
use ncstoch_core::ito_verifier::{convergence_study, StudyParams, StudyTarget};
use ncstoch_core::matrix_alg::{self, Matrix, ScalarFunctionSpec};
use ncstoch_core::process_sim::{self, DriverSpec, Ensemble, ProcessPath, RngStream, TimeGrid};
use ncstoch_core::selftest;
use ncstoch_core::stoch_int::{self, ArgSpec, IntegrandSpec};
use ncstoch_core::trace_poly::{self, ContractionModel, TracePolynomial};

type PyMatrix = Vec<Vec<Complex64>>;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(m: PyMatrix) -> PyResult<Matrix> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(err("matrix must be square"));
    }
    Ok(Matrix::from_fn(n, n, |r, c| m[r][c]))
}

fn from_matrix(m: &Matrix) -> PyMatrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (s,))
}

fn model(name: &str, n: usize) -> PyResult<ContractionModel> {
    match name {
        "matrix" => Ok(ContractionModel::Matrix { n: n as u32 }),
        "free" => Ok(ContractionModel::Free),
        other => Err(err(format!("unknown model {other:?}; use 'matrix' or 'free'"))),
    }
}

/// `x1` is the driver, `x2, x3, ...` the given constant matrices.
fn driver_args(constants: Vec<PyMatrix>) -> PyResult<BTreeMap<u32, ArgSpec>> {
    let mats = constants.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
    Ok(stoch_int::driver_and_constants(&mats))
}

fn function_spec(poly: Option<Vec<Complex64>>, exp_terms: Option<Vec<(Complex64, f64)>>) -> PyResult<ScalarFunctionSpec> {
    match (poly, exp_terms) {
        (Some(c), None) => Ok(ScalarFunctionSpec::Polynomial(c)),
        (None, Some(t)) => Ok(ScalarFunctionSpec::ExpSum(t)),
        _ => Err(err("give exactly one of poly (coefficients) and exp_terms ((c, xi) pairs)")),
    }
}

/// Trace *-polynomial in canonical form.
#[pyclass(name = "TracePoly", module = "ncstoch", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTracePoly {
    inner: TracePolynomial,
}

impl From<TracePolynomial> for PyTracePoly {
    fn from(inner: TracePolynomial) -> Self {
        PyTracePoly { inner }
    }
}

#[pymethods]
impl PyTracePoly {
    #[new]
    fn new(expr: &str) -> PyResult<Self> {
        Ok(trace_poly::parse(expr).map_err(err)?.into())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("TracePoly({:?})", self.inner.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __add__(&self, other: &Self) -> Self {
        (&self.inner + &other.inner).into()
    }

    fn __sub__(&self, other: &Self) -> Self {
        (&self.inner - &other.inner).into()
    }

    fn __mul__(&self, other: &Self) -> Self {
        (&self.inner * &other.inner).into()
    }

    #[getter]
    fn num_vars(&self) -> u32 {
        self.inner.num_vars()
    }

    #[getter]
    fn num_slots(&self) -> u32 {
        self.inner.num_slots()
    }

    fn star(&self) -> Self {
        self.inner.star().into()
    }

    /// `∂_{x_var} P`, linear in the new slot `y`.
    fn derive(&self, var: u32) -> PyResult<Self> {
        Ok(trace_poly::derive(&self.inner, var).map_err(err)?.into())
    }

    /// `∂^k P` with slots `y1..yk`.
    fn derive_k(&self, k: u32) -> PyResult<Self> {
        Ok(trace_poly::derive_k(&self.inner, k).map_err(err)?.into())
    }

    fn partial(&self, var: u32, slot: u32, coord: u32) -> Self {
        trace_poly::partial(&self.inner, var, slot, coord).into()
    }

    /// Gamma contraction of a bilinear symbol in slots `y1, y2`.
    #[pyo3(signature = (model = "matrix", n = None))]
    fn gamma(&self, model: &str, n: Option<usize>) -> PyResult<Self> {
        let m = match (model, n) {
            ("matrix", None) => return Err(err("the matrix model needs n")),
            (name, n) => self::model(name, n.unwrap_or(0))?,
        };
        Ok(trace_poly::gamma_contract(&self.inner, m).map_err(err)?.into())
    }

    /// Evaluates at `x_i = xs[i-1]`, with slot `j` bound to `ys[j-1]`.
    #[pyo3(signature = (xs, ys = None))]
    fn eval(&self, xs: Vec<PyMatrix>, ys: Option<Vec<PyMatrix>>) -> PyResult<PyMatrix> {
        let xs = xs.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        if xs.is_empty() {
            return Err(err("need at least one matrix"));
        }
        let ctx = EvalContext::from_slice(&xs);
        let s = ctx.session().map_err(err)?;
        let m = match ys {
            None => s.eval(&self.inner),
            Some(ys) => {
                let ys = ys.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
                let refs: Vec<&Matrix> = ys.iter().collect();
                s.eval_multilinear(&self.inner, &YBindings::slots(&refs))
            }
        }
        .map_err(err)?;
        Ok(from_matrix(&m))
    }
}

/// A process sampled on a time grid.
#[pyclass(name = "Path", module = "ncstoch", frozen)]
struct PyPath {
    inner: ProcessPath,
}

#[pymethods]
impl PyPath {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    #[getter]
    fn role(&self) -> String {
        format!("{:?}", self.inner.role).to_lowercase()
    }

    fn __len__(&self) -> usize {
        self.inner.times().len()
    }

    /// Value at grid time `t`.
    fn at(&self, t: f64) -> PyResult<PyMatrix> {
        Ok(from_matrix(self.inner.at(t).map_err(err)?))
    }

    fn values(&self) -> Vec<PyMatrix> {
        self.inner.values.iter().map(from_matrix).collect()
    }

    /// `Σ ‖ΔX_k‖_p^p` over grid steps `s..t`.
    fn variation(&self, s: usize, t: usize, p: f64) -> PyResult<f64> {
        self.inner.variation(s, t, p).map_err(err)
    }

    fn write_ncp1(&self, filename: &str) -> PyResult<()> {
        let f = File::create(filename).map_err(|e| PyIOError::new_err(e.to_string()))?;
        process_sim::write_ncp1(&self.inner, BufWriter::new(f)).map_err(err)
    }
}

#[pyfunction]
fn read_ncp1(filename: &str) -> PyResult<PyPath> {
    let f = File::open(filename).map_err(|e| PyIOError::new_err(e.to_string()))?;
    Ok(PyPath { inner: process_sim::read_ncp1(BufReader::new(f)).map_err(err)? })
}

/// Hermitian Brownian motion path `path` of the ensemble seeded by `seed`.
#[pyfunction]
#[pyo3(signature = (n, horizon, mesh, seed, path = 0))]
fn simulate_hbm(n: usize, horizon: f64, mesh: f64, seed: u64, path: u64) -> PyResult<PyPath> {
    let grid = Arc::new(TimeGrid::uniform(horizon, mesh).map_err(err)?);
    Ok(PyPath { inner: process_sim::simulate_hbm(n, grid, &RngStream::new(seed, path)) })
}

/// Itô residual convergence for a polynomial in `x1`.
#[pyfunction]
#[pyo3(signature = (poly, meshes, n = 16, paths = 32, seed = 0, horizon = 1.0, model = "matrix"))]
#[allow(clippy::too_many_arguments)]
fn ito_study<'py>(
    py: Python<'py>,
    poly: &str,
    meshes: Vec<f64>,
    n: usize,
    paths: usize,
    seed: u64,
    horizon: f64,
    model: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let params = StudyParams {
        n,
        horizon,
        paths,
        seed,
        driver: DriverSpec::Hbm,
        model: self::model(model, n)?,
        target: StudyTarget::Poly(trace_poly::parse(poly).map_err(err)?),
    };
    let r = py.detach(|| convergence_study("ito", &meshes, &params)).map_err(err)?;
    to_py(py, &r)
}

/// Quadratic covariation sums of a bilinear symbol against the closed form.
#[pyfunction]
#[pyo3(signature = (symbol, meshes, constants = vec![], n = 16, paths = 200, seed = 0, horizon = 1.0, model = "matrix"))]
#[allow(clippy::too_many_arguments)]
fn qc_study<'py>(
    py: Python<'py>,
    symbol: &str,
    meshes: Vec<f64>,
    constants: Vec<PyMatrix>,
    n: usize,
    paths: usize,
    seed: u64,
    horizon: f64,
    model: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let params = StudyParams {
        n,
        horizon,
        paths,
        seed,
        driver: DriverSpec::Hbm,
        model: self::model(model, n)?,
        target: StudyTarget::Bilinear { lambda: trace_poly::parse(symbol).map_err(err)?, args: driver_args(constants)? },
    };
    let r = py.detach(|| convergence_study("qc", &meshes, &params)).map_err(err)?;
    to_py(py, &r)
}

/// Itô isometry for `∫H[dX]` with `H` given by a symbol linear in `y1`.
#[pyfunction]
#[pyo3(signature = (symbol, constants = vec![], window = None, n = 8, mesh = 0.01, paths = 1000, seed = 0, horizon = 1.0))]
#[allow(clippy::too_many_arguments)]
fn isometry<'py>(
    py: Python<'py>,
    symbol: &str,
    constants: Vec<PyMatrix>,
    window: Option<(f64, f64)>,
    n: usize,
    mesh: f64,
    paths: usize,
    seed: u64,
    horizon: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let symbol = trace_poly::parse(symbol).map_err(err)?;
    let args = driver_args(constants)?;
    let h = match window {
        None => IntegrandSpec::adapted(symbol, args),
        Some(w) => IntegrandSpec::elementary(symbol, args, vec![w]),
    };
    let ens = Ensemble::hbm(n, horizon, mesh, paths, seed).map_err(err)?;
    let r = py
        .detach(|| stoch_int::ito_isometry_check(&h, &ens, horizon, ContractionModel::Matrix { n: n as u32 }))
        .map_err(err)?;
    to_py(py, &r)
}

/// Kolmogorov distance between the spectrum of `a` and the semicircle of variance `t`.
#[pyfunction]
fn esd_distance(a: PyMatrix, t: f64) -> PyResult<f64> {
    matrix_alg::esd_distance(&to_matrix(a)?, t).map_err(err)
}

#[pyfunction]
fn semicircle_cdf(x: f64, t: f64) -> f64 {
    matrix_alg::semicircle_cdf(x, t)
}

#[pyfunction]
fn hermitian_onb(n: usize) -> Vec<PyMatrix> {
    matrix_alg::hermitian_onb(n).iter().map(from_matrix).collect()
}

/// `Σ_e e a e` over the orthonormal Hermitian basis.
#[pyfunction]
fn magic_sum(a: PyMatrix) -> PyResult<PyMatrix> {
    let a = to_matrix(a)?;
    let basis = matrix_alg::hermitian_onb(a.nrows());
    Ok(from_matrix(&matrix_alg::magic_sum(&a, &basis).map_err(err)?))
}

/// `f^[k](nodes)` for a polynomial (coefficients from degree 0) or an
/// exponential sum `Σ c e^{iξλ}`.
#[pyfunction]
#[pyo3(signature = (nodes, poly = None, exp_terms = None))]
fn divided_difference(nodes: Vec<f64>, poly: Option<Vec<Complex64>>, exp_terms: Option<Vec<(Complex64, f64)>>) -> PyResult<Complex64> {
    if nodes.is_empty() {
        return Err(err("need at least one node"));
    }
    Ok(matrix_alg::divided_diff(&function_spec(poly, exp_terms)?, &nodes))
}

/// `f(a)` by the spectral theorem.
#[pyfunction]
#[pyo3(signature = (a, poly = None, exp_terms = None))]
fn op_function(a: PyMatrix, poly: Option<Vec<Complex64>>, exp_terms: Option<Vec<(Complex64, f64)>>) -> PyResult<PyMatrix> {
    let f = function_spec(poly, exp_terms)?;
    Ok(from_matrix(&matrix_alg::op_function(&f, &to_matrix(a)?).map_err(err)?))
}

/// `D^k f(a)[b_1, ..., b_k]` for Hermitian `a`.
#[pyfunction]
#[pyo3(signature = (a, directions, poly = None, exp_terms = None))]
fn operator_derivative(
    a: PyMatrix,
    directions: Vec<PyMatrix>,
    poly: Option<Vec<Complex64>>,
    exp_terms: Option<Vec<(Complex64, f64)>>,
) -> PyResult<PyMatrix> {
    let f = function_spec(poly, exp_terms)?;
    let b = directions.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
    let m = matrix_alg::dk_operator_function(&f, &to_matrix(a)?, b.len(), &b).map_err(err)?;
    Ok(from_matrix(&m))
}

/// Runs built-in acceptance criteria (all of them by default).
#[pyfunction]
#[pyo3(signature = (seed = 20240611, only = None))]
fn run_selftest<'py>(py: Python<'py>, seed: u64, only: Option<Vec<u32>>) -> PyResult<Bound<'py, PyAny>> {
    let outcomes = py.detach(|| match &only {
        Some(ids) => selftest::run_selected(ids, seed),
        None => selftest::run_all(seed),
    });
    to_py(py, &outcomes)
}

#[pymodule]
fn ncstoch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTracePoly>()?;
    m.add_class::<PyPath>()?;
    m.add_function(wrap_pyfunction!(simulate_hbm, m)?)?;
    m.add_function(wrap_pyfunction!(read_ncp1, m)?)?;
    m.add_function(wrap_pyfunction!(ito_study, m)?)?;
    m.add_function(wrap_pyfunction!(qc_study, m)?)?;
    m.add_function(wrap_pyfunction!(isometry, m)?)?;
    m.add_function(wrap_pyfunction!(esd_distance, m)?)?;
    m.add_function(wrap_pyfunction!(semicircle_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(hermitian_onb, m)?)?;
    m.add_function(wrap_pyfunction!(magic_sum, m)?)?;
    m.add_function(wrap_pyfunction!(divided_difference, m)?)?;
    m.add_function(wrap_pyfunction!(op_function, m)?)?;
    m.add_function(wrap_pyfunction!(operator_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
