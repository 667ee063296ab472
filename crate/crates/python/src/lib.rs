//! Python bindings: networks, training runs, reference solutions and the
//! B-spline basis.

use std::str::FromStr;

use pikan::benchmarks::benchmark;
use pikan::kan::{self, Checkpoint, KanKind, KanNetwork, NetworkConfig};
use pikan::oracle::{self, Resolution};
use pikan::problems::{compute_loss, make_problem, sample_collocation, ProblemSpec, PROBLEM_IDS};
use pikan::train::{self, TrainConfig};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: pikan::Error) -> PyErr {
    match e {
        pikan::Error::NonFinite { .. } | pikan::Error::SolverBlowUp { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn problem(id: &str) -> PyResult<ProblemSpec> {
    make_problem(id).map_err(to_py)
}

/// A KAN with spline (`efficient_kan`) or wavelet (`wav_kan`) edges.
#[pyclass(name = "Network", module = "pikan_py", skip_from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    inner: KanNetwork,
}

#[pymethods]
impl PyNetwork {
    /// `domain` holds one `(lo, hi)` pair per input and defaults to [-1, 1].
    #[new]
    #[pyo3(signature = (architecture, kind = "efficient_kan", seed = 0, domain = None))]
    fn new(
        architecture: Vec<usize>,
        kind: &str,
        seed: u64,
        domain: Option<Vec<(f64, f64)>>,
    ) -> PyResult<Self> {
        let kind = KanKind::from_str(kind).map_err(to_py)?;
        let mut config = NetworkConfig::new(architecture, kind);
        if let Some(d) = domain {
            config = config.with_domain(d);
        }
        let inner = KanNetwork::init(config, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Network of the default configuration of `problem`.
    #[staticmethod]
    #[pyo3(signature = (problem_id, seed = 0))]
    fn for_problem(problem_id: &str, seed: u64) -> PyResult<Self> {
        let spec = problem(problem_id)?;
        let b = benchmark(problem_id).map_err(to_py)?;
        let inner = KanNetwork::init(b.network_config(&spec), seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn architecture(&self) -> Vec<usize> {
        self.inner.config().architecture.clone()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.config().kind.name()
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.params.values.clone()
    }

    #[setter]
    fn set_params(&mut self, values: Vec<f64>) -> PyResult<()> {
        self.inner.params.set_values(&values).map_err(to_py)
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.predict(&x).map_err(to_py)
    }

    /// Value, gradient and Hessian of every output at `x`. The Hessian is a
    /// nested list indexed by input axes.
    fn jets(&self, x: Vec<f64>) -> PyResult<Vec<(f64, Vec<f64>, Vec<Vec<f64>>)>> {
        let dim = x.len();
        let out = self.inner.forward(&x).map_err(to_py)?;
        Ok(out
            .iter()
            .map(|j| {
                let grad = (0..dim).map(|a| j.d(a)).collect();
                let hess = (0..dim)
                    .map(|a| (0..dim).map(|b| j.dd(a, b)).collect())
                    .collect();
                (j.value, grad, hess)
            })
            .collect())
    }

    /// Loss components of this network on `problem_id`.
    #[pyo3(signature = (problem_id, seed = 0))]
    fn loss<'py>(&self, py: Python<'py>, problem_id: &str, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let spec = problem(problem_id)?;
        let colloc = sample_collocation(&spec, seed).map_err(to_py)?;
        let l = compute_loss(&spec, &self.inner.graph, &self.inner.params.values, &colloc).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("l_r", l.l_r)?;
        d.set_item("l_ic", l.l_ic)?;
        d.set_item("l_bc", l.l_bc)?;
        d.set_item("l_data", l.l_data)?;
        d.set_item("total", l.total)?;
        Ok(d)
    }

    /// Relative L2 error of every output against the reference solution.
    fn relative_l2(&self, problem_id: &str) -> PyResult<Vec<f64>> {
        let spec = problem(problem_id)?;
        let reference = oracle::reference_solution(&spec, &Resolution::default()).map_err(to_py)?;
        let m = train::evaluate(&self.inner, &spec, &reference).map_err(to_py)?;
        Ok(m.relative_l2)
    }

    fn to_json(&self) -> String {
        Checkpoint::from_network(&self.inner).to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = Checkpoint::from_json(text)
            .and_then(Checkpoint::into_network)
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Network({:?}, kind='{}', params={})",
            self.inner.config().architecture,
            self.inner.config().kind.name(),
            self.inner.param_count()
        )
    }
}

/// Registered problem ids.
#[pyfunction]
fn problems() -> Vec<&'static str> {
    PROBLEM_IDS.to_vec()
}

/// Train the default configuration of `problem_id`. Returns the trained
/// network and a dict with the loss history, final loss and metrics.
#[pyfunction]
#[pyo3(signature = (problem_id, seed = 0, epochs = None, lr = None, log_every = 100))]
fn train_problem<'py>(
    py: Python<'py>,
    problem_id: &str,
    seed: u64,
    epochs: Option<usize>,
    lr: Option<f64>,
    log_every: usize,
) -> PyResult<(PyNetwork, Bound<'py, PyDict>)> {
    let spec = problem(problem_id)?;
    let b = benchmark(problem_id).map_err(to_py)?;
    let mut config: TrainConfig = b.train_config(seed);
    config.log_every = log_every;
    if let Some(e) = epochs {
        config.epochs = e;
    }
    if let Some(lr) = lr {
        config.schedule.base_lr = lr;
    }
    let colloc = sample_collocation(&spec, seed).map_err(to_py)?;
    let mut net = KanNetwork::init(b.network_config(&spec), seed).map_err(to_py)?;
    let record = train::train(&spec, &mut net, &colloc, &config).map_err(to_py)?;
    let reference = oracle::reference_solution(&spec, &Resolution::default()).map_err(to_py)?;
    let metrics = train::evaluate(&net, &spec, &reference).map_err(to_py)?;

    let d = PyDict::new(py);
    let history: Vec<(usize, f64, f64, f64, f64, f64, f64)> = record
        .rows
        .iter()
        .map(|r| (r.epoch, r.l_r, r.l_ic, r.l_bc, r.l_data, r.total, r.lr))
        .collect();
    d.set_item("history", history)?;
    d.set_item("final_total", record.final_loss.total)?;
    d.set_item("completed", record.completed())?;
    d.set_item("relative_l2", metrics.relative_l2)?;
    d.set_item("wall_seconds", record.wall_seconds)?;
    Ok((PyNetwork { inner: net }, d))
}

/// Reference solution of `problem_id`: point coordinates, values per
/// output and the method used.
#[pyfunction]
fn reference<'py>(py: Python<'py>, problem_id: &str) -> PyResult<Bound<'py, PyDict>> {
    let spec = problem(problem_id)?;
    let r = oracle::reference_solution(&spec, &Resolution::default()).map_err(to_py)?;
    let points: Vec<Vec<f64>> = (0..r.len()).map(|i| r.point(i).to_vec()).collect();
    let d = PyDict::new(py);
    d.set_item("method", r.method.name())?;
    d.set_item("points", points)?;
    d.set_item("values", r.values)?;
    d.set_item("axes", spec.axis_names.clone())?;
    d.set_item("outputs", spec.output_names.clone())?;
    Ok(d)
}

/// Every B-spline of order `k` on `knots` evaluated at `x`.
#[pyfunction]
fn bspline_basis(x: f64, knots: Vec<f64>, k: usize) -> PyResult<Vec<f64>> {
    kan::bspline_basis(x, &knots, k).map_err(to_py)
}

/// Uniform knots of `grid_size` cells on [lo, hi], extended by `order`
/// cells on each side.
#[pyfunction]
fn uniform_knots(grid_size: usize, order: usize, lo: f64, hi: f64) -> Vec<f64> {
    kan::uniform_knots(grid_size, order, lo, hi)
}

/// Deterministic self-checks as `(id, name, passed, detail)` tuples.
#[pyfunction]
fn hard_checks() -> Vec<(u8, &'static str, bool, String)> {
    pikan::verify::run_hard_checks()
        .into_iter()
        .map(|c| (c.id, c.name, c.passed, c.detail))
        .collect()
}

#[pymodule]
fn pikan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(problems, m)?)?;
    m.add_function(wrap_pyfunction!(train_problem, m)?)?;
    m.add_function(wrap_pyfunction!(reference, m)?)?;
    m.add_function(wrap_pyfunction!(bspline_basis, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_knots, m)?)?;
    m.add_function(wrap_pyfunction!(hard_checks, m)?)?;
    Ok(())
}
