//! Python bindings. Reports cross the boundary as JSON strings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use analytic_approx::cli;
use analytic_approx::config::{QKind, RunConfig, TargetName};
use analytic_approx::verify::{build_from_config, run_suite, Suite};
use analytic_approx::{Error, NuBackend, SepPolyQ, Shape};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::InvalidDomain(_)
        | Error::InvalidParameter(_)
        | Error::IndexOutOfRange { .. }
        | Error::ZeroVector
        | Error::Capacity { .. }
        | Error::TargetInconsistent(_)
        | Error::ModulusInsufficient(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn parse_shape(s: &str) -> PyResult<Shape> {
    match s {
        "ball" => Ok(Shape::Ball),
        "box" => Ok(Shape::Box),
        _ => Err(PyValueError::new_err(format!("unknown shape `{s}`"))),
    }
}

fn parse_q(s: &str) -> PyResult<QKind> {
    match s {
        "euclidean_quartic" => Ok(QKind::EuclideanQuartic),
        "quartic_sum" => Ok(QKind::QuarticSum),
        _ => Err(PyValueError::new_err(format!("unknown q `{s}`"))),
    }
}

/// Minkowski functional of `{sum_j x_j^(2j) <= 1}`.
#[pyclass(name = "Gauge", frozen)]
struct PyGauge {
    inner: analytic_approx::Gauge,
}

#[pymethods]
impl PyGauge {
    #[new]
    #[pyo3(signature = (tol=1e-12, max_iter=200))]
    fn new(tol: f64, max_iter: usize) -> Self {
        Self { inner: analytic_approx::Gauge { tol, max_iter } }
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.lambda(&x).map_err(to_py)
    }

    fn residual(&self, x: Vec<f64>, mu: f64) -> PyResult<f64> {
        analytic_approx::gauge::residual(&x, mu).map_err(to_py)
    }
}

/// Separating polynomial with certified constants on the radius-`radius` ball.
#[pyclass(name = "SepPoly", frozen)]
struct PySepPoly {
    inner: SepPolyQ,
}

#[pymethods]
impl PySepPoly {
    #[new]
    #[pyo3(signature = (kind="euclidean_quartic", dim=2, radius=1.5))]
    fn new(kind: &str, dim: usize, radius: f64) -> PyResult<Self> {
        let q = match parse_q(kind)? {
            QKind::QuarticSum => SepPolyQ::quartic_sum(dim),
            _ => SepPolyQ::euclidean_quartic(dim),
        }
        .and_then(|q| q.derive_constants(radius))
        .map_err(to_py)?;
        Ok(Self { inner: q })
    }

    fn eval(&self, y: Vec<f64>) -> PyResult<f64> {
        if y.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.inner.dim())));
        }
        Ok(self.inner.eval(&y))
    }

    /// `(q, lower_holds, upper_holds)`; the lower bound is vacuous when `q >= 1`.
    fn check_bounds(&self, y: Vec<f64>) -> PyResult<(f64, bool, bool)> {
        if y.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.inner.dim())));
        }
        let c = self.inner.check_bounds(&y);
        Ok((c.q, !c.lower_applicable || c.lower_holds, c.upper_holds))
    }

    #[getter]
    fn k1(&self) -> f64 {
        self.inner.k1()
    }

    #[getter]
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }

    #[getter]
    fn m_bound(&self) -> f64 {
        self.inner.m_bound()
    }
}

/// Analytic approximant of a builtin target.
#[pyclass(name = "Approximant", frozen)]
struct PyApproximant {
    inner: analytic_approx::Approximant,
}

#[pymethods]
impl PyApproximant {
    #[new]
    #[pyo3(signature = (
        target="product_sine", *, epsilon=0.2, dim=2, radius=1.5, shape="ball",
        q="euclidean_quartic", omega=2.0, value=0.0, index=0, backend="layercake", seed=0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        py: Python<'_>,
        target: &str,
        epsilon: f64,
        dim: usize,
        radius: f64,
        shape: &str,
        q: &str,
        omega: f64,
        value: f64,
        index: usize,
        backend: &str,
        seed: u64,
    ) -> PyResult<Self> {
        let mut cfg = RunConfig::default();
        cfg.epsilon = epsilon;
        cfg.domain.dim = dim;
        cfg.domain.radius = radius;
        cfg.domain.shape = parse_shape(shape)?;
        cfg.q.kind = parse_q(q)?;
        cfg.target.kind = match target {
            "constant" => TargetName::Constant,
            "coordinate" => TargetName::Coordinate,
            "product_sine" => TargetName::ProductSine,
            _ => return Err(PyValueError::new_err(format!("unknown target `{target}`"))),
        };
        cfg.target.omega = omega;
        cfg.target.value = value;
        cfg.target.index = index;
        cfg.backend.nu = match backend {
            "layercake" => NuBackend::Layercake,
            "mc" => NuBackend::Mc,
            _ => return Err(PyValueError::new_err(format!("unknown backend `{backend}`"))),
        };
        cfg.backend.seed = seed;
        cfg.validate().map_err(to_py)?;
        let inner = py.detach(|| build_from_config(&cfg)).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Builds from a TOML run configuration.
    #[staticmethod]
    fn from_toml(py: Python<'_>, text: &str) -> PyResult<Self> {
        let cfg = RunConfig::from_toml_str(text).map_err(to_py)?;
        let inner = py.detach(|| build_from_config(&cfg)).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check_dim(&x)?;
        self.inner.eval_k(&x).map_err(to_py)
    }

    fn eval_batch(&self, py: Python<'_>, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        for p in &points {
            self.check_dim(p)?;
        }
        py.detach(|| self.inner.eval_batch(&points)).into_iter().map(|r| r.map_err(to_py)).collect()
    }

    fn target(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check_dim(&x)?;
        Ok(self.inner.target().eval(&x))
    }

    #[getter]
    fn net_size(&self) -> usize {
        self.inner.net().len()
    }

    #[getter]
    fn chain_bound(&self) -> f64 {
        self.inner.chain_bound()
    }

    fn constants(&self) -> PyResult<String> {
        json(&self.inner.constants())
    }

    fn error_report(&self, py: Python<'_>, points: Vec<Vec<f64>>) -> PyResult<String> {
        for p in &points {
            self.check_dim(p)?;
        }
        let rep = py.detach(|| self.inner.error_report(&points));
        json(&rep)
    }

    #[pyo3(signature = (pairs=200, seed=0))]
    fn lipschitz_estimate(&self, py: Python<'_>, pairs: usize, seed: u64) -> PyResult<String> {
        let rep = py.detach(|| self.inner.lipschitz_estimate(pairs, seed)).map_err(to_py)?;
        json(&rep)
    }
}

impl PyApproximant {
    fn check_dim(&self, x: &[f64]) -> PyResult<()> {
        let d = self.inner.domain().dim();
        if x.len() != d {
            return Err(PyValueError::new_err(format!("expected {d} coordinates, got {}", x.len())));
        }
        Ok(())
    }
}

/// Runs an experiment from TOML text; writes the report and point table and returns the report.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None))]
fn run_experiment(py: Python<'_>, config: &str, out_dir: Option<std::path::PathBuf>) -> PyResult<String> {
    let mut cfg = RunConfig::from_toml_str(config).map_err(to_py)?;
    if let Some(d) = out_dir {
        cfg.output.dir = d;
    }
    let rep = py.detach(|| cli::run_experiment(&cfg)).map_err(to_py)?;
    json(&rep)
}

/// Runs an invariant suite and returns its ledger without writing files.
#[pyfunction]
#[pyo3(signature = (config, suite="all"))]
fn verify(py: Python<'_>, config: &str, suite: &str) -> PyResult<String> {
    let cfg = RunConfig::from_toml_str(config).map_err(to_py)?;
    let suite: Suite = suite.parse().map_err(to_py)?;
    let ledger = py.detach(|| run_suite(&cfg, suite)).map_err(to_py)?;
    json(&ledger)
}

#[pymodule]
fn analytic_approx_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGauge>()?;
    m.add_class::<PySepPoly>()?;
    m.add_class::<PyApproximant>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
