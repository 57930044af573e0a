//! Python bindings: `import scaled_uniform_py`.

use pyo3::create_exception;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scaled_uniform::estimators;
use scaled_uniform::fiducial;
use scaled_uniform::risklab::{self, McOptions, RiskReport};
use scaled_uniform::{model, Error, LossKind};

create_exception!(scaled_uniform_py, InfeasibleError, PyValueError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Infeasible { .. } => InfeasibleError::new_err(e.to_string()),
        Error::UnknownEstimator { .. } => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn loss(name: &str) -> PyResult<LossKind> {
    name.parse().map_err(to_py)
}

#[pyclass(frozen, skip_from_py_object, module = "scaled_uniform_py")]
#[derive(Clone, Copy)]
struct Design(model::Design);

#[pymethods]
impl Design {
    #[new]
    fn new(k: f64, n: usize) -> PyResult<Self> {
        model::Design::new(k, n).map(Design).map_err(to_py)
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    /// Draws a full sample at scale `theta`.
    #[pyo3(signature = (theta, seed = 0))]
    fn sample(&self, theta: f64, seed: u64) -> PyResult<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = model::sample_scaled_uniform(theta, self.0, &mut rng).map_err(to_py)?;
        Ok(s.values().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Design(k={}, n={})", self.0.k(), self.0.n())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "scaled_uniform_py")]
#[derive(Clone, Copy)]
struct SuffStat(model::SuffStat);

#[pymethods]
impl SuffStat {
    #[new]
    fn new(y_min: f64, y_max: f64, design: &Design) -> PyResult<Self> {
        model::SuffStat::from_extremes(y_min, y_max, design.0).map(SuffStat).map_err(to_py)
    }

    #[staticmethod]
    fn from_sample(values: Vec<f64>, k: f64) -> PyResult<Self> {
        let design = model::Design::new(k, values.len()).map_err(to_py)?;
        let sample = model::Sample::new(design, values).map_err(to_py)?;
        model::SuffStat::from_sample(&sample).map(SuffStat).map_err(to_py)
    }

    #[getter]
    fn y_min(&self) -> f64 {
        self.0.y_min()
    }

    #[getter]
    fn y_max(&self) -> f64 {
        self.0.y_max()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k()
    }

    #[getter]
    fn s2(&self) -> f64 {
        self.0.s2()
    }

    #[getter]
    fn b_star(&self) -> f64 {
        self.0.b_star()
    }

    /// `(θ_ML, θ_MU)`
    fn sure_interval(&self) -> (f64, f64) {
        (self.0.theta_ml(), self.0.theta_mu())
    }

    fn contains(&self, theta: f64) -> bool {
        self.0.contains(theta)
    }

    fn scaled(&self, c: f64) -> PyResult<Self> {
        self.0.scaled(c).map(SuffStat).map_err(to_py)
    }

    /// One catalog rule by name, e.g. `"gm"` or `"bayes:3"`.
    fn estimate(&self, name: &str) -> PyResult<f64> {
        estimators::lookup(name).and_then(|e| e.estimate(&self.0)).map_err(to_py)
    }

    /// Every catalog rule, in catalog order.
    fn estimates(&self) -> PyResult<Vec<(String, f64)>> {
        estimators::catalog()
            .iter()
            .map(|e| Ok((e.name().to_string(), e.estimate(&self.0).map_err(to_py)?)))
            .collect()
    }

    fn fiducial(&self) -> TruncPareto {
        TruncPareto(*fiducial::fiducial_dist(&self.0).dist())
    }

    #[pyo3(signature = (gamma, highest_density = false))]
    fn confidence_interval(&self, gamma: f64, highest_density: bool) -> PyResult<(f64, f64)> {
        let kind = if highest_density {
            fiducial::IntervalKind::HighestDensity
        } else {
            fiducial::IntervalKind::EqualTailed
        };
        fiducial::confidence_interval_with(&self.0, gamma, kind).map_err(to_py)
    }

    /// Fiducial-optimal decision under the named loss.
    fn point_estimate(&self, loss_name: &str) -> PyResult<f64> {
        Ok(fiducial::point_estimate(&self.0, loss(loss_name)?))
    }

    fn expected_loss(&self, loss_name: &str, estimate: f64) -> PyResult<f64> {
        fiducial::fiducial_expected_loss(&self.0, loss(loss_name)?, estimate).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "SuffStat(y_min={}, y_max={}, n={}, k={})",
            self.0.y_min(),
            self.0.y_max(),
            self.0.n(),
            self.0.k()
        )
    }
}

#[pyclass(frozen, skip_from_py_object, module = "scaled_uniform_py")]
#[derive(Clone, Copy)]
struct TruncPareto(scaled_uniform::TruncPareto);

#[pymethods]
impl TruncPareto {
    #[new]
    fn new(alpha: f64, a: f64, b: f64) -> PyResult<Self> {
        scaled_uniform::TruncPareto::new(alpha, a, b).map(TruncPareto).map_err(to_py)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    fn pdf(&self, theta: f64) -> f64 {
        self.0.pdf(theta)
    }

    fn cdf(&self, theta: f64) -> f64 {
        self.0.cdf(theta)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        self.0.quantile(p).map_err(to_py)
    }

    fn moment(&self, m: f64) -> f64 {
        self.0.moment(m)
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn median(&self) -> f64 {
        self.0.median()
    }

    /// `E ln Θ`
    fn log_moment(&self) -> f64 {
        self.0.log_moment()
    }

    #[pyo3(signature = (size, seed = 0))]
    fn sample(&self, size: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..size).map(|_| self.0.sample(&mut rng)).collect()
    }

    fn __repr__(&self) -> String {
        format!("TruncPareto(alpha={}, a={}, b={})", self.0.alpha(), self.0.a(), self.0.b())
    }
}

fn report<'py>(py: Python<'py>, r: &RiskReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("estimator", &r.estimator)?;
    d.set_item("n", r.n)?;
    d.set_item("k", r.k)?;
    d.set_item("theta", r.theta)?;
    d.set_item("loss", r.loss.name())?;
    d.set_item("method", r.method.name())?;
    d.set_item("value", r.value)?;
    d.set_item("stderr", r.stderr)?;
    d.set_item("reps", r.reps)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

#[pyfunction]
fn catalog() -> Vec<String> {
    estimators::catalog().iter().map(|e| e.name().to_string()).collect()
}

/// Exact risk at `theta` by two-dimensional quadrature.
#[pyfunction]
#[pyo3(signature = (estimator, design, loss = "squared", theta = 1.0))]
fn quad_risk<'py>(
    py: Python<'py>,
    estimator: &str,
    design: &Design,
    loss: &str,
    theta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (e, l, d) = (estimators::lookup(estimator).map_err(to_py)?, self::loss(loss)?, design.0);
    let r = py
        .detach(|| risklab::quad_risk(&e, d, l).and_then(|r| r.at_theta(theta)))
        .map_err(to_py)?;
    report(py, &r)
}

/// Monte Carlo risks of several rules on common random numbers.
#[pyfunction]
#[pyo3(signature = (estimators, design, loss = "squared", theta = 1.0, reps = 100_000, seed = 1, workers = None))]
#[allow(clippy::too_many_arguments)]
fn mc_risks<'py>(
    py: Python<'py>,
    estimators: Vec<String>,
    design: &Design,
    loss: &str,
    theta: f64,
    reps: u64,
    seed: u64,
    workers: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rules = estimators
        .iter()
        .map(|name| self::estimators::lookup(name))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let (l, d) = (self::loss(loss)?, design.0);
    let mut opts = McOptions::new(reps, seed);
    if let Some(w) = workers {
        opts = opts.with_workers(w);
    }
    let table = py.detach(|| risklab::mc_risks(&rules, theta, d, l, opts)).map_err(to_py)?;
    table.risks.iter().map(|r| report(py, r)).collect()
}

/// Monte Carlo coverage of the equal-tailed fiducial intervals, one row per level.
#[pyfunction]
#[pyo3(signature = (gammas, design, theta = 1.0, reps = 100_000, seed = 1))]
fn coverage<'py>(
    py: Python<'py>,
    gammas: Vec<f64>,
    design: &Design,
    theta: f64,
    reps: u64,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let d = design.0;
    let rows = py
        .detach(|| risklab::coverage_many(&gammas, theta, d, McOptions::new(reps, seed)))
        .map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let out = PyDict::new(py);
            out.set_item("gamma", r.gamma)?;
            out.set_item("reps", r.reps)?;
            out.set_item("hits", r.hits)?;
            out.set_item("coverage", r.coverage)?;
            out.set_item("stderr", r.stderr)?;
            Ok(out)
        })
        .collect()
}

#[pymodule]
fn scaled_uniform_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Design>()?;
    m.add_class::<SuffStat>()?;
    m.add_class::<TruncPareto>()?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(quad_risk, m)?)?;
    m.add_function(wrap_pyfunction!(mc_risks, m)?)?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    Ok(())
}
