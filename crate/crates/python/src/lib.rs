//! Python bindings. Matrices cross the boundary as lists of rows.

use ::bfvar as core;
use core::geometry;
use core::moments;
use core::oracle::{self, MomentPath};
use core::resample::{self, ResamplePlan};
use core::{KappaExponent, Response};
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::TooManyFailures { .. } | core::Error::NonFinite(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> PyResult<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err(format!(
            "{what} must be a non-empty rectangular list of rows"
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(FromPyObject)]
enum Data {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl Data {
    fn response(&self) -> PyResult<Response> {
        Ok(match self {
            Data::Vector(v) => Response::Vector(DVector::from_column_slice(v)),
            Data::Matrix(m) => Response::Matrix(matrix(m, "response")?),
        })
    }
}

#[pyclass(name = "RegressionModel", module = "bfvar", frozen, from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: core::RegressionModel,
}

#[pymethods]
impl PyModel {
    /// Univariate when `sigma2` is given, multivariate when `sigma` is given.
    #[new]
    #[pyo3(signature = (design, g, sigma2=None, sigma=None, kappa_exponent="paper"))]
    fn new(
        design: Vec<Vec<f64>>,
        g: f64,
        sigma2: Option<f64>,
        sigma: Option<Vec<Vec<f64>>>,
        kappa_exponent: &str,
    ) -> PyResult<Self> {
        let x = matrix(&design, "design")?;
        let model = match (sigma2, sigma) {
            (Some(s2), None) => core::RegressionModel::univariate(x, s2, g),
            (None, Some(s)) => core::RegressionModel::multivariate(x, matrix(&s, "sigma")?, g),
            _ => return Err(PyValueError::new_err("give exactly one of sigma2 or sigma")),
        }
        .map_err(err)?;
        let exponent = match kappa_exponent {
            "paper" => KappaExponent::Paper,
            "per-response" | "pq" => KappaExponent::PerResponse,
            other => return Err(PyValueError::new_err(format!("unknown kappa_exponent `{other}`"))),
        };
        Ok(Self {
            inner: model.with_kappa_exponent(exponent),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn g(&self) -> f64 {
        self.inner.g()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }

    fn log_marginal(&self, y: Data) -> PyResult<f64> {
        core::gprior::log_marginal_response(&self.inner, &y.response()?).map_err(err)
    }

    fn hat_matrix(&self) -> Vec<Vec<f64>> {
        rows(&core::gprior::hat_matrix(&self.inner).matrix)
    }

    fn __repr__(&self) -> String {
        format!(
            "RegressionModel(n={}, p={}, g={})",
            self.inner.n(),
            self.inner.p(),
            self.inner.g()
        )
    }
}

#[pyclass(name = "DataGeneratingProcess", module = "bfvar", frozen)]
struct PyDgp {
    inner: core::DataGeneratingProcess,
}

#[pymethods]
impl PyDgp {
    #[staticmethod]
    fn univariate(mean: Vec<f64>, sigma2: f64) -> PyResult<Self> {
        core::DataGeneratingProcess::univariate(DVector::from_vec(mean), sigma2)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn heteroscedastic(mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> PyResult<Self> {
        core::DataGeneratingProcess::heteroscedastic(DVector::from_vec(mean), matrix(&covariance, "covariance")?)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn multivariate(mean: Vec<Vec<f64>>, sigma: Vec<Vec<f64>>) -> PyResult<Self> {
        core::DataGeneratingProcess::multivariate(matrix(&mean, "mean")?, matrix(&sigma, "sigma")?)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// One simulated response: a list for vector responses, a list of rows otherwise.
    fn simulate(&self, py: Python<'_>, seed: u64) -> PyResult<Py<PyAny>> {
        let mut r = core::rng::stream(seed, core::rng::domain::SIMULATE, 0);
        Ok(match oracle::simulate_dgp(&self.inner, &mut r) {
            Response::Vector(v) => v.as_slice().to_vec().into_pyobject(py)?.into_any().unbind(),
            Response::Matrix(m) => rows(&m).into_pyobject(py)?.into_any().unbind(),
        })
    }
}

#[pyclass(name = "BfMoments", module = "bfvar", frozen, get_all)]
struct PyMoments {
    path: &'static str,
    mean: f64,
    variance: f64,
    kl_difference_term: f64,
    complexity_penalty_term: f64,
    divergence_term: f64,
    nonshared_dof_term: f64,
}

#[pymethods]
impl PyMoments {
    #[getter]
    fn sd(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }

    fn __repr__(&self) -> String {
        format!(
            "BfMoments(path={:?}, mean={}, variance={})",
            self.path, self.mean, self.variance
        )
    }
}

fn path_from(name: Option<&str>, m1: &PyModel, m2: &PyModel, dgp: &PyDgp) -> PyResult<MomentPath> {
    Ok(match name {
        None => MomentPath::select(&m1.inner, &m2.inner, &dgp.inner),
        Some("equal_variance") => MomentPath::EqualVariance,
        Some("general") => MomentPath::General,
        Some("multivariate") => MomentPath::Multivariate,
        Some(other) => return Err(PyValueError::new_err(format!("unknown path `{other}`"))),
    })
}

/// Closed-form mean and variance of `log B12` under the process.
#[pyfunction]
#[pyo3(signature = (m1, m2, dgp, path=None))]
fn bf_moments(m1: &PyModel, m2: &PyModel, dgp: &PyDgp, path: Option<&str>) -> PyResult<PyMoments> {
    let path = path_from(path, m1, m2, dgp)?;
    let m = path.closed_form(&m1.inner, &m2.inner, &dgp.inner).map_err(err)?;
    Ok(PyMoments {
        path: path.name(),
        mean: m.mean,
        variance: m.variance,
        kl_difference_term: m.kl_difference_term,
        complexity_penalty_term: m.complexity_penalty_term,
        divergence_term: m.divergence_term,
        nonshared_dof_term: m.nonshared_dof_term,
    })
}

#[pyfunction]
fn log_bf(m1: &PyModel, m2: &PyModel, y: Data) -> PyResult<f64> {
    moments::log_bf(&m1.inner, &m2.inner, &y.response()?).map_err(err)
}

#[pyclass(name = "OracleReport", module = "bfvar", frozen, get_all)]
struct PyOracle {
    path: &'static str,
    empirical_mean: f64,
    empirical_var: f64,
    se_mean: f64,
    se_var: f64,
    closed_mean: f64,
    closed_var: f64,
    z_mean: f64,
    z_var: f64,
    n_sims: usize,
    seed: u64,
}

/// Monte Carlo moments of `log B12` scored against the closed form.
#[pyfunction]
#[pyo3(signature = (dgp, m1, m2, n_sims=oracle::DEFAULT_SIMULATIONS, seed=0, path=None))]
fn empirical_bf_moments(
    py: Python<'_>,
    dgp: &PyDgp,
    m1: &PyModel,
    m2: &PyModel,
    n_sims: usize,
    seed: u64,
    path: Option<&str>,
) -> PyResult<PyOracle> {
    let path = path_from(path, m1, m2, dgp)?;
    let r = py
        .detach(|| oracle::empirical_bf_moments_with(&dgp.inner, &m1.inner, &m2.inner, n_sims, seed, path))
        .map_err(err)?;
    Ok(PyOracle {
        path: r.path.name(),
        empirical_mean: r.empirical_mean,
        empirical_var: r.empirical_var,
        se_mean: r.se_mean,
        se_var: r.se_var,
        closed_mean: r.closed_mean,
        closed_var: r.closed_var,
        z_mean: r.z_mean,
        z_var: r.z_var,
        n_sims: r.n_sims,
        seed: r.seed,
    })
}

#[pyclass(name = "PrincipalAngles", module = "bfvar", frozen, get_all)]
struct PyAngles {
    angles: Vec<f64>,
    cos_squared: Vec<f64>,
    shared_dims: usize,
    partial_dims: usize,
    nonshared_dof: f64,
    near_threshold: bool,
}

#[pyfunction]
fn principal_angles(x1: Vec<Vec<f64>>, x2: Vec<Vec<f64>>) -> PyResult<PyAngles> {
    let r = geometry::principal_angles(&matrix(&x1, "x1")?, &matrix(&x2, "x2")?).map_err(err)?;
    Ok(PyAngles {
        angles: r.angles,
        cos_squared: r.cos_squared,
        shared_dims: r.shared_dims,
        partial_dims: r.partial_dims,
        nonshared_dof: r.nonshared_dof,
        near_threshold: r.near_threshold,
    })
}

/// `||H1 - H2||_F^2` from the principal angles.
#[pyfunction]
fn nonshared_dof(x1: Vec<Vec<f64>>, x2: Vec<Vec<f64>>, g: f64) -> PyResult<f64> {
    geometry::nonshared_dof_via_angles(&matrix(&x1, "x1")?, &matrix(&x2, "x2")?, g).map_err(err)
}

#[pyclass(name = "ModelSet", module = "bfvar", frozen)]
struct PySet {
    inner: core::ModelSet,
}

#[pymethods]
impl PySet {
    #[new]
    #[pyo3(signature = (models, priors=None))]
    fn new(models: Vec<(String, PyModel)>, priors: Option<Vec<f64>>) -> PyResult<Self> {
        let entries = models.into_iter().map(|(l, m)| (l, m.inner)).collect();
        core::ModelSet::new(entries, priors)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn priors(&self) -> Vec<f64> {
        self.inner.priors().to_vec()
    }

    fn log_marginals(&self, y: Data) -> PyResult<Vec<f64>> {
        self.inner.log_marginals(&y.response()?).map_err(err)
    }

    /// Posterior model probabilities in label order.
    fn posterior(&self, y: Data) -> PyResult<Vec<f64>> {
        Ok(self.inner.posterior(&y.response()?).map_err(err)?.probs)
    }

    /// Bootstrap PMPs, one row per successful replicate.
    #[pyo3(signature = (y, replicates=1000, seed=0, scheme="circular", block_length=None))]
    fn bootstrap(
        &self,
        py: Python<'_>,
        y: Data,
        replicates: usize,
        seed: u64,
        scheme: &str,
        block_length: Option<usize>,
    ) -> PyResult<Vec<Vec<f64>>> {
        let plan = match scheme {
            "circular" => ResamplePlan::circular(block_length, replicates, seed),
            "iid" => ResamplePlan::iid(replicates, seed),
            other => return Err(PyValueError::new_err(format!("unknown scheme `{other}`"))),
        };
        let y = y.response()?;
        let p = py
            .detach(|| resample::bootstrap_pmp(&y, &self.inner, &plan))
            .map_err(err)?;
        Ok(p.values)
    }
}

/// Share of rows in which each column exceeds each threshold.
#[pyfunction]
#[pyo3(signature = (pmp_rows, thresholds=resample::DEFAULT_THRESHOLDS.to_vec()))]
fn conclusiveness(pmp_rows: Vec<Vec<f64>>, thresholds: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let k = pmp_rows.first().map_or(0, Vec::len);
    let p = resample::PmpMatrix {
        labels: (0..k).map(|i| i.to_string()).collect(),
        replicate_ids: (0..pmp_rows.len()).collect(),
        values: pmp_rows,
        failed: vec![],
    };
    if p.values.iter().any(|r| r.len() != k) {
        return Err(PyValueError::new_err("rows must have equal length"));
    }
    Ok(resample::conclusiveness(&p, &thresholds).map_err(err)?.fractions)
}

/// Kass–Raftery evidence class of a log Bayes factor.
#[pyfunction]
fn evidence_class(log_bf: f64) -> PyResult<&'static str> {
    let c = core::posterior::kass_raftery_class(log_bf).map_err(err)?;
    Ok(core::posterior::EVIDENCE_BIN_NAMES[c.bin()])
}

#[pyfunction]
fn pmp(log_marginals: Vec<f64>, priors: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(core::posterior::pmp(&log_marginals, &priors).map_err(err)?.probs)
}

#[pymodule]
#[pyo3(name = "bfvar")]
fn bfvar_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyDgp>()?;
    m.add_class::<PyMoments>()?;
    m.add_class::<PyOracle>()?;
    m.add_class::<PyAngles>()?;
    m.add_class::<PySet>()?;
    m.add_function(wrap_pyfunction!(bf_moments, m)?)?;
    m.add_function(wrap_pyfunction!(log_bf, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_bf_moments, m)?)?;
    m.add_function(wrap_pyfunction!(principal_angles, m)?)?;
    m.add_function(wrap_pyfunction!(nonshared_dof, m)?)?;
    m.add_function(wrap_pyfunction!(conclusiveness, m)?)?;
    m.add_function(wrap_pyfunction!(evidence_class, m)?)?;
    m.add_function(wrap_pyfunction!(pmp, m)?)?;
    Ok(())
}
