use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::comp_cast::beamforming::{self, BeamformingError, BeamformingResult, BroadcastProblem, UnicastProblem};
use ::comp_cast::channel::{self, ChannelConfig};
use ::comp_cast::harness::{self, HarnessError};
use ::comp_cast::threshold::{self, CostParams, ThresholdReport};
use ::comp_cast::traffic;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn beam_err(e: BeamformingError) -> PyErr {
    match e {
        BeamformingError::Solver(_) | BeamformingError::Conic(_) => PyRuntimeError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<DMatrix<Complex64>> {
    let k = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if k == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("channel must be a non-empty rectangular list of rows"));
    }
    Ok(DMatrix::from_fn(k, n, |i, j| rows[i][j]))
}

fn rows_of(h: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    h.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[pyclass(name = "ZipfModel", module = "comp_cast", frozen)]
struct PyZipfModel {
    inner: traffic::ZipfModel,
}

#[pymethods]
impl PyZipfModel {
    #[new]
    fn new(alpha: f64, i_max: usize) -> PyResult<Self> {
        Ok(Self {
            inner: traffic::ZipfModel::new(alpha, i_max).map_err(value_err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn i_max(&self) -> usize {
        self.inner.i_max()
    }

    #[getter]
    fn c_max(&self) -> f64 {
        self.inner.c_max()
    }

    fn popularity(&self, rank: usize) -> PyResult<f64> {
        self.inner.popularity(rank).map_err(value_err)
    }

    fn probability(&self, rank: usize) -> PyResult<f64> {
        self.inner.probability(rank).map_err(value_err)
    }

    /// Expected requests per rank for `users` subscribers.
    fn expected_requests(&self, users: f64) -> Vec<f64> {
        traffic::DemandProfile::new(&self.inner, users, 1.0).requests
    }

    fn __repr__(&self) -> String {
        format!("ZipfModel(alpha={}, i_max={})", self.inner.alpha(), self.inner.i_max())
    }
}

#[pyclass(name = "ThresholdReport", module = "comp_cast", frozen, get_all)]
struct PyThresholdReport {
    alpha: f64,
    argmin: usize,
    time_at_argmin: f64,
    curve: Vec<f64>,
    closed_form: Option<f64>,
    closed_form_rounded: Option<usize>,
    improvement_vs_unicast: f64,
    improvement_vs_broadcast: f64,
}

impl From<ThresholdReport> for PyThresholdReport {
    fn from(r: ThresholdReport) -> Self {
        Self {
            alpha: r.alpha,
            argmin: r.argmin,
            time_at_argmin: r.time_at_argmin,
            curve: r.curve.iter().map(|p| p.total).collect(),
            closed_form: r.closed_form.as_ref().map(|c| c.value),
            closed_form_rounded: r.closed_form.as_ref().map(|c| c.rounded),
            improvement_vs_unicast: r.improvement_vs_unicast,
            improvement_vs_broadcast: r.improvement_vs_broadcast,
        }
    }
}

#[pymethods]
impl PyThresholdReport {
    fn __repr__(&self) -> String {
        format!(
            "ThresholdReport(alpha={}, argmin={}, improvement_vs_unicast={:.4})",
            self.alpha, self.argmin, self.improvement_vs_unicast
        )
    }
}

#[pyclass(name = "BeamformingResult", module = "comp_cast", frozen, get_all)]
struct PyBeamformingResult {
    t_star: f64,
    relaxation_bound: f64,
    sinrs: Vec<f64>,
    precoders: Vec<Vec<Complex64>>,
    per_antenna_power: Vec<f64>,
    rank_one_residual: f64,
    conic_solves: usize,
    zero_channel: bool,
}

impl From<BeamformingResult> for PyBeamformingResult {
    fn from(r: BeamformingResult) -> Self {
        Self {
            t_star: r.t_star,
            relaxation_bound: r.relaxation_bound,
            per_antenna_power: beamforming::per_antenna_power(&r.precoders),
            precoders: r.precoders.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            sinrs: r.sinrs,
            rank_one_residual: r.rank_one_residual,
            conic_solves: r.conic_solves,
            zero_channel: r.status == beamforming::BeamformingStatus::ZeroChannel,
        }
    }
}

#[pymethods]
impl PyBeamformingResult {
    #[getter]
    fn spectral_efficiency(&self) -> f64 {
        beamforming::spectral_efficiency(self.t_star)
    }

    fn __repr__(&self) -> String {
        format!(
            "BeamformingResult(t_star={:.6}, relaxation_bound={:.6})",
            self.t_star, self.relaxation_bound
        )
    }
}

fn cost_params(users: f64, spf_uni: f64, spf_bc: f64, alpha: f64, i_max: usize, file_size: f64, bandwidth: f64) -> PyResult<CostParams> {
    let zipf = traffic::ZipfModel::new(alpha, i_max).map_err(value_err)?;
    CostParams::new(users, file_size, bandwidth, spf_uni, spf_bc, zipf).map_err(value_err)
}

/// Total delivery time with files ranked below `threshold` broadcast.
#[pyfunction]
#[pyo3(signature = (threshold, users, spf_uni, spf_bc, alpha, i_max = 100, file_size = 1.0, bandwidth = 1.0))]
#[allow(clippy::too_many_arguments)]
fn total_time(
    threshold: usize,
    users: f64,
    spf_uni: f64,
    spf_bc: f64,
    alpha: f64,
    i_max: usize,
    file_size: f64,
    bandwidth: f64,
) -> PyResult<f64> {
    let params = cost_params(users, spf_uni, spf_bc, alpha, i_max, file_size, bandwidth)?;
    threshold::total_time(&params, threshold).map_err(value_err)
}

/// Exhaustive threshold optimization.
#[pyfunction]
#[pyo3(signature = (users, spf_uni, spf_bc, alpha, i_max = 100, file_size = 1.0, bandwidth = 1.0))]
fn optimal_threshold(
    users: f64,
    spf_uni: f64,
    spf_bc: f64,
    alpha: f64,
    i_max: usize,
    file_size: f64,
    bandwidth: f64,
) -> PyResult<PyThresholdReport> {
    let params = cost_params(users, spf_uni, spf_bc, alpha, i_max, file_size, bandwidth)?;
    Ok(threshold::argmin_discrete(&params).map_err(value_err)?.into())
}

/// Seeded user drop and channel draw; returns `(user_positions, rows)`.
#[pyfunction]
#[pyo3(signature = (n_bs, n_users, seed, eta = 3.0, spacing = 1.0, fading = true))]
fn generate_channel(
    n_bs: usize,
    n_users: usize,
    seed: u64,
    eta: f64,
    spacing: f64,
    fading: bool,
) -> PyResult<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let topo = channel::place_users(n_bs, spacing, n_users, seed).map_err(value_err)?;
    let cfg = ChannelConfig {
        path_loss_exponent: eta,
        fading,
        noise_power: 1.0,
    };
    let ch = channel::generate_channel(&topo, &cfg, seed).map_err(value_err)?;
    Ok((topo.user_positions().to_vec(), rows_of(&ch.h)))
}

/// Max-min fair single-stream broadcast under per-antenna power limits.
#[pyfunction]
#[pyo3(signature = (channel, power, noise = 1.0, n_rand = beamforming::DEFAULT_RANDOMIZATIONS, seed = 0))]
fn solve_broadcast(
    py: Python<'_>,
    channel: Vec<Vec<Complex64>>,
    power: f64,
    noise: f64,
    n_rand: usize,
    seed: u64,
) -> PyResult<PyBeamformingResult> {
    let problem = BroadcastProblem::uniform(matrix(channel)?, power, noise).map_err(beam_err)?;
    let r = py
        .detach(|| beamforming::solve_broadcast_maxmin(&problem, n_rand, seed))
        .map_err(beam_err)?;
    Ok(r.into())
}

/// Max-min fair unicast with one stream per row of a square channel.
#[pyfunction]
#[pyo3(signature = (channel, power, noise = 1.0, bisection_tol = beamforming::DEFAULT_BISECTION_TOL))]
fn solve_unicast(
    py: Python<'_>,
    channel: Vec<Vec<Complex64>>,
    power: f64,
    noise: f64,
    bisection_tol: f64,
) -> PyResult<PyBeamformingResult> {
    let problem = UnicastProblem::uniform(matrix(channel)?, power, noise).map_err(beam_err)?;
    let r = py
        .detach(|| beamforming::solve_unicast_maxmin(&problem, bisection_tol))
        .map_err(beam_err)?;
    Ok(r.into())
}

#[pyfunction]
fn spectral_efficiency(t: f64) -> f64 {
    beamforming::spectral_efficiency(t)
}

/// Full Monte Carlo pipeline from `key = value` config text. Returns the
/// run report as a dict of strings.
#[pyfunction]
#[pyo3(signature = (config = "", threads = None))]
fn simulate(py: Python<'_>, config: &str, threads: Option<usize>) -> PyResult<Vec<(String, String)>> {
    let cfg = harness::parse_config_str(config).map_err(value_err)?;
    let report = py.detach(|| harness::simulate(&cfg, threads)).map_err(|e| match e {
        HarnessError::Config(c) => value_err(c),
        other => PyRuntimeError::new_err(other.to_string()),
    })?;
    Ok(report
        .to_key_values()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

#[pymodule]
fn comp_cast(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyZipfModel>()?;
    m.add_class::<PyThresholdReport>()?;
    m.add_class::<PyBeamformingResult>()?;
    m.add_function(wrap_pyfunction!(total_time, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(generate_channel, m)?)?;
    m.add_function(wrap_pyfunction!(solve_broadcast, m)?)?;
    m.add_function(wrap_pyfunction!(solve_unicast, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
