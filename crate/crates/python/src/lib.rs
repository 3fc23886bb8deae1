//! Python bindings: model specification, Fokker–Planck solves, Monte Carlo
//! ensembles, fits and the experiment drivers.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use discharge_core::analysis::{self, CollapseWindow, ThresholdRestriction};
use discharge_core::experiment::{self as exp, ExperimentConfig};
use discharge_core::fp::{self, InitialDatum, SolverConfig, SolverMode};
use discharge_core::sim::{self, PathKind, SimOptions, StartState};
use discharge_core::{Error, RateKind};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::InvalidArgument(_)
        | Error::InvalidValue { .. }
        | Error::Parse { .. }
        | Error::Grid(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_name<T>(kind: &str, name: &str, f: impl Fn(&str) -> Option<T>) -> PyResult<T> {
    f(name).ok_or_else(|| PyValueError::new_err(format!("unknown {kind} `{name}`")))
}

/// Regularization `δ`, rate shape, connectivity `b`, diffusion `a` and the
/// center `x0` of the initial datum.
#[pyclass(name = "DischargeSpec", module = "discharge", from_py_object)]
#[derive(Clone)]
struct PySpec {
    inner: discharge_core::DischargeSpec,
}

#[pymethods]
impl PySpec {
    #[new]
    #[pyo3(signature = (delta = 0.125, rate_kind = "step", b = 0.0, a = 1.0, x0 = -1.0))]
    fn new(delta: f64, rate_kind: &str, b: f64, a: f64, x0: f64) -> PyResult<Self> {
        let inner = discharge_core::DischargeSpec {
            delta,
            rate_kind: parse_name("rate kind", rate_kind, RateKind::parse)?,
            b,
            a,
            x0,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn rate_kind(&self) -> &'static str {
        self.inner.rate_kind.name()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn x0(&self) -> f64 {
        self.inner.x0
    }

    /// Discharge intensity `λ(x)`.
    fn rate(&self, x: f64) -> f64 {
        self.inner.rate(x)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "DischargeSpec(delta={}, rate_kind='{}', b={}, a={}, x0={})",
            s.delta,
            s.rate_kind.name(),
            s.b,
            s.a,
            s.x0
        )
    }
}

/// Result of [`solve`]: grid, snapshots, firing rate and mass history.
#[pyclass(name = "Solution", module = "discharge", skip_from_py_object)]
struct PySolution {
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    snapshot_times: Vec<f64>,
    #[pyo3(get)]
    snapshots: Vec<Vec<f64>>,
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    firing: Vec<f64>,
    #[pyo3(get)]
    mass: Vec<f64>,
    #[pyo3(get)]
    min_density: f64,
    /// Trapezoid CDF of the final density at `x`.
    #[pyo3(get)]
    cdf: Vec<f64>,
}

#[pymethods]
impl PySolution {
    /// Density at the final time.
    #[getter]
    fn density(&self) -> Vec<f64> {
        self.snapshots.last().cloned().unwrap_or_default()
    }
}

/// (t_hard, t_soft, clock) per coupled sample.
type CoupledSample = (Option<f64>, Option<f64>, f64);
/// (label, b, exponent, second fit parameter, error measure).
type FitRow = (String, f64, f64, f64, f64);

/// Solves one Fokker–Planck problem. `mode` is one of `discharge`,
/// `discharge-killed`, `hard-wall`, `hard-wall-killed`.
#[pyfunction]
#[pyo3(signature = (spec, mode = "discharge", n_cells = 1024, tau = 1e-3, t_max = 1.0, sigma0_sq = 0.01, snapshot_times = None, point_start = None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    spec: &PySpec,
    mode: &str,
    n_cells: usize,
    tau: f64,
    t_max: f64,
    sigma0_sq: f64,
    snapshot_times: Option<Vec<f64>>,
    point_start: Option<f64>,
) -> PyResult<PySolution> {
    let initial = match point_start {
        Some(x) => InitialDatum::PointMass { x },
        None => InitialDatum::Gaussian {
            mean: spec.inner.x0,
            variance: sigma0_sq,
        },
    };
    let config = SolverConfig {
        spec: spec.inner,
        mode: parse_name("mode", mode, SolverMode::parse)?,
        n_cells,
        tau,
        t_max,
        initial,
        snapshot_times: snapshot_times.unwrap_or_default(),
        ..SolverConfig::default()
    };
    let out = py.detach(|| fp::solve_fp(&config)).map_err(to_py)?;
    Ok(PySolution {
        x: out.grid().x_nodes.clone(),
        snapshot_times: out.snapshots.iter().map(|s| s.t).collect(),
        cdf: out.scheme.node_cdf(out.final_density()),
        snapshots: out.snapshots.into_iter().map(|s| s.f).collect(),
        times: out.firing.times,
        firing: out.firing.values,
        mass: out.mass,
        min_density: out.min_density,
    })
}

/// One simulated trajectory.
#[pyclass(name = "Path", module = "discharge", skip_from_py_object)]
struct PyPath {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    states: Vec<f64>,
    #[pyo3(get)]
    jump_times: Vec<f64>,
    #[pyo3(get)]
    killed: bool,
    #[pyo3(get)]
    end_time: f64,
}

#[pymethods]
impl PyPath {
    fn jump_count_at(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }
}

fn sim_options(
    dt: f64,
    t_max: f64,
    start: Option<f64>,
    sample_times: Option<Vec<f64>>,
) -> SimOptions {
    let mut opts = SimOptions::new(dt, t_max);
    if let Some(x) = start {
        opts = opts.with_start(StartState::Point(x));
    }
    if let Some(s) = sample_times {
        opts = opts.with_samples(s);
    }
    opts
}

/// Simulates `n_paths` trajectories of `kind` (`hard-wall`, `discharge`,
/// `discharge-killed`). Paths start at `start`, or at `spec.x0` if omitted.
#[pyfunction]
#[pyo3(signature = (kind, spec, n_paths, dt = 1e-3, t_max = 1.0, seed = 0, start = None, sample_times = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    kind: &str,
    spec: &PySpec,
    n_paths: usize,
    dt: f64,
    t_max: f64,
    seed: u64,
    start: Option<f64>,
    sample_times: Option<Vec<f64>>,
) -> PyResult<Vec<PyPath>> {
    let kind = parse_name("process", kind, PathKind::parse)?;
    let opts = sim_options(dt, t_max, start, sample_times);
    let paths = py
        .detach(|| sim::simulate_ensemble(kind, &spec.inner, &opts, seed, n_paths))
        .map_err(to_py)?;
    Ok(paths
        .into_iter()
        .map(|p| PyPath {
            killed: p.terminal == sim::Terminal::KilledAtFirstJump,
            times: p.times,
            states: p.states,
            jump_times: p.jump_times,
            end_time: p.end_time,
        })
        .collect())
}

/// `(t_hard, t_soft, gamma)` per coupled sample; censored times are `None`.
#[pyfunction]
#[pyo3(signature = (spec, n_samples, dt = 1e-3, t_max = 1.0, seed = 0))]
fn coupled_first_jumps(
    py: Python<'_>,
    spec: &PySpec,
    n_samples: usize,
    dt: f64,
    t_max: f64,
    seed: u64,
) -> PyResult<Vec<CoupledSample>> {
    let opts = SimOptions::new(dt, t_max);
    let samples = py
        .detach(|| sim::coupled_ensemble(&spec.inner, &opts, seed, n_samples))
        .map_err(to_py)?;
    Ok(samples
        .into_iter()
        .map(|c| (c.t_hard, c.t_soft, c.gamma))
        .collect())
}

/// `(R, A, residual)` of `values ≈ A δ^R` over `deltas[start:end]`.
#[pyfunction]
#[pyo3(signature = (deltas, values, start = 0, end = None))]
fn fit_power_law(
    deltas: Vec<f64>,
    values: Vec<f64>,
    start: usize,
    end: Option<usize>,
) -> PyResult<(f64, f64, f64)> {
    let end = end.unwrap_or(deltas.len());
    let f = analysis::fit_power_law(&deltas, &values, start..end).map_err(to_py)?;
    Ok((f.rate, f.prefactor, f.residual))
}

/// `(alpha, beta, collapse_error)` from per-δ samples of `f` on `x ≥ 1`.
#[pyfunction]
#[pyo3(signature = (deltas, xs, fs, level = 0.1))]
fn fit_self_similar(
    deltas: Vec<f64>,
    xs: Vec<Vec<f64>>,
    fs: Vec<Vec<f64>>,
    level: f64,
) -> PyResult<(f64, f64, f64)> {
    if deltas.len() != xs.len() || deltas.len() != fs.len() {
        return Err(PyValueError::new_err(
            "deltas, xs and fs must have equal length",
        ));
    }
    let family = deltas
        .into_iter()
        .zip(xs)
        .zip(fs)
        .map(|((d, x), f)| ThresholdRestriction::new(d, x, f))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let window = CollapseWindow {
        level,
        ..CollapseWindow::default()
    };
    let fit = analysis::fit_self_similar(&family, window).map_err(to_py)?;
    Ok((fit.alpha, fit.beta, fit.collapse_error))
}

#[pyfunction]
fn kolmogorov_distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    analysis::kolmogorov_distance(&a, &b).map_err(to_py)
}

/// Parses `key = value` text and returns its canonical serialization.
#[pyfunction]
fn normalize_config(text: &str) -> PyResult<String> {
    Ok(exp::parse_config(text).map_err(to_py)?.serialize())
}

fn config(text: &str) -> PyResult<ExperimentConfig> {
    exp::parse_config(text).map_err(to_py)
}

/// Validation suite: `(check, value, tolerance, passed)` rows.
#[pyfunction]
#[pyo3(signature = (config_text = ""))]
fn run_validation(py: Python<'_>, config_text: &str) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let cfg = config(config_text)?;
    let report = py
        .detach(|| exp::run_validation_suite(&cfg))
        .map_err(to_py)?;
    Ok(report
        .checks
        .into_iter()
        .map(|c| (c.name, c.value, c.tolerance, c.pass))
        .collect())
}

/// Convergence study: `(quantity, b, R, A, residual)` per fitted series;
/// failed fits carry NaN.
#[pyfunction]
#[pyo3(signature = (config_text = ""))]
fn run_convergence(py: Python<'_>, config_text: &str) -> PyResult<Vec<FitRow>> {
    let cfg = config(config_text)?;
    let study = py
        .detach(|| exp::run_convergence_study(&cfg))
        .map_err(to_py)?;
    Ok(study
        .fits
        .iter()
        .map(|f| {
            let (r, a, res) = f
                .report
                .as_ref()
                .map_or((f64::NAN, f64::NAN, f64::NAN), |r| {
                    (r.fit.rate, r.fit.prefactor, r.fit.residual)
                });
            (f.quantity.name().to_string(), f.b, r, a, res)
        })
        .collect())
}

/// Self-similar study: `(model, b, alpha, beta, collapse_error)`.
#[pyfunction]
#[pyo3(signature = (config_text = ""))]
fn run_self_similar(py: Python<'_>, config_text: &str) -> PyResult<Vec<FitRow>> {
    let cfg = config(config_text)?;
    let study = py
        .detach(|| exp::run_self_similar_study(&cfg))
        .map_err(to_py)?;
    Ok(study
        .fits
        .iter()
        .map(|f| {
            let (a, b, c) = f.fit.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |s| {
                (s.alpha, s.beta, s.collapse_error)
            });
            (f.model.name().to_string(), f.b, a, b, c)
        })
        .collect())
}

#[pymodule]
fn discharge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyPath>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(coupled_first_jumps, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(fit_self_similar, m)?)?;
    m.add_function(wrap_pyfunction!(kolmogorov_distance, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_validation, m)?)?;
    m.add_function(wrap_pyfunction!(run_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(run_self_similar, m)?)?;
    Ok(())
}
