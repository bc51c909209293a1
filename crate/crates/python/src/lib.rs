//! Python bindings: `ampsamp_py` exposes the signal model, the delta-ramp
//! encoder, the ramp transform and its inverse, the reconstruction decoders,
//! spectral analysis, and the experiment runner.
//!
//! Build with `cargo build -p ampsamp-python --features extension-module`
//! and import the resulting `libampsamp_py.so` as `ampsamp_py` (see
//! `python/smoke_test.py`).

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ampsamp_core::encoder;
use ampsamp_core::experiment::{self, ExperimentConfig};
use ampsamp_core::ramp::{
    self, AmplitudeTimeFunction, FixedPointOptions, RampTransform,
};
use ampsamp_core::reconstruction::{
    self, IASRConfig, ReconstructionReport, ReconstructionSetup,
};
use ampsamp_core::spectral;
use ampsamp_core::{BandlimitedSignal, Error, UniformGrid};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::ConfigInvalid(_)
        | Error::InvalidParameter(_)
        | Error::Json(_)
        | Error::InvalidP(_)
        | Error::SlopeTooSmall { .. } => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPyResult<T> {
    fn into_py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for Result<T, Error> {
    fn into_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

// ─── Signal ─────────────────────────────────────────────────────────────────

/// Periodic bandlimited signal with certified band edge and amplitude bound.
#[pyclass]
#[derive(Clone)]
struct Signal {
    inner: BandlimitedSignal,
}

#[pymethods]
impl Signal {
    /// Seeded bandlimited white noise with sup-norm `amp`.
    #[staticmethod]
    #[pyo3(signature = (seed, sigma, period=1.0, amp=1.0))]
    fn synth_noise(seed: u64, sigma: f64, period: f64, amp: f64) -> PyResult<Self> {
        Ok(Self { inner: BandlimitedSignal::synth_noise(seed, sigma, period, amp).into_py()? })
    }

    #[staticmethod]
    #[pyo3(signature = (value, period=1.0))]
    fn constant(value: f64, period: f64) -> PyResult<Self> {
        Ok(Self { inner: BandlimitedSignal::constant(value, period).into_py()? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: BandlimitedSignal::from_json(text).into_py()? })
    }

    fn eval(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn eval_many(&self, ts: Vec<f64>) -> Vec<f64> {
        ts.iter().map(|&t| self.inner.eval(t)).collect()
    }

    fn eval_derivative(&self, t: f64) -> f64 {
        self.inner.eval_derivative(t)
    }

    /// `n` uniform samples over one period starting at 0.
    fn samples(&self, n: usize) -> PyResult<Vec<f64>> {
        self.inner.samples(n).into_py()
    }

    fn period(&self) -> f64 {
        self.inner.period()
    }

    /// Band edge in rad/s.
    fn sigma(&self) -> f64 {
        self.inner.bandwidth()
    }

    fn amp_bound(&self) -> f64 {
        self.inner.amp_bound()
    }

    fn deriv_bound(&self) -> f64 {
        self.inner.deriv_bound()
    }

    fn harmonics(&self) -> usize {
        self.inner.harmonics()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().into_py()
    }

    fn __repr__(&self) -> String {
        format!(
            "Signal(period={}, sigma={:.6}, amp_bound={:.6}, harmonics={})",
            self.inner.period(),
            self.inner.bandwidth(),
            self.inner.amp_bound(),
            self.inner.harmonics()
        )
    }
}

// ─── TimeSequence ───────────────────────────────────────────────────────────

/// One period of level-crossing times from the delta-ramp encoder.
#[pyclass]
#[derive(Clone)]
struct TimeSequence {
    inner: encoder::TimeSequence,
}

#[pymethods]
impl TimeSequence {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: encoder::TimeSequence::from_json(text).into_py()? })
    }

    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    /// Crossing time for an arbitrary level index (periodic unwrap).
    fn time_at(&self, n: i64) -> f64 {
        self.inner.time_at(n)
    }

    /// Uniform-in-u samples of the amplitude-time function, h(n*delta).
    fn h_samples(&self) -> Vec<f64> {
        self.inner.h_samples()
    }

    /// Nonuniform amplitude samples (t_n, f(t_n)).
    fn nonuniform_samples(&self) -> Vec<(f64, f64)> {
        self.inner.nonuniform_samples()
    }

    fn gaps(&self) -> Vec<f64> {
        self.inner.gaps()
    }

    fn max_gap(&self) -> f64 {
        self.inner.max_gap()
    }

    fn min_gap(&self) -> f64 {
        self.inner.min_gap()
    }

    /// Whether the max gap satisfies the sufficient density condition
    /// `max_gap < pi/sigma`.
    fn check_density(&self, sigma: f64) -> bool {
        self.inner.check_density(sigma)
    }

    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn delta(&self) -> f64 {
        self.inner.delta()
    }

    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn n_per_period(&self) -> usize {
        self.inner.n_per_period()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().into_py()
    }

    fn __len__(&self) -> usize {
        self.inner.n_per_period()
    }

    fn __repr__(&self) -> String {
        format!(
            "TimeSequence(alpha={:.6}, delta={:.6}, n_per_period={})",
            self.inner.alpha(),
            self.inner.delta(),
            self.inner.n_per_period()
        )
    }
}

// ─── AmplitudeTime ──────────────────────────────────────────────────────────

/// The amplitude-time function h on a uniform u-grid (dual of the signal
/// under the ramp transform).
#[pyclass]
#[derive(Clone)]
struct AmplitudeTime {
    inner: AmplitudeTimeFunction,
}

#[pymethods]
impl AmplitudeTime {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: AmplitudeTimeFunction::from_json(text).into_py()? })
    }

    fn eval(&self, u: f64) -> f64 {
        self.inner.eval(u)
    }

    fn eval_many(&self, us: Vec<f64>) -> Vec<f64> {
        us.iter().map(|&u| self.inner.eval(u)).collect()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    /// (start, step, count) of the underlying u-grid.
    fn grid(&self) -> (f64, f64, usize) {
        let g = self.inner.grid();
        (g.start, g.step, g.count)
    }

    fn slope(&self) -> f64 {
        self.inner.slope()
    }

    fn period_u(&self) -> f64 {
        self.inner.period_u()
    }

    fn period_t(&self) -> f64 {
        self.inner.period_t()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().into_py()
    }

    fn __repr__(&self) -> String {
        format!(
            "AmplitudeTime(slope={:.6}, period_u={:.6}, n={})",
            self.inner.slope(),
            self.inner.period_u(),
            self.inner.grid().count
        )
    }
}

// ─── Report ─────────────────────────────────────────────────────────────────

/// Per-iteration record of one decoder run. Saturated SER entries come back
/// as `float('inf')`.
#[pyclass]
struct Report {
    inner: ReconstructionReport,
}

#[pymethods]
impl Report {
    fn method(&self) -> String {
        self.inner.method.to_string()
    }

    fn ser_per_iteration(&self) -> Vec<f64> {
        self.inner.ser_per_iteration.clone()
    }

    fn wall_time_per_iteration(&self) -> Vec<f64> {
        self.inner.wall_time_per_iteration.clone()
    }

    fn correction_norms(&self) -> Vec<f64> {
        self.inner.correction_norms.clone()
    }

    fn final_signal(&self) -> Vec<f64> {
        self.inner.final_signal.clone()
    }

    fn status(&self) -> String {
        self.inner.status.to_string()
    }

    fn density_ok(&self) -> bool {
        self.inner.density_ok
    }

    fn iterations_executed(&self) -> usize {
        self.inner.iterations_executed()
    }

    fn final_ser(&self) -> Option<f64> {
        self.inner.final_ser()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().into_py()
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(method={}, iterations={}, final_ser={:?}, status={})",
            self.inner.method,
            self.inner.iterations_executed(),
            self.inner.final_ser(),
            self.inner.status
        )
    }
}

// ─── Module functions ───────────────────────────────────────────────────────

/// Encode `signal` with ramp slope `alpha` and level spacing `delta`.
#[pyfunction]
#[pyo3(signature = (signal, alpha, delta, tol=1e-12, max_iter=200))]
fn encode(
    signal: &Signal,
    alpha: f64,
    delta: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<TimeSequence> {
    Ok(TimeSequence { inner: encoder::encode(&signal.inner, alpha, delta, tol, max_iter).into_py()? })
}

/// Apply the ramp transform: sample h = M_alpha(f) on a uniform u-grid over
/// one period (length chosen automatically when `n_grid == 0`).
#[pyfunction]
#[pyo3(signature = (signal, alpha, n_grid=0, tol=1e-12))]
fn forward_transform(
    signal: &Signal,
    alpha: f64,
    n_grid: usize,
    tol: f64,
) -> PyResult<AmplitudeTime> {
    let f = &signal.inner;
    let transform = RampTransform::new(alpha).into_py()?;
    let n = if n_grid == 0 { ramp::suggested_u_grid_len(f, alpha, 1e-10) } else { n_grid };
    let u_grid = UniformGrid::over_period(alpha.abs() * f.period(), n).into_py()?;
    let opts = FixedPointOptions::with_tol(tol);
    let (h, _) = transform.to_amplitude_time(f, &u_grid, &opts).into_py()?;
    Ok(AmplitudeTime { inner: h })
}

/// Invert the ramp transform: recover f = M_{1/alpha}(h) on `n_points`
/// uniform times over one period.
#[pyfunction]
#[pyo3(signature = (h, n_points=512, tol=1e-12))]
fn recover(h: &AmplitudeTime, n_points: usize, tol: f64) -> PyResult<Vec<f64>> {
    let t_grid = UniformGrid::over_period(h.inner.period_t(), n_points).into_py()?;
    ramp::recover_signal(&h.inner, &t_grid, &FixedPointOptions::with_tol(tol)).into_py()
}

/// Reconstruct the signal from its crossing times. `method` is one of
/// "bia", "iasr", "voronoi"; the reference signal supplies the SER baseline
/// and the default lowpass cutoff.
#[pyfunction]
#[pyo3(signature = (seq, reference, method="iasr", iterations=8, epsilon=None, rec_len=1024, sigma=None, tol=1e-12))]
#[allow(clippy::too_many_arguments)]
fn reconstruct(
    seq: &TimeSequence,
    reference: &Signal,
    method: &str,
    iterations: usize,
    epsilon: Option<f64>,
    rec_len: usize,
    sigma: Option<f64>,
    tol: f64,
) -> PyResult<Report> {
    let f = &reference.inner;
    let sigma = sigma.unwrap_or_else(|| f.bandwidth());
    let samples = f.samples(rec_len).into_py()?;
    let rec_grid = UniformGrid::over_period(f.period(), rec_len).into_py()?;
    let mut setup = ReconstructionSetup::new(rec_grid, &samples).into_py()?;
    setup.opts = FixedPointOptions::with_tol(tol);
    let report = match method {
        "bia" => reconstruction::reconstruct_bia(&seq.inner, sigma, &setup).into_py()?,
        "iasr" => {
            let cfg = IASRConfig {
                max_iterations_k: iterations,
                epsilon: epsilon.unwrap_or(f64::INFINITY),
                lpf_cutoff_sigma: sigma,
            };
            reconstruction::reconstruct_iasr(&seq.inner, &cfg, &setup).into_py()?
        }
        "voronoi" => {
            reconstruction::reconstruct_voronoi(&seq.inner, sigma, iterations, &setup).into_py()?
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method '{other}' (expected bia, iasr, or voronoi)"
            )))
        }
    };
    Ok(Report { inner: report })
}

/// Signal-to-error ratio in dB between two sample vectors.
#[pyfunction]
fn ser(reference: Vec<f64>, estimate: Vec<f64>) -> PyResult<f64> {
    reconstruction::ser(&reference, &estimate).into_py()
}

/// Discrete L^p norm of uniformly spaced samples (`p = inf` for sup-norm).
#[pyfunction]
fn lp_norm(values: Vec<f64>, step: f64, p: f64) -> PyResult<f64> {
    ramp::lp_norm(&values, step, p).into_py()
}

/// One-sided magnitude spectrum of h as (frequency in cycles per u-unit,
/// magnitude) pairs.
#[pyfunction]
fn spectrum_of_h(h: &AmplitudeTime) -> Vec<(f64, f64)> {
    spectral::spectrum_of_h(&h.inner)
}

/// Closed-form spectral decay exponent a(alpha) for band edge `sigma` and
/// amplitude bound `amp`.
#[pyfunction]
fn decay_exponent_a(alpha: f64, amp: f64, sigma: f64) -> PyResult<f64> {
    spectral::decay_exponent_a(alpha, amp, sigma).into_py()
}

/// Fit the exponential tail of h's spectrum; returns a dict with the
/// theoretical exponent `a`, the fitted exponent `fitted_b`, the envelope
/// constant `fitted_C`, and the fitted bin range.
#[pyfunction]
fn fit_decay<'py>(
    py: Python<'py>,
    h: &AmplitudeTime,
    amp: f64,
    sigma: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    use pyo3::types::PyDict;
    let alpha = h.inner.slope();
    let spectrum = spectral::spectrum_of_h(&h.inner);
    let band_edge_bin =
        (sigma * h.inner.period_u() / (2.0 * std::f64::consts::PI * alpha.abs())).round() as usize;
    let range = spectral::default_fit_range(&spectrum, band_edge_bin);
    let fit = spectral::fit_decay(&spectrum, range, alpha, amp, sigma).into_py()?;
    let d = PyDict::new(py);
    d.set_item("a", fit.a)?;
    d.set_item("fitted_b", fit.fitted_b)?;
    d.set_item("fitted_C", fit.fitted_c)?;
    d.set_item("fit_range", fit.fit_range)?;
    Ok(d)
}

/// Empirical check that h has spectral energy beyond `sigma_test` (h of a
/// non-constant signal is never bandlimited).
#[pyfunction]
fn check_nonbandlimited(h: &AmplitudeTime, sigma_test: f64) -> bool {
    spectral::check_nonbandlimited(&h.inner, sigma_test)
}

/// Run an experiment config (JSON text). Returns a dict with the results
/// CSV, the summary CSV, and the full bundle as a JSON string.
#[pyfunction]
#[pyo3(signature = (config_json, workers=0))]
fn run_experiment<'py>(
    py: Python<'py>,
    config_json: &str,
    workers: usize,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    use pyo3::types::PyDict;
    let cfg = ExperimentConfig::from_json(config_json).into_py()?;
    let bundle = experiment::run_experiment(&cfg, workers).into_py()?;
    let d = PyDict::new(py);
    d.set_item("results_csv", experiment::results_csv(&bundle))?;
    d.set_item("summary_csv", experiment::summary_csv(&bundle))?;
    d.set_item(
        "bundle_json",
        serde_json::to_string_pretty(&bundle).map_err(|e| PyValueError::new_err(e.to_string()))?,
    )?;
    Ok(d)
}

#[pymodule]
fn ampsamp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Signal>()?;
    m.add_class::<TimeSequence>()?;
    m.add_class::<AmplitudeTime>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(forward_transform, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(ser, m)?)?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_of_h, m)?)?;
    m.add_function(wrap_pyfunction!(decay_exponent_a, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(check_nonbandlimited, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
