//! Signal recovery from crossing times.
//!
//! Three decoders share the pipeline pieces in this module:
//!
//! * **BIA** (bandlimited interpolation algorithm): trigonometrically
//!   interpolate the uniform-in-`u` samples `h(n*delta)`, invert the ramp
//!   transform, and project onto the source band. One shot.
//! * **IASR** (iterative amplitude sampling reconstruction): residual-driven
//!   refinement of BIA. Iteration `k` interpolates the data residual
//!   `eta = h - h_k` at the crossing levels, maps it back through the inverse
//!   transform, lowpasses, adds the correction to the iterate, and re-encodes
//!   the iterate to get `h_{k+1}` at the levels. Iteration 1 is exactly BIA
//!   (same code path here, so they agree to the bit).
//! * **Voronoi baseline**: the classical frame iteration for nonuniform
//!   sampling, `f_{k+1} = f_k + P_sigma Q_V(y - f_k(t_n))`, where `Q_V` is
//!   nearest-sample piecewise-constant quasi-interpolation on the Voronoi
//!   cells of the crossing times (cell boundaries at midpoints, realized on
//!   the dense reconstruction grid) and `P_sigma` the lowpass projection.
//!
//! All decoders accumulate the iterate both as dense samples on the
//! reconstruction grid and as in-band Fourier coefficients, so off-grid
//! evaluation (needed when re-encoding the iterate) is exact for the iterate
//! and costs one short coefficient sum per point.
//!
//! Failure modes are reported, not thrown: a non-invertible interpolated
//! residual sets `InversionFailure`, three consecutive growths of the
//! correction norm set `DivergenceDetected`, and the report carries whatever
//! iterations completed.

use std::time::Instant;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::encoder::TimeSequence;
use crate::error::{Error, Result};
use crate::fourier::{dft_coeffs, fft_inverse, PeriodicInterpolator};
use crate::grid::UniformGrid;
use crate::ramp::{
    lp_norm, picard_sweep, recover_signal, AmplitudeTimeFunction, FixedPointOptions,
};

/// Error-to-reference ratio below which SER is reported as saturated.
pub const SER_SATURATION_REL: f64 = 1e-14;
/// Absolute RMS below which an estimate of the zero signal counts as exact.
const ZERO_REF_ABS_FLOOR: f64 = 1e-12;

// ─── Report types ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReconstructionMethod {
    #[serde(rename = "BIA")]
    Bia,
    #[serde(rename = "IASR")]
    Iasr,
    Voronoi,
}

impl std::fmt::Display for ReconstructionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Bia => "BIA",
            Self::Iasr => "IASR",
            Self::Voronoi => "Voronoi",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ReconstructionStatus {
    Ok,
    /// The interpolated residual broke the monotonicity needed by the
    /// inverse transform at this iteration.
    InversionFailure { iteration: usize },
    /// The correction norm grew for three consecutive iterations, or an
    /// iterate became too steep to re-encode.
    DivergenceDetected { iteration: usize },
    /// The epsilon-based stopping rule failed to trigger before the safety
    /// cap on iterations.
    IterationCapReached { cap: usize },
}

impl std::fmt::Display for ReconstructionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Ok => f.write_str("ok"),
            Self::InversionFailure { iteration } => write!(f, "inversion_failure@{iteration}"),
            Self::DivergenceDetected { iteration } => write!(f, "divergence@{iteration}"),
            Self::IterationCapReached { cap } => write!(f, "iteration_cap@{cap}"),
        }
    }
}

/// Outcome of one decoder run. Saturated SER entries are stored as
/// `f64::INFINITY` (and serialized as nulls with a parallel flag list).
#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub method: ReconstructionMethod,
    /// SER in dB after each completed iteration.
    pub ser_per_iteration: Vec<f64>,
    /// Wall-clock seconds per completed iteration.
    pub wall_time_per_iteration: Vec<f64>,
    /// L2 norm of each iteration's correction term.
    pub correction_norms: Vec<f64>,
    /// Final iterate on the reconstruction grid.
    pub final_signal: Vec<f64>,
    pub status: ReconstructionStatus,
    /// Whether the crossing times satisfied the max-gap density condition.
    pub density_ok: bool,
}

impl ReconstructionReport {
    pub fn iterations_executed(&self) -> usize {
        self.ser_per_iteration.len()
    }

    pub fn final_ser(&self) -> Option<f64> {
        self.ser_per_iteration.last().copied()
    }

    pub fn is_saturated(&self, iteration_idx: usize) -> bool {
        self.ser_per_iteration[iteration_idx] == f64::INFINITY
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            method: ReconstructionMethod,
            status: &'a ReconstructionStatus,
            density_ok: bool,
            iterations_executed: usize,
            ser_per_iteration_db: Vec<Option<f64>>,
            ser_saturated: Vec<bool>,
            wall_time_per_iteration_s: &'a [f64],
            correction_l2_per_iteration: &'a [f64],
            final_signal: &'a [f64],
        }
        let doc = Doc {
            method: self.method,
            status: &self.status,
            density_ok: self.density_ok,
            iterations_executed: self.iterations_executed(),
            ser_per_iteration_db: self
                .ser_per_iteration
                .iter()
                .map(|&v| v.is_finite().then_some(v))
                .collect(),
            ser_saturated: self.ser_per_iteration.iter().map(|&v| v == f64::INFINITY).collect(),
            wall_time_per_iteration_s: &self.wall_time_per_iteration,
            correction_l2_per_iteration: &self.correction_norms,
            final_signal: &self.final_signal,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// CSV SER trace with header `iteration,ser_db,wall_time_s`; saturated
    /// entries print as `inf`.
    pub fn ser_trace_csv(&self) -> String {
        let mut out = String::from("iteration,ser_db,wall_time_s\n");
        for (i, (&ser, &wall)) in
            self.ser_per_iteration.iter().zip(&self.wall_time_per_iteration).enumerate()
        {
            out.push_str(&format!("{},{ser},{wall}\n", i + 1));
        }
        out
    }
}

// ─── Decoder inputs ─────────────────────────────────────────────────────────

/// IASR stopping parameters: iterate while `k < max_iterations_k` **or** the
/// correction norm still exceeds `epsilon` (the disjunction runs at least
/// `max_iterations_k` iterations; `epsilon = inf` pins the count exactly).
#[derive(Debug, Clone, Serialize)]
pub struct IASRConfig {
    pub max_iterations_k: usize,
    /// L2 threshold on the correction term.
    pub epsilon: f64,
    /// Lowpass cutoff in rad/s.
    pub lpf_cutoff_sigma: f64,
}

impl IASRConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations_k < 1 {
            return Err(Error::ConfigInvalid("max_iterations_k must be >= 1".into()));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::ConfigInvalid(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.lpf_cutoff_sigma > 0.0) || !self.lpf_cutoff_sigma.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "lpf_cutoff_sigma must be positive, got {}",
                self.lpf_cutoff_sigma
            )));
        }
        Ok(())
    }
}

/// Grids and reference shared by all decoders. The reconstruction grid must
/// start at 0 and span one signal period; `reference` holds the true signal
/// on that grid for SER traces.
#[derive(Debug, Clone)]
pub struct ReconstructionSetup<'a> {
    pub rec_grid: UniformGrid,
    pub reference: &'a [f64],
    /// Dense u-grid length for interpolating the level-domain residual;
    /// 0 picks a power of two >= 4x the data length.
    pub dense_u_len: usize,
    pub opts: FixedPointOptions,
}

impl<'a> ReconstructionSetup<'a> {
    pub fn new(rec_grid: UniformGrid, reference: &'a [f64]) -> Result<Self> {
        if reference.len() != rec_grid.count {
            return Err(Error::InvalidParameter(format!(
                "reference has {} samples for a grid of {} points",
                reference.len(),
                rec_grid.count
            )));
        }
        Ok(Self { rec_grid, reference, dense_u_len: 0, opts: FixedPointOptions::default() })
    }

    fn validate_against(&self, period: f64) -> Result<()> {
        if self.rec_grid.start != 0.0 || (self.rec_grid.span() - period).abs() > 1e-9 * period {
            return Err(Error::InvalidParameter(
                "reconstruction grid must start at 0 and span one signal period".into(),
            ));
        }
        if self.reference.len() != self.rec_grid.count {
            return Err(Error::InvalidParameter(
                "reference length does not match the reconstruction grid".into(),
            ));
        }
        Ok(())
    }

    fn dense_len(&self, n_data: usize) -> usize {
        if self.dense_u_len != 0 {
            self.dense_u_len
        } else {
            (4 * n_data).next_power_of_two().clamp(1024, 1 << 17)
        }
    }
}

// ─── Pipeline pieces ────────────────────────────────────────────────────────

/// Interpolate the uniform-in-`u` samples `(n*delta, h_n)` onto a dense grid
/// over one period `|alpha|*T` (zero-padded discrete Fourier interpolation,
/// the periodic form of sinc interpolation).
pub fn sinc_interpolate_h(
    samples: &[(f64, f64)],
    alpha: f64,
    period_t: f64,
    u_grid: &UniformGrid,
) -> Result<AmplitudeTimeFunction> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientPoints(format!(
            "need at least 2 level samples, got {n}"
        )));
    }
    let delta = samples[1].0 - samples[0].0;
    if !(delta > 0.0) {
        return Err(Error::NonuniformInput("level positions must increase".into()));
    }
    for (i, w) in samples.windows(2).enumerate() {
        let step = w[1].0 - w[0].0;
        if (step - delta).abs() > 1e-9 * delta {
            return Err(Error::NonuniformInput(format!(
                "spacing {step} at index {i} deviates from delta = {delta}"
            )));
        }
    }
    let period_u = (alpha * period_t).abs();
    if (n as f64 * delta - period_u).abs() > 1e-9 * period_u {
        return Err(Error::NonuniformInput(format!(
            "{n} samples spaced {delta} do not tile the period {period_u}"
        )));
    }
    if (u_grid.start - samples[0].0).abs() > 1e-9 * period_u {
        return Err(Error::InvalidParameter(
            "dense grid must start at the first sample's level".into(),
        ));
    }
    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let dense = PeriodicInterpolator::from_samples(&values, period_u, samples[0].0)?
        .resample(u_grid.count)?;
    AmplitudeTimeFunction::new(u_grid.clone(), dense, alpha, period_t)
}

fn band_harmonics(period: f64, cutoff_sigma: f64) -> usize {
    (cutoff_sigma * period / (2.0 * std::f64::consts::PI) * (1.0 + 1e-9)).floor() as usize
}

/// Lowpass projection returning both the filtered samples and the kept
/// one-sided coefficients `c_0..c_K`.
pub(crate) fn lowpass_with_coeffs(
    samples: &[f64],
    period: f64,
    cutoff_sigma: f64,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    if !(period > 0.0) || !(cutoff_sigma > 0.0) || !cutoff_sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lowpass needs positive period and cutoff, got {period}, {cutoff_sigma}"
        )));
    }
    let n = samples.len();
    let nyquist = std::f64::consts::PI * n as f64 / period;
    if n < 2 || nyquist <= cutoff_sigma {
        return Err(Error::GridTooCoarse(format!(
            "grid Nyquist {nyquist} rad/s must exceed the cutoff {cutoff_sigma} rad/s"
        )));
    }
    let k_keep = band_harmonics(period, cutoff_sigma);
    let mut kept = dft_coeffs(samples);
    kept.truncate(k_keep + 1);
    kept[0] = Complex64::new(kept[0].re, 0.0);

    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    spec[0] = kept[0] * n as f64;
    for (m, &c) in kept.iter().enumerate().skip(1) {
        spec[m] = c * n as f64;
        spec[n - m] = c.conj() * n as f64;
    }
    fft_inverse(&mut spec);
    Ok((spec.into_iter().map(|v| v.re).collect(), kept))
}

/// Zero every Fourier bin of the periodic samples whose frequency exceeds
/// `cutoff_sigma` rad/s (band-edge bins are kept). Idempotent.
pub fn lowpass_project(samples: &[f64], period: f64, cutoff_sigma: f64) -> Result<Vec<f64>> {
    Ok(lowpass_with_coeffs(samples, period, cutoff_sigma)?.0)
}

/// Signal-to-error ratio `10 log10(||ref||^2 / ||ref - est||^2)` in dB from
/// samples on a common grid. Errors below `1e-14` of the reference norm
/// saturate to `f64::INFINITY`.
pub fn ser(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.is_empty() || reference.len() != estimate.len() {
        return Err(Error::InvalidParameter(format!(
            "SER needs matching nonempty sample lists, got {} and {}",
            reference.len(),
            estimate.len()
        )));
    }
    let ref_norm = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ref_norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let err_norm = reference
        .iter()
        .zip(estimate)
        .map(|(r, e)| (r - e) * (r - e))
        .sum::<f64>()
        .sqrt();
    if err_norm < SER_SATURATION_REL * ref_norm {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (ref_norm / err_norm).log10())
}

/// SER for report traces: a zero reference with an (effectively) zero
/// estimate reports saturated instead of erroring.
fn ser_for_report(reference: &[f64], estimate: &[f64]) -> f64 {
    match ser(reference, estimate) {
        Ok(v) => v,
        Err(_) => {
            let n = estimate.len().max(1);
            let rms = (estimate.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            if rms < ZERO_REF_ABS_FLOOR {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

// ─── BIA and IASR ───────────────────────────────────────────────────────────

/// One-shot reconstruction: interpolate `h` samples, invert the transform,
/// lowpass. Exactly IASR's first iteration.
pub fn reconstruct_bia(
    ts: &TimeSequence,
    sigma: f64,
    setup: &ReconstructionSetup,
) -> Result<ReconstructionReport> {
    run_iasr(ts, sigma, 1, f64::INFINITY, setup, ReconstructionMethod::Bia)
}

pub fn reconstruct_iasr(
    ts: &TimeSequence,
    cfg: &IASRConfig,
    setup: &ReconstructionSetup,
) -> Result<ReconstructionReport> {
    cfg.validate()?;
    run_iasr(
        ts,
        cfg.lpf_cutoff_sigma,
        cfg.max_iterations_k,
        cfg.epsilon,
        setup,
        ReconstructionMethod::Iasr,
    )
}

fn run_iasr(
    ts: &TimeSequence,
    sigma: f64,
    k_max: usize,
    epsilon: f64,
    setup: &ReconstructionSetup,
    method: ReconstructionMethod,
) -> Result<ReconstructionReport> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("cutoff must be positive, got {sigma}")));
    }
    let period = ts.period();
    setup.validate_against(period)?;
    let alpha = ts.alpha();
    let n_data = ts.n_per_period();
    let h_true = ts.h_samples();
    let u_data = UniformGrid::new(0.0, ts.delta(), n_data.max(2))?;
    let period_u = alpha * period;
    let n_dense = setup.dense_len(n_data);
    let dense_grid = UniformGrid::new(0.0, period_u / n_dense as f64, n_dense)?;
    let density_ok = ts.check_density(sigma);
    // safety valve for epsilon values below the numerical floor
    let hard_cap = k_max.max(4096);

    let n_rec = setup.rec_grid.count;
    let mut f_dense = vec![0.0f64; n_rec];
    let mut f_coeffs: Vec<Complex64> = Vec::new();
    let mut h_k = vec![0.0f64; n_data];

    let mut ser_list = Vec::new();
    let mut wall_list = Vec::new();
    let mut norm_list = Vec::new();
    let mut status = ReconstructionStatus::Ok;
    let mut prev_norm = f64::INFINITY;
    let mut growth_streak = 0usize;
    let mut k = 0usize;

    loop {
        let tick = Instant::now();

        let eta: Vec<f64> = h_true.iter().zip(&h_k).map(|(t, c)| t - c).collect();
        let eta_dense =
            PeriodicInterpolator::from_samples(&eta, period_u, 0.0)?.resample(n_dense)?;
        let eta_atf =
            AmplitudeTimeFunction::new(dense_grid.clone(), eta_dense, alpha, period)?;
        let e_raw = match recover_signal(&eta_atf, &setup.rec_grid, &setup.opts) {
            Ok(v) => v,
            Err(Error::InversionFailure(_)) | Err(Error::NoConvergence { .. }) => {
                status = ReconstructionStatus::InversionFailure { iteration: k + 1 };
                break;
            }
            Err(e) => return Err(e),
        };
        let (e_filt, e_coeffs) = lowpass_with_coeffs(&e_raw, period, sigma)?;
        if f_coeffs.is_empty() {
            f_coeffs = vec![Complex64::new(0.0, 0.0); e_coeffs.len()];
        }
        for (acc, c) in f_coeffs.iter_mut().zip(&e_coeffs) {
            *acc += c;
        }
        for (acc, v) in f_dense.iter_mut().zip(&e_filt) {
            *acc += v;
        }
        let norm_e = lp_norm(&e_filt, setup.rec_grid.step, 2.0)?;
        k += 1;
        ser_list.push(ser_for_report(setup.reference, &f_dense));
        norm_list.push(norm_e);

        if norm_e > prev_norm {
            growth_streak += 1;
        } else {
            growth_streak = 0;
        }
        prev_norm = norm_e;
        if growth_streak >= 3 {
            status = ReconstructionStatus::DivergenceDetected { iteration: k };
            wall_list.push(tick.elapsed().as_secs_f64());
            break;
        }

        let keep_going = k < k_max || norm_e > epsilon;
        if !keep_going {
            wall_list.push(tick.elapsed().as_secs_f64());
            break;
        }
        if k >= hard_cap {
            status = ReconstructionStatus::IterationCapReached { cap: hard_cap };
            wall_list.push(tick.elapsed().as_secs_f64());
            break;
        }

        // re-encode the iterate: h_{k+1} at the data levels
        let interp = PeriodicInterpolator::from_coeffs(f_coeffs.clone(), period, 0.0);
        let scale = f_dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match picard_sweep(&|t| interp.eval(t), alpha, &u_data, &setup.opts, 1e-9 * scale) {
            Ok((vals, _)) => h_k = vals[..n_data].to_vec(),
            Err(Error::NoConvergence { .. }) => {
                status = ReconstructionStatus::DivergenceDetected { iteration: k };
                wall_list.push(tick.elapsed().as_secs_f64());
                break;
            }
            Err(e) => return Err(e),
        }
        wall_list.push(tick.elapsed().as_secs_f64());
    }

    Ok(ReconstructionReport {
        method,
        ser_per_iteration: ser_list,
        wall_time_per_iteration: wall_list,
        correction_norms: norm_list,
        final_signal: f_dense,
        status,
        density_ok,
    })
}

// ─── Voronoi baseline ───────────────────────────────────────────────────────

pub fn reconstruct_voronoi(
    ts: &TimeSequence,
    sigma: f64,
    max_iterations: usize,
    setup: &ReconstructionSetup,
) -> Result<ReconstructionReport> {
    let samples = ts.nonuniform_samples();
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    reconstruct_voronoi_from_samples(&times, &values, ts.period(), sigma, max_iterations, setup)
}

/// Frame iteration from explicit nonuniform samples `(t_n, y_n)` over one
/// period. The crossing decoder above delegates here; tests can feed exactly
/// uniform samples to check the classical-frame limit.
pub fn reconstruct_voronoi_from_samples(
    times: &[f64],
    values: &[f64],
    period: f64,
    sigma: f64,
    max_iterations: usize,
    setup: &ReconstructionSetup,
) -> Result<ReconstructionReport> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("cutoff must be positive, got {sigma}")));
    }
    if max_iterations < 1 {
        return Err(Error::InvalidParameter("need at least one iteration".into()));
    }
    let n = times.len();
    if n == 0 || values.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} times with {} values",
            n,
            values.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonuniformInput("times must be strictly increasing".into()));
    }
    if n > 1 && times[n - 1] - times[0] >= period {
        return Err(Error::InvalidParameter("times must fall within one period".into()));
    }
    setup.validate_against(period)?;

    // Voronoi cell of each dense grid point: boundaries at midpoints between
    // consecutive times, with a wrapped midpoint closing the period.
    let t0 = times[0];
    let mut midpoints: Vec<f64> =
        times.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    midpoints.push(0.5 * (times[n - 1] + t0 + period));
    let assign: Vec<usize> = setup
        .rec_grid
        .iter()
        .map(|t| {
            let s = t0 + (t - t0).rem_euclid(period);
            let p = midpoints.partition_point(|&m| m <= s);
            if p == n {
                0
            } else {
                p
            }
        })
        .collect();

    let max_gap = {
        let mut g: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        g.push(times[0] + period - times[n - 1]);
        g.into_iter().fold(0.0, f64::max)
    };
    let density_ok = max_gap < std::f64::consts::PI / sigma;

    let n_rec = setup.rec_grid.count;
    let mut f_dense = vec![0.0f64; n_rec];
    let mut f_coeffs: Vec<Complex64> = Vec::new();
    let mut residual: Vec<f64> = values.to_vec();

    let mut ser_list = Vec::new();
    let mut wall_list = Vec::new();
    let mut norm_list = Vec::new();
    let mut status = ReconstructionStatus::Ok;
    let mut prev_norm = f64::INFINITY;
    let mut growth_streak = 0usize;

    for k in 1..=max_iterations {
        let tick = Instant::now();
        let quasi: Vec<f64> = assign.iter().map(|&i| residual[i]).collect();
        let (corr, corr_coeffs) = lowpass_with_coeffs(&quasi, period, sigma)?;
        if f_coeffs.is_empty() {
            f_coeffs = vec![Complex64::new(0.0, 0.0); corr_coeffs.len()];
        }
        for (acc, c) in f_coeffs.iter_mut().zip(&corr_coeffs) {
            *acc += c;
        }
        for (acc, v) in f_dense.iter_mut().zip(&corr) {
            *acc += v;
        }
        let norm_c = lp_norm(&corr, setup.rec_grid.step, 2.0)?;
        ser_list.push(ser_for_report(setup.reference, &f_dense));
        norm_list.push(norm_c);

        if norm_c > prev_norm {
            growth_streak += 1;
        } else {
            growth_streak = 0;
        }
        prev_norm = norm_c;
        if growth_streak >= 3 {
            status = ReconstructionStatus::DivergenceDetected { iteration: k };
            wall_list.push(tick.elapsed().as_secs_f64());
            break;
        }

        if k < max_iterations {
            let interp = PeriodicInterpolator::from_coeffs(f_coeffs.clone(), period, 0.0);
            for (r, (&t, &y)) in residual.iter_mut().zip(times.iter().zip(values)) {
                *r = y - interp.eval(t);
            }
        }
        wall_list.push(tick.elapsed().as_secs_f64());
    }

    Ok(ReconstructionReport {
        method: ReconstructionMethod::Voronoi,
        ser_per_iteration: ser_list,
        wall_time_per_iteration: wall_list,
        correction_norms: norm_list,
        final_signal: f_dense,
        status,
        density_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode;
    use crate::signal::BandlimitedSignal;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn noise(seed: u64, k: f64) -> BandlimitedSignal {
        BandlimitedSignal::synth_noise(seed, TWO_PI * k, 1.0, 1.0).unwrap()
    }

    /// Encode one period with N crossings at slope mult*A*sigma.
    fn encoded(f: &BandlimitedSignal, mult: f64, n: usize) -> TimeSequence {
        let alpha = mult * f.amp_bound() * f.bandwidth();
        let delta = alpha * f.period() / n as f64;
        encode(f, alpha, delta, 1e-13, 200).unwrap()
    }

    fn setup_for<'a>(f: &BandlimitedSignal, reference: &'a [f64]) -> ReconstructionSetup<'a> {
        let grid = UniformGrid::over_period(f.period(), reference.len()).unwrap();
        ReconstructionSetup::new(grid, reference).unwrap()
    }

    // ── sinc interpolation ──

    #[test]
    fn sinc_zero_and_constant_samples() {
        let alpha = 2.0;
        let grid = UniformGrid::over_period(2.0, 128).unwrap();
        let pairs: Vec<(f64, f64)> = (0..16).map(|n| (n as f64 * 0.125, 0.0)).collect();
        let atf = sinc_interpolate_h(&pairs, alpha, 1.0, &grid).unwrap();
        assert!(atf.values().iter().all(|&v| v == 0.0));

        let pairs: Vec<(f64, f64)> = (0..16).map(|n| (n as f64 * 0.125, -0.35)).collect();
        let atf = sinc_interpolate_h(&pairs, alpha, 1.0, &grid).unwrap();
        for &v in atf.values() {
            assert!((v + 0.35).abs() < 1e-13);
        }
    }

    #[test]
    fn sinc_recovers_tone_below_level_nyquist() {
        let alpha = 2.0;
        let period_u = 2.0;
        let n = 32;
        let tone = |u: f64| 0.01 * (TWO_PI * 3.0 * u / period_u).cos();
        let pairs: Vec<(f64, f64)> =
            (0..n).map(|j| {
                let u = j as f64 * period_u / n as f64;
                (u, tone(u))
            }).collect();
        let grid = UniformGrid::over_period(period_u, 512).unwrap();
        let atf = sinc_interpolate_h(&pairs, alpha, 1.0, &grid).unwrap();
        for (j, u) in grid.iter().enumerate() {
            assert!((atf.values()[j] - tone(u)).abs() < 1e-10, "at u = {u}");
        }
    }

    #[test]
    fn sinc_rejects_nonuniform_spacing() {
        let mut pairs: Vec<(f64, f64)> = (0..16).map(|n| (n as f64 * 0.125, 0.0)).collect();
        pairs[7].0 += 0.01;
        let grid = UniformGrid::over_period(2.0, 64).unwrap();
        assert!(matches!(
            sinc_interpolate_h(&pairs, 2.0, 1.0, &grid),
            Err(Error::NonuniformInput(_))
        ));
    }

    // ── lowpass projection ──

    #[test]
    fn lowpass_keeps_bandlimited_input() {
        let f = noise(5, 6.0);
        let vals = f.samples(256).unwrap();
        let out = lowpass_project(&vals, 1.0, f.bandwidth()).unwrap();
        for (a, b) in vals.iter().zip(&out) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lowpass_removes_out_of_band_tone() {
        let n = 256;
        let vals: Vec<f64> = (0..n).map(|j| (TWO_PI * 9.0 * j as f64 / n as f64).cos()).collect();
        let out = lowpass_project(&vals, 1.0, TWO_PI * 5.0).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn lowpass_is_idempotent_and_matches_parseval() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let n = 256;
        let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sigma = TWO_PI * 20.0;
        let once = lowpass_project(&vals, 1.0, sigma).unwrap();
        let twice = lowpass_project(&once, 1.0, sigma).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12);
        }
        // output energy equals the in-band energy of the input
        let coeffs = dft_coeffs(&vals);
        let mut in_band = coeffs[0].norm_sqr();
        for m in 1..=20 {
            in_band += 2.0 * coeffs[m].norm_sqr();
        }
        let out_energy = once.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((out_energy - in_band).abs() < 1e-12 * in_band.max(1.0));
    }

    #[test]
    fn lowpass_rejects_coarse_grid() {
        let vals = vec![0.0; 8];
        assert!(matches!(
            lowpass_project(&vals, 1.0, TWO_PI * 10.0),
            Err(Error::GridTooCoarse(_))
        ));
    }

    // ── SER ──

    #[test]
    fn ser_examples() {
        let reference: Vec<f64> = (0..64).map(|j| (TWO_PI * j as f64 / 64.0).sin()).collect();
        assert_eq!(ser(&reference, &reference).unwrap(), f64::INFINITY);
        let zeros = vec![0.0; 64];
        assert!(ser(&reference, &zeros).unwrap().abs() < 1e-12);
        let scaled: Vec<f64> = reference.iter().map(|v| 0.9 * v).collect();
        assert!((ser(&reference, &scaled).unwrap() - 20.0).abs() < 1e-9);
        assert!(matches!(ser(&zeros, &reference), Err(Error::ZeroReference)));
    }

    // ── BIA ──

    #[test]
    fn bia_zero_signal_saturates() {
        let f = BandlimitedSignal::constant(0.0, 1.0).unwrap();
        let seq = encode(&f, 4.0, 0.25, 1e-13, 100).unwrap();
        let reference = vec![0.0; 256];
        let setup = setup_for(&f, &reference);
        let report = reconstruct_bia(&seq, TWO_PI, &setup).unwrap();
        assert_eq!(report.status, ReconstructionStatus::Ok);
        assert_eq!(report.iterations_executed(), 1);
        assert!(report.is_saturated(0));
        assert!(report.final_signal.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn bia_large_slope_small_delta_reaches_40db() {
        let f = noise(41, 3.0);
        let seq = encoded(&f, 10.0, 128);
        let reference = f.samples(512).unwrap();
        let setup = setup_for(&f, &reference);
        let report = reconstruct_bia(&seq, f.bandwidth(), &setup).unwrap();
        assert_eq!(report.status, ReconstructionStatus::Ok);
        let ser_db = report.ser_per_iteration[0];
        assert!(ser_db >= 40.0, "BIA SER = {ser_db} dB");
    }

    #[test]
    fn bia_improves_as_delta_shrinks() {
        let f = noise(43, 4.0);
        let reference = f.samples(512).unwrap();
        let setup = setup_for(&f, &reference);
        let coarse = reconstruct_bia(&encoded(&f, 3.0, 24), f.bandwidth(), &setup).unwrap();
        let fine = reconstruct_bia(&encoded(&f, 3.0, 48), f.bandwidth(), &setup).unwrap();
        assert!(
            fine.ser_per_iteration[0] > coarse.ser_per_iteration[0] + 3.0,
            "halving delta: {} -> {} dB",
            coarse.ser_per_iteration[0],
            fine.ser_per_iteration[0]
        );
    }

    // ── IASR ──

    #[test]
    fn iasr_first_iteration_is_bia() {
        let f = noise(47, 5.0);
        let seq = encoded(&f, 2.0, 16);
        let reference = f.samples(256).unwrap();
        let setup = setup_for(&f, &reference);
        let bia = reconstruct_bia(&seq, f.bandwidth(), &setup).unwrap();
        let cfg = IASRConfig {
            max_iterations_k: 6,
            epsilon: f64::INFINITY,
            lpf_cutoff_sigma: f.bandwidth(),
        };
        let iasr = reconstruct_iasr(&seq, &cfg, &setup).unwrap();
        let diff = (iasr.ser_per_iteration[0] - bia.ser_per_iteration[0]).abs();
        assert!(diff < 1e-6, "SER difference {diff} dB");
        // same code path: first-iteration signals agree to roundoff
        let bia_sig = &bia.final_signal;
        // reconstruct partial iterate from the IASR trace is not exposed;
        // instead compare one-iteration IASR directly
        let one = IASRConfig { max_iterations_k: 1, ..cfg };
        let iasr1 = reconstruct_iasr(&seq, &one, &setup).unwrap();
        for (a, b) in iasr1.final_signal.iter().zip(bia_sig) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn iasr_improves_monotonically_near_landau() {
        // k = 6 harmonics: Landau needs 12 crossings/period; 16 is 1.33x
        let f = noise(3, 6.0);
        let seq = encoded(&f, 2.0, 16);
        let reference = f.samples(256).unwrap();
        let setup = setup_for(&f, &reference);
        let cfg = IASRConfig {
            max_iterations_k: 10,
            epsilon: f64::INFINITY,
            lpf_cutoff_sigma: f.bandwidth(),
        };
        let report = reconstruct_iasr(&seq, &cfg, &setup).unwrap();
        assert_eq!(report.status, ReconstructionStatus::Ok);
        assert_eq!(report.iterations_executed(), 10);
        let trace = &report.ser_per_iteration;
        for w in trace.windows(2) {
            assert!(w[1] > w[0] - 0.1, "SER dipped: {} -> {}", w[0], w[1]);
        }
        assert!(
            trace[9] > trace[0] + 3.0,
            "no real progress: {} -> {} dB",
            trace[0],
            trace[9]
        );
    }

    #[test]
    fn iasr_zero_signal_terminates_immediately() {
        let f = BandlimitedSignal::constant(0.0, 1.0).unwrap();
        let seq = encode(&f, 4.0, 0.25, 1e-13, 100).unwrap();
        let reference = vec![0.0; 128];
        let setup = setup_for(&f, &reference);
        let cfg = IASRConfig { max_iterations_k: 1, epsilon: 0.0, lpf_cutoff_sigma: TWO_PI };
        let report = reconstruct_iasr(&seq, &cfg, &setup).unwrap();
        assert_eq!(report.status, ReconstructionStatus::Ok);
        assert_eq!(report.iterations_executed(), 1);
        assert!(report.correction_norms[0] <= 1e-12);
        assert!(report.is_saturated(0));
    }

    #[test]
    fn iasr_epsilon_runs_past_k() {
        let f = noise(7, 3.0);
        let seq = encoded(&f, 3.0, 32);
        let reference = f.samples(256).unwrap();
        let setup = setup_for(&f, &reference);
        let cfg = IASRConfig {
            max_iterations_k: 1,
            epsilon: 1e-8,
            lpf_cutoff_sigma: f.bandwidth(),
        };
        let report = reconstruct_iasr(&seq, &cfg, &setup).unwrap();
        assert_eq!(report.status, ReconstructionStatus::Ok);
        assert!(report.iterations_executed() > 1);
        assert!(*report.correction_norms.last().unwrap() <= 1e-8);
    }

    // ── Voronoi ──

    #[test]
    fn voronoi_uniform_nyquist_oracle() {
        // exactly uniform samples of a one-harmonic tone: one frame
        // iteration plus projection is near-exact
        let n_samp = 64;
        let f_true = |t: f64| 0.8 * (TWO_PI * t).cos() + 0.1;
        let times: Vec<f64> = (0..n_samp).map(|j| j as f64 / n_samp as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| f_true(t)).collect();
        let n_rec = 8192;
        let grid = UniformGrid::over_period(1.0, n_rec).unwrap();
        let reference: Vec<f64> = grid.iter().map(f_true).collect();
        let setup = ReconstructionSetup::new(grid, &reference).unwrap();
        let report =
            reconstruct_voronoi_from_samples(&times, &values, 1.0, TWO_PI, 1, &setup).unwrap();
        assert_eq!(report.status, ReconstructionStatus::Ok);
        assert!(
            report.ser_per_iteration[0] >= 60.0,
            "one uniform iteration: {} dB",
            report.ser_per_iteration[0]
        );
    }

    #[test]
    fn voronoi_uniform_convergence_is_fast() {
        let n_samp = 16;
        let f_true = |t: f64| 0.5 * (TWO_PI * t).cos() - 0.3 * (TWO_PI * t).sin();
        let times: Vec<f64> = (0..n_samp).map(|j| j as f64 / n_samp as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| f_true(t)).collect();
        let n_rec = 4096;
        let grid = UniformGrid::over_period(1.0, n_rec).unwrap();
        let reference: Vec<f64> = grid.iter().map(f_true).collect();
        let setup = ReconstructionSetup::new(grid, &reference).unwrap();
        let report =
            reconstruct_voronoi_from_samples(&times, &values, 1.0, TWO_PI, 3, &setup).unwrap();
        let trace = &report.ser_per_iteration;
        assert!(trace[0] >= 40.0, "iteration 1: {} dB", trace[0]);
        assert!(trace[1] > trace[0]);
        assert!(trace[2] >= 55.0, "iteration 3: {} dB", trace[2]);
    }

    #[test]
    fn voronoi_zero_signal_is_exact() {
        let f = BandlimitedSignal::constant(0.0, 1.0).unwrap();
        let seq = encode(&f, 4.0, 0.25, 1e-13, 100).unwrap();
        let reference = vec![0.0; 128];
        let setup = setup_for(&f, &reference);
        let report = reconstruct_voronoi(&seq, TWO_PI, 2, &setup).unwrap();
        assert!(report.is_saturated(0));
    }

    #[test]
    fn voronoi_trails_iasr_on_first_iteration_near_landau() {
        let f = noise(12, 6.0);
        let seq = encoded(&f, 2.0, 16); // 1.33x Landau
        let reference = f.samples(256).unwrap();
        let setup = setup_for(&f, &reference);
        let cfg = IASRConfig {
            max_iterations_k: 1,
            epsilon: f64::INFINITY,
            lpf_cutoff_sigma: f.bandwidth(),
        };
        let iasr = reconstruct_iasr(&seq, &cfg, &setup).unwrap();
        let voronoi = reconstruct_voronoi(&seq, f.bandwidth(), 1, &setup).unwrap();
        assert!(
            iasr.ser_per_iteration[0] > voronoi.ser_per_iteration[0],
            "IASR {} dB vs Voronoi {} dB",
            iasr.ser_per_iteration[0],
            voronoi.ser_per_iteration[0]
        );
    }

    #[test]
    fn voronoi_insensitive_to_slope_iasr_sensitive() {
        // Same crossing density, slope and spacing scaled together. The
        // slope only moves the crossing jitter, so the mean Voronoi SER
        // barely reacts while IASR rides the shrinking aliasing error.
        let seeds = [19u64, 20, 21, 22, 23, 24];
        let mut iasr_mean = [0.0f64; 2];
        let mut voronoi_mean = [0.0f64; 2];
        for &seed in &seeds {
            let f = noise(seed, 6.0);
            let reference = f.samples(256).unwrap();
            let setup = setup_for(&f, &reference);
            let cfg = IASRConfig {
                max_iterations_k: 1,
                epsilon: f64::INFINITY,
                lpf_cutoff_sigma: f.bandwidth(),
            };
            for (i, mult) in [3.0, 12.0].into_iter().enumerate() {
                let seq = encoded(&f, mult, 20);
                iasr_mean[i] +=
                    reconstruct_iasr(&seq, &cfg, &setup).unwrap().ser_per_iteration[0];
                voronoi_mean[i] += reconstruct_voronoi(&seq, f.bandwidth(), 1, &setup)
                    .unwrap()
                    .ser_per_iteration[0];
            }
        }
        for v in iasr_mean.iter_mut().chain(voronoi_mean.iter_mut()) {
            *v /= seeds.len() as f64;
        }
        assert!(
            iasr_mean[1] > iasr_mean[0] + 1.0,
            "IASR should improve with slope: {iasr_mean:?}"
        );
        assert!(
            (voronoi_mean[1] - voronoi_mean[0]).abs() < 1.0,
            "Voronoi should barely move: {voronoi_mean:?}"
        );
    }

    // ── report plumbing ──

    #[test]
    fn report_serializes_and_prints_csv() {
        let f = noise(2, 3.0);
        let seq = encoded(&f, 3.0, 24);
        let reference = f.samples(128).unwrap();
        let setup = setup_for(&f, &reference);
        let cfg = IASRConfig {
            max_iterations_k: 3,
            epsilon: f64::INFINITY,
            lpf_cutoff_sigma: f.bandwidth(),
        };
        let report = reconstruct_iasr(&seq, &cfg, &setup).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(json["method"], "IASR");
        assert_eq!(json["iterations_executed"], 3);
        assert_eq!(json["ser_per_iteration_db"].as_array().unwrap().len(), 3);
        assert_eq!(json["status"]["kind"], "Ok");

        let csv = report.ser_trace_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iteration,ser_db,wall_time_s"));
        assert_eq!(csv.lines().count(), 4);
    }
}
