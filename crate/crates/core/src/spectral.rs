//! Spectral diagnostics for amplitude-time functions.
//!
//! The transform trades bandlimitedness for decay: while the source signal
//! has a hard band edge, its amplitude-time function `h` is (apart from the
//! constant case) not bandlimited, but its spectrum decays exponentially,
//! `|ĥ(ξ)| <= C e^{-2π|ξ|b}`, with a guaranteed decay scale
//!
//! ```text
//! a = (|α|/σ) ln(|α|/(Aσ)) - (|α| - Aσ)/σ
//! ```
//!
//! This module measures that: one-sided coefficient spectra of `h` at
//! `ξ_k = k/period_U` (the periodic surrogate of the continuous transform),
//! log-linear least-squares fits of the decay, and an out-of-band energy
//! test for non-bandlimitedness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ramp::{decay_scale, AmplitudeTimeFunction};

/// Relative out-of-band energy fraction below which a spectrum counts as
/// numerically bandlimited (10x the roundoff floor of the pipeline).
const NONBANDLIMITED_ENERGY_THRESHOLD: f64 = 1e-25;
/// Relative magnitude floor under which bins are excluded from decay fits.
const FIT_MAGNITUDE_FLOOR: f64 = 1e-13;

/// Guaranteed and fitted exponential-decay parameters of one spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDecayBound {
    /// Guaranteed decay scale from the slope/band parameters.
    pub a: f64,
    pub alpha: f64,
    #[serde(rename = "A")]
    pub amp_a: f64,
    pub sigma: f64,
    /// Fitted decay scale: `-slope/(2π)` of the log-magnitude fit.
    pub fitted_b: f64,
    /// Envelope constant: smallest `C` with `|ĥ(ξ)| <= C e^{-2πξ fitted_b}`
    /// over the fitted range.
    #[serde(rename = "fitted_C")]
    pub fitted_c: f64,
    /// Bin range `[start, end)` the fit used.
    pub fit_range: (usize, usize),
}

impl SpectralDecayBound {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `a = (|alpha|/sigma) ln(|alpha|/(A sigma)) - (|alpha| - A sigma)/sigma`.
/// Positive for every `|alpha| > A*sigma > 0` and vanishing at the boundary.
pub fn decay_exponent_a(alpha: f64, amp_a: f64, sigma: f64) -> Result<f64> {
    if !(amp_a > 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need A > 0 and sigma > 0, got A = {amp_a}, sigma = {sigma}"
        )));
    }
    decay_scale(alpha.abs(), amp_a * sigma, sigma)
}

/// One-sided spectrum of `h`: pairs `(ξ_k, |c_k|)` with `ξ_k = k/period_U`
/// in cycles per u-unit, for `k = 0..=max_harmonic`.
pub fn spectrum_of_h(h: &AmplitudeTimeFunction) -> Vec<(f64, f64)> {
    let period_u = h.period_u();
    h.interpolator()
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| (k as f64 / period_u, c.norm()))
        .collect()
}

/// CSV rendering of a spectrum with header `xi,magnitude`.
pub fn spectrum_csv(spectrum: &[(f64, f64)]) -> String {
    let mut out = String::from("xi,magnitude\n");
    for (xi, mag) in spectrum {
        out.push_str(&format!("{xi},{mag}\n"));
    }
    out
}

/// Default fit window per the sizing rule: start at twice the source band
/// edge (skipping the in-band plateau), stop at the first bin whose
/// magnitude falls below `1e-12` of the peak (the numerical floor).
pub fn default_fit_range(spectrum: &[(f64, f64)], band_edge_bin: usize) -> std::ops::Range<usize> {
    let peak = spectrum.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let start = (2 * band_edge_bin).min(spectrum.len());
    let mut end = spectrum.len();
    for (k, &(_, mag)) in spectrum.iter().enumerate().skip(start) {
        if mag < 1e-12 * peak {
            end = k;
            break;
        }
    }
    start..end
}

/// Least-squares fit of `ln|ĥ(ξ)|` against `ξ` over `fit_range` (bins below
/// the relative floor are skipped). Needs at least 8 usable points.
pub fn fit_decay(
    spectrum: &[(f64, f64)],
    fit_range: std::ops::Range<usize>,
    alpha: f64,
    amp_a: f64,
    sigma: f64,
) -> Result<SpectralDecayBound> {
    let peak = spectrum.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let pts: Vec<(f64, f64)> = spectrum
        .get(fit_range.clone())
        .unwrap_or(&[])
        .iter()
        .filter(|(_, mag)| *mag > FIT_MAGNITUDE_FLOOR * peak)
        .map(|&(xi, mag)| (xi, mag.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::InsufficientPoints(format!(
            "{} usable spectrum points in bins {}..{}, need 8",
            pts.len(),
            fit_range.start,
            fit_range.end
        )));
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let fitted_b = -slope / (2.0 * std::f64::consts::PI);
    // smallest envelope constant covering every fitted point
    let fitted_c = pts
        .iter()
        .map(|&(xi, logmag)| logmag + 2.0 * std::f64::consts::PI * xi * fitted_b)
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    let a = decay_exponent_a(alpha, amp_a, sigma)?;
    Ok(SpectralDecayBound {
        a,
        alpha,
        amp_a,
        sigma,
        fitted_b,
        fitted_c,
        fit_range: (fit_range.start, fit_range.end),
    })
}

/// Whether `h` carries genuine energy beyond `sigma_test` (rad per u-unit):
/// true when the out-of-band energy fraction exceeds ten times the numerical
/// floor. Constant (and zero) functions report false — the one bandlimited
/// case the transform admits.
pub fn check_nonbandlimited(h: &AmplitudeTimeFunction, sigma_test: f64) -> bool {
    if !(sigma_test > 0.0) {
        return false;
    }
    let period_u = h.period_u();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut total = 0.0f64;
    let mut out_of_band = 0.0f64;
    for (k, c) in h.interpolator().coeffs().iter().enumerate() {
        let weight = if k == 0 { 1.0 } else { 2.0 };
        let energy = weight * c.norm_sqr();
        total += energy;
        if two_pi * k as f64 / period_u > sigma_test * (1.0 + 1e-9) {
            out_of_band += energy;
        }
    }
    total > 0.0 && out_of_band / total > 10.0 * NONBANDLIMITED_ENERGY_THRESHOLD
}
