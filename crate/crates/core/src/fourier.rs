//! FFT helpers and trigonometric (Dirichlet) interpolation of periodic
//! functions sampled on uniform grids.
//!
//! For `n` real samples over one period the interpolant is the unique
//! trigonometric polynomial matching them, with the usual symmetric
//! convention for the Nyquist bin when `n` is even (split between `+n/2`
//! and `-n/2`, i.e. a pure cosine), which keeps the interpolant real and
//! minimal-energy. Evaluation between grid points uses the one-sided
//! coefficient form with a rotation recurrence; because coefficients of the
//! functions handled here decay exponentially, the recurrence roundoff is
//! negligible.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward FFT (unnormalized, as in rustfft).
pub fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// In-place inverse FFT, normalized by `1/n`.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(buf));
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Full normalized DFT of real samples: `c_m = (1/n) sum_j x_j e^{-2pi i jm/n}`.
pub fn dft_coeffs(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(&mut buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
    buf
}

/// Signed frequency index of DFT bin `m` out of `n` (`0..n/2` positive,
/// upper half negative).
#[inline]
pub fn signed_bin(m: usize, n: usize) -> i64 {
    if m as u64 <= (n / 2) as u64 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Trigonometric interpolant of a real periodic function from uniform
/// samples over one period.
#[derive(Debug, Clone)]
pub struct PeriodicInterpolator {
    period: f64,
    origin: f64,
    /// One-sided coefficients `c_0..c_M`. Term `m` contributes
    /// `w_m * Re(c_m e^{2pi i m (x-origin)/period})` with `w_m = 2` for
    /// `0 < m < n/2`, `w_0 = 1`, and `w_{n/2} = 1` (Nyquist cosine).
    coeffs: Vec<Complex64>,
    /// True when the last coefficient is an even-`n` Nyquist bin.
    nyquist: bool,
}

impl PeriodicInterpolator {
    /// Build from `samples[j] = f(origin + j*period/n)`.
    pub fn from_samples(samples: &[f64], period: f64, origin: f64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::InsufficientPoints(format!(
                "interpolation needs at least 2 samples, got {n}"
            )));
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidParameter(format!("period {period} must be positive")));
        }
        let full = dft_coeffs(samples);
        let m_max = n / 2;
        let mut coeffs: Vec<Complex64> = full[..=m_max].to_vec();
        let nyquist = n % 2 == 0;
        if nyquist {
            // Real input makes this bin real up to roundoff; keep the cosine
            // part so the interpolant is exactly real.
            coeffs[m_max] = Complex64::new(coeffs[m_max].re, 0.0);
        }
        Ok(Self { period, origin, coeffs, nyquist })
    }

    /// Build directly from one-sided coefficients (`c_0..c_M`, no Nyquist
    /// convention). Used when the in-band spectrum is already known.
    pub fn from_coeffs(coeffs: Vec<Complex64>, period: f64, origin: f64) -> Self {
        Self { period, origin, coeffs, nyquist: false }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Highest harmonic index carried by the interpolant.
    pub fn max_harmonic(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    fn weight(&self, m: usize) -> f64 {
        if m == 0 {
            1.0
        } else if self.nyquist && m == self.coeffs.len() - 1 {
            1.0
        } else {
            2.0
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let phi = 2.0 * std::f64::consts::PI * (x - self.origin) / self.period;
        let rot = Complex64::new(phi.cos(), phi.sin());
        let mut cur = rot;
        let mut acc = self.coeffs[0].re;
        for m in 1..self.coeffs.len() {
            acc += self.weight(m) * (self.coeffs[m] * cur).re;
            cur *= rot;
        }
        acc
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let phi = 2.0 * std::f64::consts::PI * (x - self.origin) / self.period;
        let rot = Complex64::new(phi.cos(), phi.sin());
        let omega = 2.0 * std::f64::consts::PI / self.period;
        let mut cur = rot;
        let mut acc = 0.0;
        for m in 1..self.coeffs.len() {
            // d/dx Re(c e^{i m omega x}) = -m omega Im(c e^{i m omega x})
            acc -= self.weight(m) * m as f64 * omega * (self.coeffs[m] * cur).im;
            cur *= rot;
        }
        acc
    }

    /// Exact samples of the interpolant on a refined uniform grid of
    /// `n_new >= 2*max_harmonic` points over the same period (zero-padded
    /// inverse FFT).
    pub fn resample(&self, n_new: usize) -> Result<Vec<f64>> {
        let m_max = self.max_harmonic();
        if n_new < 2 * m_max.max(1) {
            return Err(Error::GridTooCoarse(format!(
                "resampling to {n_new} points would alias harmonic {m_max}"
            )));
        }
        let mut spec = vec![Complex64::new(0.0, 0.0); n_new];
        spec[0] = Complex64::new(self.coeffs[0].re, 0.0) * n_new as f64;
        for m in 1..self.coeffs.len() {
            let c = self.coeffs[m] * (self.weight(m) / 2.0) * n_new as f64;
            spec[m] = c;
            spec[n_new - m] = c.conj();
        }
        fft_inverse(&mut spec);
        Ok(spec.into_iter().map(|v| v.re).collect())
    }

    /// Drop trailing coefficients whose magnitude (and all beyond) fall below
    /// `threshold`; speeds up pointwise evaluation of long spectra.
    pub fn truncated(&self, threshold: f64) -> Self {
        let mut keep = self.coeffs.len();
        while keep > 1 && self.coeffs[keep - 1].norm() < threshold {
            keep -= 1;
        }
        if keep == self.coeffs.len() {
            return self.clone();
        }
        Self {
            period: self.period,
            origin: self.origin,
            coeffs: self.coeffs[..keep].to_vec(),
            nyquist: false,
        }
    }
}
