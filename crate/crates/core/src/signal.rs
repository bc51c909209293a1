//! Periodic bandlimited signal model.
//!
//! A signal is a real trigonometric polynomial
//! `f(t) = sum_{|k| <= K} c_k e^{2pi i k t / T}` with conjugate-symmetric
//! coefficients. Construction certifies the amplitude bound `A = sup|f|` and
//! the derivative bound `B = sup|f'|` by a dense-grid scan refined with
//! golden-section search, so downstream code can rely on them as true
//! envelopes (Bernstein gives `B <= A*sigma` as a sanity check).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::PeriodicInterpolator;
use crate::grid::UniformGrid;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Minimum number of dense-grid points per harmonic used by the
/// certification scans (well above the 16x-Nyquist floor of 32 per
/// harmonic).
const CERT_POINTS_PER_HARMONIC: usize = 64;

#[derive(Debug, Clone)]
pub struct BandlimitedSignal {
    period: f64,
    /// One-sided coefficients `c_0..c_K`; `c_{-k} = conj(c_k)` is implied.
    coeffs: Vec<Complex64>,
    /// Stated band limit in rad/s; always `>= 2*pi*K/period`.
    bandwidth: f64,
    /// Certified `sup |f|`.
    amp_bound: f64,
    /// Certified `sup |f'|`.
    deriv_bound: f64,
    interp: PeriodicInterpolator,
}

impl BandlimitedSignal {
    /// Build from one-sided coefficients `c_0..c_K`. `stated_bandwidth`
    /// overrides the minimal band `2*pi*K/period` (it may only be larger).
    pub fn from_coeffs(
        period: f64,
        coeffs: Vec<Complex64>,
        stated_bandwidth: Option<f64>,
    ) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "signal period must be positive, got {period}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("signal needs at least the DC coefficient".into()));
        }
        if coeffs[0].im.abs() > 1e-12 * (1.0 + coeffs[0].norm()) {
            return Err(Error::InvalidParameter(format!(
                "DC coefficient must be real, got imaginary part {}",
                coeffs[0].im
            )));
        }
        let mut coeffs = coeffs;
        coeffs[0] = Complex64::new(coeffs[0].re, 0.0);
        let k_max = coeffs.len() - 1;
        let min_band = TWO_PI * k_max as f64 / period;
        let bandwidth = match stated_bandwidth {
            None => min_band,
            Some(s) => {
                if s < min_band * (1.0 - 1e-12) {
                    return Err(Error::InvalidParameter(format!(
                        "stated bandwidth {s} rad/s below the highest harmonic {min_band} rad/s"
                    )));
                }
                s.max(min_band)
            }
        };
        let interp = PeriodicInterpolator::from_coeffs(coeffs.clone(), period, 0.0);
        let (amp_bound, deriv_bound) = certify_bounds(&interp, k_max);
        Ok(Self { period, coeffs, bandwidth, amp_bound, deriv_bound, interp })
    }

    /// The constant signal `f(t) = value`.
    pub fn constant(value: f64, period: f64) -> Result<Self> {
        Self::from_coeffs(period, vec![Complex64::new(value, 0.0)], None)
    }

    /// Bandlimited noise: iid complex Gaussian coefficients for all
    /// harmonics `|k| <= floor(bandwidth*period/2pi)`, conjugate-symmetrized
    /// and rescaled so the certified amplitude bound equals `target_amp`.
    /// Deterministic in `seed`.
    pub fn synth_noise(seed: u64, bandwidth: f64, period: f64, target_amp: f64) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
        }
        if !target_amp.is_finite() || target_amp <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "target amplitude must be positive, got {target_amp}"
            )));
        }
        let k_max = (bandwidth * period / TWO_PI + 1e-9).floor() as i64;
        if k_max < 1 {
            return Err(Error::InvalidParameter(format!(
                "bandwidth*period/2pi = {} < 1; no nonzero harmonic fits",
                bandwidth * period / TWO_PI
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = StandardNormal;
        let draw = |rng: &mut ChaCha8Rng| -> f64 { normal.sample(rng) };
        let mut coeffs = Vec::with_capacity(k_max as usize + 1);
        coeffs.push(Complex64::new(draw(&mut rng), 0.0));
        for _ in 1..=k_max {
            let re = draw(&mut rng);
            let im = draw(&mut rng);
            coeffs.push(Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
        }
        let unscaled = Self::from_coeffs(period, coeffs.clone(), Some(bandwidth))?;
        if unscaled.amp_bound <= 0.0 {
            return Err(Error::InvalidParameter("degenerate zero draw".into()));
        }
        let scale = target_amp / unscaled.amp_bound;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        Self::from_coeffs(period, coeffs, Some(bandwidth))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.interp.eval(t)
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        self.interp.eval_deriv(t)
    }

    /// `n` uniform samples over `[0, period)`.
    pub fn samples(&self, n: usize) -> Result<Vec<f64>> {
        if n >= 2 * self.harmonics().max(1) {
            self.interp.resample(n)
        } else {
            // below the interpolant's own Nyquist; evaluate pointwise
            Ok((0..n).map(|j| self.eval(self.period * j as f64 / n as f64)).collect())
        }
    }

    pub fn sample_grid(&self, grid: &UniformGrid) -> Vec<f64> {
        grid.iter().map(|t| self.eval(t)).collect()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Certified `sup |f|`.
    pub fn amp_bound(&self) -> f64 {
        self.amp_bound
    }

    /// Certified `sup |f'|`.
    pub fn deriv_bound(&self) -> f64 {
        self.deriv_bound
    }

    /// Highest harmonic index `K`.
    pub fn harmonics(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// One-sided coefficients `c_0..c_K`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn to_json(&self) -> Result<String> {
        let two_sided: Vec<[f64; 2]> = (-(self.harmonics() as i64)..=self.harmonics() as i64)
            .map(|k| {
                let c = if k < 0 {
                    self.coeffs[(-k) as usize].conj()
                } else {
                    self.coeffs[k as usize]
                };
                [c.re, c.im]
            })
            .collect();
        let doc = SignalJson {
            period_t: self.period,
            sigma: self.bandwidth,
            amp_bound_a: self.amp_bound,
            coeffs: two_sided,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SignalJson = serde_json::from_str(text)?;
        if doc.coeffs.is_empty() || doc.coeffs.len() % 2 == 0 {
            return Err(Error::ConfigInvalid(format!(
                "coeffs must list c_k for k = -K..K (odd length), got {}",
                doc.coeffs.len()
            )));
        }
        let k_max = doc.coeffs.len() / 2;
        let scale: f64 = doc
            .coeffs
            .iter()
            .map(|c| Complex64::new(c[0], c[1]).norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut one_sided = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let pos = Complex64::new(doc.coeffs[k_max + k][0], doc.coeffs[k_max + k][1]);
            let neg = Complex64::new(doc.coeffs[k_max - k][0], doc.coeffs[k_max - k][1]);
            if (pos - neg.conj()).norm() > 1e-12 * scale {
                return Err(Error::ConfigInvalid(format!(
                    "coefficients for k = +/-{k} are not conjugate-symmetric"
                )));
            }
            one_sided.push(pos);
        }
        let signal = Self::from_coeffs(doc.period_t, one_sided, Some(doc.sigma))?;
        if (signal.amp_bound - doc.amp_bound_a).abs() > 1e-6 * signal.amp_bound.max(1e-12) {
            return Err(Error::ConfigInvalid(format!(
                "stored amp_bound_A = {} disagrees with certified sup|f| = {}",
                doc.amp_bound_a, signal.amp_bound
            )));
        }
        Ok(signal)
    }
}

#[derive(Serialize, Deserialize)]
struct SignalJson {
    #[serde(rename = "period_T")]
    period_t: f64,
    sigma: f64,
    #[serde(rename = "amp_bound_A")]
    amp_bound_a: f64,
    /// `[re, im]` pairs for `k = -K..K`.
    coeffs: Vec<[f64; 2]>,
}

/// Certify `sup|f|` and `sup|f'|`: dense scan plus golden-section refinement
/// around every grid-local maximum of the magnitude.
fn certify_bounds(interp: &PeriodicInterpolator, k_max: usize) -> (f64, f64) {
    if k_max == 0 {
        return (interp.eval(0.0).abs(), 0.0);
    }
    let n = (CERT_POINTS_PER_HARMONIC * k_max).max(256);
    let period = interp.period();
    let amp = refine_sup(|t| interp.eval(t).abs(), interp.resample(n).expect("dense"), period);
    let deriv_samples: Vec<f64> =
        (0..n).map(|j| interp.eval_deriv(period * j as f64 / n as f64)).collect();
    let deriv = refine_sup(|t| interp.eval_deriv(t).abs(), deriv_samples, period);
    (amp, deriv)
}

fn refine_sup(value_at: impl Fn(f64) -> f64, samples: Vec<f64>, period: f64) -> f64 {
    let n = samples.len();
    let step = period / n as f64;
    let mags: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
    let mut best = 0.0f64;
    for j in 0..n {
        let prev = mags[(j + n - 1) % n];
        let next = mags[(j + 1) % n];
        if mags[j] >= prev && mags[j] >= next {
            let center = step * j as f64;
            best = best.max(golden_max(&value_at, center - step, center + step));
        }
    }
    best
}

/// Golden-section maximization; the bracket always comes from a dense scan so
/// the objective is unimodal on it. Returns the best value seen.
fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f(a).max(f(b)).max(f1).max(f2);
    for _ in 0..48 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        best = best.max(f1).max(f2);
    }
    best
}
