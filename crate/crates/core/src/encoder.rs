//! Delta-ramp time encoding.
//!
//! The encoder records the times at which the ramp sum `g(t) = alpha*t + f(t)`
//! crosses the uniform amplitude levels `n*delta`:
//!
//! ```text
//! t_n = g^{-1}(n*delta),        n = 0, 1, 2, ...
//! ```
//!
//! Because `g` increases by `alpha*T` over one signal period, the sequence is
//! periodic in the sense `t_{n+N} = t_n + T` whenever `N = alpha*T/delta` is
//! an integer; the encoder enforces that alignment so one period of times
//! carries everything. Each time doubles as a nonuniform amplitude sample,
//! `f(t_n) = n*delta - alpha*t_n`, and as a uniform-in-`u` sample of the
//! amplitude-time function, `h(n*delta) = t_n - n*delta/alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ramp::monotone_root;
use crate::signal::BandlimitedSignal;

/// One period of level-crossing times plus the encoding parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSequence {
    alpha: f64,
    delta: f64,
    #[serde(rename = "period_T")]
    period_t: f64,
    n_per_period: usize,
    times: Vec<f64>,
}

impl TimeSequence {
    pub fn new(
        alpha: f64,
        delta: f64,
        period_t: f64,
        times: Vec<f64>,
    ) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "encoder slope must be positive and finite, got {alpha}"
            )));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "level spacing must be positive and finite, got {delta}"
            )));
        }
        let n = check_period_alignment(alpha, delta, period_t)?;
        if times.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} times for {} levels per period",
                times.len(),
                n
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        if n > 1 && times[n - 1] - times[0] >= period_t {
            return Err(Error::InvalidParameter(
                "times must fall within one signal period".into(),
            ));
        }
        Ok(Self { alpha, delta, period_t, n_per_period: n, times })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn period(&self) -> f64 {
        self.period_t
    }

    /// `N = alpha*T/delta`, the number of crossings per period.
    pub fn n_per_period(&self) -> usize {
        self.n_per_period
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The crossing time for an arbitrary level index, unwrapped by
    /// periodicity: `t_{n+N} = t_n + T`.
    pub fn time_at(&self, n: i64) -> f64 {
        let len = self.n_per_period as i64;
        let cycle = n.div_euclid(len);
        let idx = n.rem_euclid(len) as usize;
        self.times[idx] + cycle as f64 * self.period_t
    }

    /// Uniform-in-`u` samples of the amplitude-time function:
    /// `h(n*delta) = t_n - n*delta/alpha`.
    pub fn h_samples(&self) -> Vec<f64> {
        self.times
            .iter()
            .enumerate()
            .map(|(n, &t)| t - n as f64 * self.delta / self.alpha)
            .collect()
    }

    /// The nonuniform amplitude samples `(t_n, f(t_n))` implied by the
    /// crossings: `f(t_n) = n*delta - alpha*t_n`. No signal model needed.
    pub fn nonuniform_samples(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .enumerate()
            .map(|(n, &t)| (t, n as f64 * self.delta - self.alpha * t))
            .collect()
    }

    /// Successive gaps `t_{n+1} - t_n`, including the periodic wrap
    /// `t_0 + T - t_{N-1}` as the last entry.
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.times.len();
        let mut out: Vec<f64> = self.times.windows(2).map(|w| w[1] - w[0]).collect();
        out.push(self.times[0] + self.period_t - self.times[n - 1]);
        out
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps().into_iter().fold(0.0, f64::max)
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Whether the crossings are dense enough for perfect reconstruction of
    /// a band-`sigma` signal: every gap below the Nyquist spacing `pi/sigma`.
    pub fn check_density(&self, sigma: f64) -> bool {
        sigma > 0.0 && self.max_gap() < std::f64::consts::PI / sigma
    }

    /// CSV with header `n,t_n`, one crossing per row, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t_n\n");
        for (n, &t) in self.times.iter().enumerate() {
            out.push_str(&format!("{n},{t}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TimeSequence = serde_json::from_str(text)?;
        Self::new(doc.alpha, doc.delta, doc.period_t, doc.times)
    }
}

fn check_period_alignment(alpha: f64, delta: f64, period_t: f64) -> Result<usize> {
    if !(period_t > 0.0) || !period_t.is_finite() {
        return Err(Error::InvalidParameter(format!("period must be positive, got {period_t}")));
    }
    let ratio = alpha * period_t / delta;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha*T/delta = {ratio} must be a positive integer so the crossings repeat \
             period-aligned"
        )));
    }
    Ok(rounded as usize)
}

/// Encode one period of `f`: solve `g(t_n) = n*delta` for `n = 0..N-1`.
///
/// Requires `alpha > 0` and `alpha > sup|f'|` (so `g` is strictly increasing
/// and every level has exactly one crossing), and `alpha*T/delta` integral.
/// Each time is an independent bracketed root solve — the bracket
/// `[(n*delta - A)/alpha, (n*delta + A)/alpha]` comes from `|f| <= A` — with
/// the previous crossing seeding Newton. Times are accurate to `tol` seconds.
pub fn encode(
    f: &BandlimitedSignal,
    alpha: f64,
    delta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<TimeSequence> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "encoder slope must be positive and finite, got {alpha}"
        )));
    }
    if alpha <= f.deriv_bound() {
        return Err(Error::SlopeTooSmall { slope: alpha, deriv_bound: f.deriv_bound() });
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "level spacing must be positive and finite, got {delta}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let n_levels = check_period_alignment(alpha, delta, f.period())?;

    // |t - t*| <= |g(t) - u| / (alpha - B)
    let resid_tol = (alpha - f.deriv_bound()) * tol;
    let a = f.amp_bound();
    let mut times = Vec::with_capacity(n_levels);
    let mut seed: Option<f64> = None;
    for n in 0..n_levels {
        let u = n as f64 * delta;
        let (t, _) = monotone_root(
            &|t| alpha * t + f.eval(t) - u,
            &|t| alpha + f.eval_derivative(t),
            (u - a) / alpha,
            (u + a) / alpha,
            seed,
            resid_tol,
            max_iter,
        )?;
        times.push(t);
        // next crossing is about one level spacing up the ramp
        seed = Some(t + delta / alpha);
    }
    TimeSequence::new(alpha, delta, f.period(), times)
}
