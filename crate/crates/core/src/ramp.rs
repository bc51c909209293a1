//! The ramp transform and its inverse.
//!
//! For a signal `f` with certified derivative bound `B` and a slope `alpha`
//! with `|alpha| > B`, the ramp sum `g(t) = alpha*t + f(t)` is strictly
//! monotone. The transform maps `f` to the amplitude-time function
//!
//! ```text
//! h(u) = g^{-1}(u) - u/alpha,
//! ```
//!
//! which satisfies the implicit relations
//!
//! ```text
//! h(u) = -(1/alpha) f(h(u) + u/alpha)      and      f(t) = -alpha h(f(t) + alpha t).
//! ```
//!
//! `h` at a point is evaluated by the contractive fixed-point iteration
//! `x <- f(u/alpha - x/alpha)` (contraction factor `B/|alpha|`), equivalent
//! to inverting `g` at `u`. The inverse transform recovers `f` from `h` by
//! inverting the monotone map `G(u) = u/alpha + h(u) = g^{-1}(u)`; the
//! analogous fixed-point iteration in that direction only contracts when
//! `|alpha| > 2B`, so the implementation uses bracketed Newton/bisection on
//! the tabulated `G`, which converges for every admissible slope and finds
//! the same fixed point.
//!
//! `h` is `|alpha|*T`-periodic and is represented by samples on a uniform
//! grid over one period plus its trigonometric interpolant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::PeriodicInterpolator;
use crate::grid::UniformGrid;
use crate::signal::BandlimitedSignal;
use crate::{DEFAULT_MAX_ITER, DEFAULT_TOL};

// ─── Options and reports ────────────────────────────────────────────────────

/// Options for the pointwise solves in [`RampTransform::to_amplitude_time`]
/// and [`recover_signal`].
#[derive(Debug, Clone)]
pub struct FixedPointOptions {
    /// Residual tolerance in seconds.
    pub tol: f64,
    /// Iteration budget per point.
    pub max_iter: usize,
    /// Seed each grid point's iteration from the previous point's solution.
    /// Disable to measure the iteration's cold-start contraction behaviour.
    pub warm_start: bool,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, warm_start: true }
    }
}

impl FixedPointOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Convergence diagnostics for a grid sweep of the fixed-point iteration.
#[derive(Debug, Clone, Serialize)]
pub struct IterationReport {
    /// Largest per-point iteration count.
    pub iterations_used: usize,
    /// Upper bound on the worst per-point residual, in seconds.
    pub final_residual: f64,
    /// 99th percentile over grid points of the measured per-iteration
    /// contraction ratio (successive-difference ratios above the noise
    /// floor). Bounded by `deriv_bound/|alpha|` in exact arithmetic.
    pub contraction_ratio_estimate: f64,
}

// ─── Amplitude-time function ────────────────────────────────────────────────

/// Samples of `h(u)` on a uniform grid over one period `|alpha|*T`, with the
/// trigonometric interpolant used for evaluation between grid points.
#[derive(Debug, Clone)]
pub struct AmplitudeTimeFunction {
    grid: UniformGrid,
    values: Vec<f64>,
    slope: f64,
    period_u: f64,
    interp: PeriodicInterpolator,
}

impl AmplitudeTimeFunction {
    pub fn new(grid: UniformGrid, values: Vec<f64>, slope: f64, period_t: f64) -> Result<Self> {
        if !slope.is_finite() || slope == 0.0 {
            return Err(Error::InvalidParameter(format!("slope must be finite nonzero, got {slope}")));
        }
        if values.len() != grid.count {
            return Err(Error::InvalidParameter(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.count
            )));
        }
        let period_u = (slope * period_t).abs();
        if (grid.span() - period_u).abs() > 1e-9 * period_u {
            return Err(Error::InvalidParameter(format!(
                "grid span {} does not cover one period {period_u}",
                grid.span()
            )));
        }
        let interp = PeriodicInterpolator::from_samples(&values, period_u, grid.start)?;
        Ok(Self { grid, values, slope, period_u, interp })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn period_u(&self) -> f64 {
        self.period_u
    }

    /// Signal period `T = period_U / |alpha|`.
    pub fn period_t(&self) -> f64 {
        self.period_u / self.slope.abs()
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.interp.eval(u)
    }

    pub fn eval_deriv(&self, u: f64) -> f64 {
        self.interp.eval_deriv(u)
    }

    pub fn interpolator(&self) -> &PeriodicInterpolator {
        &self.interp
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = AtfJson {
            period_u: self.period_u,
            alpha: self.slope,
            grid: self.grid.clone(),
            values: self.values.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AtfJson = serde_json::from_str(text)?;
        let period_t = doc.period_u / doc.alpha.abs();
        Self::new(doc.grid, doc.values, doc.alpha, period_t)
    }
}

#[derive(Serialize, Deserialize)]
struct AtfJson {
    #[serde(rename = "period_U")]
    period_u: f64,
    alpha: f64,
    grid: UniformGrid,
    values: Vec<f64>,
}

// ─── The transform ──────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampTransform {
    slope: f64,
}

impl RampTransform {
    pub fn new(slope: f64) -> Result<Self> {
        if !slope.is_finite() || slope == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ramp slope must be finite and nonzero, got {slope}"
            )));
        }
        Ok(Self { slope })
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    fn require_dominates(&self, f: &BandlimitedSignal) -> Result<()> {
        if self.slope.abs() <= f.deriv_bound() {
            return Err(Error::SlopeTooSmall {
                slope: self.slope,
                deriv_bound: f.deriv_bound(),
            });
        }
        Ok(())
    }

    /// `g(t) = alpha*t + f(t)`.
    pub fn forward(&self, f: &BandlimitedSignal, t: f64) -> f64 {
        self.slope * t + f.eval(t)
    }

    /// Solve `g(t) = u` with `|g(t) - u| <= |alpha|*tol`. The root is
    /// bracketed by `[(u-A)/alpha, (u+A)/alpha]` since `|f| <= A`.
    pub fn invert(
        &self,
        f: &BandlimitedSignal,
        u: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<f64> {
        self.require_dominates(f)?;
        let a = f.amp_bound();
        let lo = (u - a) / self.slope;
        let hi = (u + a) / self.slope;
        let (t, _) = monotone_root(
            &|t| self.slope * t + f.eval(t) - u,
            &|t| self.slope + f.eval_derivative(t),
            lo.min(hi),
            lo.max(hi),
            None,
            self.slope.abs() * tol,
            max_iter,
        )?;
        Ok(t)
    }

    /// Evaluate `h` on `u_grid` by the fixed-point iteration, sweeping the
    /// grid in order (warm-started from the previous point unless disabled).
    pub fn to_amplitude_time(
        &self,
        f: &BandlimitedSignal,
        u_grid: &UniformGrid,
        opts: &FixedPointOptions,
    ) -> Result<(AmplitudeTimeFunction, IterationReport)> {
        self.require_dominates(f)?;
        let (values, report) =
            picard_sweep(&|t| f.eval(t), self.slope, u_grid, opts, 1e-9 * f.amp_bound())?;
        let atf = AmplitudeTimeFunction::new(u_grid.clone(), values, self.slope, f.period())?;
        Ok((atf, report))
    }
}

/// Core fixed-point sweep behind [`RampTransform::to_amplitude_time`]: for
/// each `u` iterate `x <- eval(u/alpha - x/alpha)` to its fixed point and
/// record `h(u) = -x/alpha`. `ratio_floor` is the change magnitude below
/// which roundoff makes contraction-ratio measurements meaningless. The
/// caller guarantees (or, for non-certified iterates, hopes) that `eval` has
/// Lipschitz constant below `|alpha|`; a non-contracting `eval` surfaces as
/// `NoConvergence`.
pub(crate) fn picard_sweep(
    eval: &impl Fn(f64) -> f64,
    alpha: f64,
    u_grid: &UniformGrid,
    opts: &FixedPointOptions,
    ratio_floor: f64,
) -> Result<(Vec<f64>, IterationReport)> {
    let abs_alpha = alpha.abs();
    let change_tol = opts.tol * abs_alpha;

    let mut values = Vec::with_capacity(u_grid.count);
    let mut point_ratios: Vec<f64> = Vec::with_capacity(u_grid.count);
    let mut max_iters_used = 0usize;
    let mut max_residual = 0.0f64;
    let mut warm: Option<f64> = None;

    for u in u_grid.iter() {
        let w = u / alpha;
        let mut x = warm.unwrap_or_else(|| eval(w));
        let mut prev_change = f64::NAN;
        let mut max_ratio = 0.0f64;
        let mut converged = false;
        let mut change = f64::NAN;
        for n in 1..=opts.max_iter {
            let next = eval(w - x / alpha);
            change = (next - x).abs();
            if prev_change.is_finite() && prev_change > ratio_floor && change > ratio_floor {
                max_ratio = max_ratio.max(change / prev_change);
            }
            prev_change = change;
            x = next;
            if change < change_tol {
                max_iters_used = max_iters_used.max(n);
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                max_iter: opts.max_iter,
                residual: change / abs_alpha,
            });
        }
        max_residual = max_residual.max(change / abs_alpha);
        if max_ratio > 0.0 {
            point_ratios.push(max_ratio);
        }
        values.push(-x / alpha);
        if opts.warm_start {
            warm = Some(x);
        }
    }

    let report = IterationReport {
        iterations_used: max_iters_used,
        final_residual: max_residual,
        contraction_ratio_estimate: percentile(&mut point_ratios, 0.99),
    };
    Ok((values, report))
}

/// Recover signal samples from an amplitude-time function: for each `t` solve
/// `G(u) = u/alpha + h(u) = t` on the tabulated monotone `G` (binary-search
/// bracket, then Newton with the interpolant), and return `f(t) = u - alpha*t`.
/// The residual satisfies `|f(t) + alpha*h(f(t) + alpha*t)| <= |alpha|*tol`.
pub fn recover_signal(
    h: &AmplitudeTimeFunction,
    t_grid: &UniformGrid,
    opts: &FixedPointOptions,
) -> Result<Vec<f64>> {
    let alpha = h.slope();
    if alpha < 0.0 {
        // Mirror to the positive-slope problem: with ab = -a,
        // hb(v) = h(-v) is the amplitude-time function of fb = -f.
        let grid = h.grid();
        if grid.start != 0.0 {
            return Err(Error::InvalidParameter(
                "negative-slope recovery needs a grid starting at 0".into(),
            ));
        }
        let n = grid.count;
        let mirrored: Vec<f64> =
            (0..n).map(|j| h.values()[if j == 0 { 0 } else { n - j }]).collect();
        let hb = AmplitudeTimeFunction::new(grid.clone(), mirrored, -alpha, h.period_t())?;
        let fb = recover_signal(&hb, t_grid, opts)?;
        return Ok(fb.into_iter().map(|v| -v).collect());
    }

    let period_t = h.period_t();
    let period_u = h.period_u();
    let n = h.grid().count;
    // G tabulated on the grid; strict monotonicity is required for inversion.
    let g_tab: Vec<f64> =
        (0..n).map(|j| h.grid().point(j) / alpha + h.values()[j]).collect();
    for j in 1..n {
        if g_tab[j] <= g_tab[j - 1] {
            return Err(Error::InversionFailure(format!(
                "u/alpha + h(u) is not increasing between grid points {} and {}",
                j - 1,
                j
            )));
        }
    }
    let wrap = g_tab[0] + period_t;
    if wrap <= g_tab[n - 1] {
        return Err(Error::InversionFailure(
            "u/alpha + h(u) fails to increase across the period wrap".into(),
        ));
    }

    // Evaluating between grid points only needs coefficients above the
    // roundoff floor of the tabulated values.
    let coeff_scale = h.interpolator().coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let interp = h.interpolator().truncated(1e-16 * coeff_scale);
    let resid_tol = opts.tol; // |G(u) - t| <= tol  <=>  |alpha|-scaled residual on f
    let inv_alpha = 1.0 / alpha;

    let mut out = Vec::with_capacity(t_grid.count);
    for t in t_grid.iter() {
        // reduce t into the principal branch [G(u_0), G(u_0) + T)
        let shift = ((t - g_tab[0]) / period_t).floor();
        let t_red = t - shift * period_t;
        // largest j with g_tab[j] <= t_red
        let j = match g_tab.partition_point(|&g| g <= t_red) {
            0 => 0, // t_red == g_tab[0] up to roundoff
            p => p - 1,
        };
        let (u_lo, u_hi, g_hi) = if j + 1 < n {
            (h.grid().point(j), h.grid().point(j + 1), g_tab[j + 1])
        } else {
            (h.grid().point(j), h.grid().start + period_u, wrap)
        };
        // linear inverse interpolation seeds Newton
        let frac = ((t_red - g_tab[j]) / (g_hi - g_tab[j])).clamp(0.0, 1.0);
        let guess = u_lo + frac * (u_hi - u_lo);
        let (u_root, _) = monotone_root(
            &|u| u * inv_alpha + interp.eval(u) - t_red,
            &|u| inv_alpha + interp.eval_deriv(u),
            u_lo,
            u_hi,
            Some(guess),
            resid_tol,
            opts.max_iter,
        )?;
        let u_star = u_root + shift * period_u;
        out.push(u_star - alpha * t);
    }
    Ok(out)
}

// ─── Root finding ───────────────────────────────────────────────────────────

/// Safeguarded Newton on a strictly monotone function over `[lo, hi]`:
/// bisection keeps a valid bracket, Newton accelerates inside it. Stops when
/// `|value| <= resid_tol`.
pub(crate) fn monotone_root(
    value: &impl Fn(f64) -> f64,
    deriv: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    guess: Option<f64>,
    resid_tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    debug_assert!(lo <= hi);
    let mut a = lo;
    let mut b = hi;
    let fa = value(a);
    if fa.abs() <= resid_tol {
        return Ok((a, 0));
    }
    if a == b {
        return Err(Error::NoConvergence { max_iter: 0, residual: fa.abs() });
    }
    let increasing = fa < 0.0;
    let mut x = guess.map(|g| g.clamp(a, b)).unwrap_or(0.5 * (a + b));
    let mut fx = value(x);
    for n in 1..=max_iter {
        if fx.abs() <= resid_tol {
            return Ok((x, n));
        }
        if (fx < 0.0) == increasing {
            a = x;
        } else {
            b = x;
        }
        let d = deriv(x);
        let newton = x - fx / d;
        x = if d != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        fx = value(x);
    }
    if fx.abs() <= resid_tol {
        return Ok((x, max_iter));
    }
    Err(Error::NoConvergence { max_iter, residual: fx.abs() })
}

// ─── Norms ──────────────────────────────────────────────────────────────────

/// Periodic `L^p` norm from uniform samples (rectangle rule), `p >= 1`;
/// `p = infinity` takes the grid maximum of `|x|`.
pub fn lp_norm(values: &[f64], step: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    if values.is_empty() {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let sum: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
    Ok((step * sum).powf(1.0 / p))
}

// ─── Spectral decay scale and grid sizing ───────────────────────────────────

/// Guaranteed spectral decay scale of `h` (in u-axis units) for a slope
/// `|alpha|`, a derivative (Lipschitz) bound `lip` of the signal, and band
/// `sigma` rad/s:
///
/// ```text
/// a = (|alpha|/sigma) ln(|alpha|/lip) - (|alpha| - lip)/sigma
/// ```
///
/// With the Bernstein bound `lip = A*sigma` this is the classical envelope
/// exponent; with a certified tighter `lip` it is still a valid bound (the
/// chain `|f^(n)| <= lip*sigma^(n-1)` controls the same series).
pub fn decay_scale(slope_abs: f64, lip: f64, sigma: f64) -> Result<f64> {
    if !(slope_abs > 0.0) || !(sigma > 0.0) || !(lip > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay scale needs positive slope/lip/sigma, got {slope_abs}, {lip}, {sigma}"
        )));
    }
    if slope_abs <= lip {
        return Err(Error::SlopeTooSmall { slope: slope_abs, deriv_bound: lip });
    }
    Ok((slope_abs / sigma) * (slope_abs / lip).ln() - (slope_abs - lip) / sigma)
}

/// Suggested u-grid length so that trigonometric interpolation of `h` from
/// the grid has sup error below `target_sup_err` seconds. Heuristic sizing
/// from the guaranteed decay scale; the pointwise residual checks remain the
/// source of truth.
pub fn suggested_u_grid_len(
    f: &BandlimitedSignal,
    slope: f64,
    target_sup_err: f64,
) -> usize {
    const MIN: usize = 256;
    const MAX: usize = 1 << 18;
    let b = f.deriv_bound();
    if b == 0.0 {
        return MIN;
    }
    let abs_alpha = slope.abs();
    let period_u = abs_alpha * f.period();
    let Ok(a) = decay_scale(abs_alpha, b, f.bandwidth()) else {
        return MAX;
    };
    let kappa = 2.0 * std::f64::consts::PI * a / period_u;
    let coeff_env = f.amp_bound() / abs_alpha;
    let eps = target_sup_err.max(1e-15);
    // tail(M) ~ 4*env*e^{-kappa(M-K)}/(1-e^{-kappa}) <= eps, anchored past
    // the source band edge with a safety factor
    let k_edge = f.harmonics() as f64;
    let m = 2.0 * k_edge
        + (4.0 * coeff_env / ((1.0 - (-kappa).exp()).max(1e-300) * eps)).ln().max(0.0) / kappa;
    let n = (2.3 * m).ceil();
    if !n.is_finite() {
        return MAX;
    }
    (n as usize).next_power_of_two().clamp(MIN, MAX)
}

fn percentile(values: &mut [f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let rank = ((values.len() as f64) * q).ceil() as usize;
    values[rank.clamp(1, values.len()) - 1]
}
