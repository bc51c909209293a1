//! Amplitude sampling of periodic bandlimited signals.
//!
//! A signal `f` riding on a ramp, `g(t) = alpha*t + f(t)`, is strictly
//! monotone whenever `|alpha|` exceeds the Lipschitz bound of `f`. Recording
//! the instants `t_n` at which `g` crosses the levels `n*delta` ("delta-ramp"
//! time encoding) is then an invertible operation, and the crossing times are
//! equivalent to uniform samples of the amplitude-time function
//! `h(u) = g^{-1}(u) - u/alpha`, taken at `u = n*delta`.
//!
//! The crate provides:
//!
//! * [`signal`]: a periodic bandlimited signal model with certified
//!   amplitude/derivative bounds and a seeded noise synthesizer.
//! * [`ramp`]: the ramp transform `M_alpha: f -> h`, its inverse, the
//!   contractive fixed-point iteration that evaluates it, and `L^p` norms.
//! * [`encoder`]: the delta-ramp encoder producing crossing-time sequences,
//!   with gap-bound and sampling-density diagnostics.
//! * [`reconstruction`]: bandlimited interpolation of `h` from its uniform
//!   samples, the one-shot decoder (BIA), the iterative decoder (IASR), and
//!   a Voronoi/frame-iteration baseline, all reporting SER per iteration.
//! * [`spectral`]: spectral decay diagnostics for `h` (decay-scale bound,
//!   envelope fits, non-bandlimitedness check).
//! * [`experiment`]: deterministic multi-seed experiment sweeps with CSV and
//!   JSON emission, shared by the `ampsamp` command-line tool.
//!
//! Internally every periodic function is represented by samples on a uniform
//! grid over one period together with its trigonometric (Dirichlet)
//! interpolant, so evaluation between grid points is spectrally accurate.

pub mod encoder;
pub mod error;
pub mod experiment;
pub mod fourier;
pub mod grid;
pub mod ramp;
pub mod reconstruction;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::UniformGrid;
pub use signal::BandlimitedSignal;

/// Default residual tolerance, in seconds, for root finds and fixed-point
/// iterations.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Default iteration budget for root finds and fixed-point iterations.
pub const DEFAULT_MAX_ITER: usize = 200;
