//! Uniform sample grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid `start + i*step` for `i = 0..count`.
///
/// Grids covering exactly one period of a periodic function satisfy
/// `step * count == period`; the right endpoint is excluded so each point is
/// sampled once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive and finite, got {step}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        if !start.is_finite() {
            return Err(Error::InvalidParameter(format!("grid start {start} not finite")));
        }
        Ok(Self { start, step, count })
    }

    /// Grid of `count` points covering `[0, period)`.
    pub fn over_period(period: f64, count: usize) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        Self::new(0.0, period / count as f64, count)
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Total span `step * count`; equals the period for periodic grids.
    pub fn span(&self) -> f64 {
        self.step * self.count as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }
}
