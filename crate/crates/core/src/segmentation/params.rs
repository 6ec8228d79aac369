use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tunables for the two-cycle evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar"))]
pub struct SegmentationParams<T> {
    /// Interior fidelity weight.
    pub lambda1: u32,
    /// Exterior fidelity weight.
    pub lambda2: u32,
    /// Weights of the Y', U, V planes in the combined field.
    pub channel_weights: [T; 3],
    /// Data-cycle passes per evolution.
    pub n_a: usize,
    /// Smoothing-cycle passes per evolution.
    pub n_s: usize,
    pub max_evolutions: usize,
    /// Initial ellipse size relative to the frame.
    pub init_fraction: f64,
    pub smooth_kernel_size: usize,
    pub smooth_kernel_sigma: T,
}

impl<T: Scalar> Default for SegmentationParams<T> {
    fn default() -> Self {
        Self {
            lambda1: 2,
            lambda2: 1,
            channel_weights: [T::one(); 3],
            n_a: 40,
            n_s: 2,
            max_evolutions: 400,
            init_fraction: 0.65,
            smooth_kernel_size: 5,
            smooth_kernel_sigma: T::one(),
        }
    }
}

impl<T: Scalar> SegmentationParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.lambda1 < 1 || self.lambda2 < 1 {
            return bad(format!("lambdas must be >= 1, got ({}, {})", self.lambda1, self.lambda2));
        }
        if self.channel_weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return bad("channel weights must be finite and nonnegative".into());
        }
        if !self.channel_weights.iter().any(|w| *w > T::zero()) {
            return bad("at least one channel weight must be positive".into());
        }
        if self.n_a < 1 {
            return bad("n_a must be >= 1".into());
        }
        if self.max_evolutions < 1 {
            return bad("max_evolutions must be >= 1".into());
        }
        if !(self.init_fraction > 0.0 && self.init_fraction <= 1.0) {
            return bad(format!("init_fraction must be in (0, 1], got {}", self.init_fraction));
        }
        Ok(())
    }
}
