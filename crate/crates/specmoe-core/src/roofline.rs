//! Hardware ridge-point arithmetic and the piecewise execution-time growth
//! curve.
//!
//! The growth curve `G(t; transition, base)` models how one forward pass
//! stretches as the token count `t` grows: exponential-in-`t` while the pass
//! stays memory-bound (`base^t`, a gentle rise for `base` near 1), then
//! linear once it turns compute-bound, with the two branches joined with
//! first-order continuity at `transition`.

use crate::error::{Error, Result};
use alloc::string::String;
// Backs float math in no_std builds; std's inherent methods shadow it otherwise.
#[allow(unused_imports)]
use num_traits::Float;

/// Transition point above which [`GrowthCurve::eval`] goes through log-space
/// to avoid overflowing the `base^transition` intermediate.
pub const LOG_SPACE_TRANSITION_CAP: f64 = 1e4;

/// Peak compute and bandwidth of the serving hardware.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct HardwareSpec {
    /// Free-text name of the platform.
    #[cfg_attr(feature = "serde", serde(default))]
    pub label: String,
    /// Peak compute throughput, operations per second.
    pub peak_compute: f64,
    /// Peak memory bandwidth, bytes per second.
    pub peak_bandwidth: f64,
    /// Number of GPUs; informational only.
    #[cfg_attr(feature = "serde", serde(default = "default_gpu_count"))]
    pub gpu_count: u32,
}

#[cfg(feature = "serde")]
fn default_gpu_count() -> u32 {
    1
}

impl HardwareSpec {
    pub fn new(label: impl Into<String>, peak_compute: f64, peak_bandwidth: f64, gpu_count: u32) -> Result<Self> {
        let hw = HardwareSpec {
            label: label.into(),
            peak_compute,
            peak_bandwidth,
            gpu_count,
        };
        hw.validate()?;
        Ok(hw)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_compute > 0.0) || !self.peak_compute.is_finite() {
            return Err(Error::InvalidHardware {
                reason: "peak_compute must be positive and finite",
            });
        }
        if !(self.peak_bandwidth > 0.0) || !self.peak_bandwidth.is_finite() {
            return Err(Error::InvalidHardware {
                reason: "peak_bandwidth must be positive and finite",
            });
        }
        if self.gpu_count == 0 {
            return Err(Error::InvalidHardware {
                reason: "gpu_count must be at least 1",
            });
        }
        Ok(())
    }

    /// Ridge point: peak compute over peak bandwidth, operations per byte.
    pub fn ridge_point(&self) -> f64 {
        self.peak_compute / self.peak_bandwidth
    }
}

/// Parameter volumes used to derive loading-time bounds for calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct VolumeSpec {
    /// Parameter count of the target model outside the expert FFNs.
    pub dense_param_count: f64,
    /// Parameter count of a single expert.
    pub expert_param_count: f64,
    /// Parameter count of the draft model.
    pub draft_param_count: f64,
    /// Bits per parameter.
    pub bitwidth: u32,
}

impl VolumeSpec {
    pub fn new(dense_param_count: f64, expert_param_count: f64, draft_param_count: f64, bitwidth: u32) -> Result<Self> {
        let vol = VolumeSpec {
            dense_param_count,
            expert_param_count,
            draft_param_count,
            bitwidth,
        };
        vol.validate()?;
        Ok(vol)
    }

    pub fn validate(&self) -> Result<()> {
        for (value, reason) in [
            (self.dense_param_count, "dense_param_count must be positive"),
            (self.expert_param_count, "expert_param_count must be positive"),
            (self.draft_param_count, "draft_param_count must be positive"),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidVolume { reason });
            }
        }
        if self.bitwidth == 0 {
            return Err(Error::InvalidVolume {
                reason: "bitwidth must be positive",
            });
        }
        Ok(())
    }

    pub fn bytes_per_param(&self) -> f64 {
        f64::from(self.bitwidth) / 8.0
    }
}

/// Which side of the ridge point a workload sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    /// Arithmetic intensity below the ridge point.
    MemoryBound,
    /// Arithmetic intensity above the ridge point.
    ComputeBound,
    /// Exactly at the ridge point.
    Balanced,
}

/// Arithmetic intensity: compute operations per byte accessed.
pub fn arithmetic_intensity(compute_ops: f64, bytes_accessed: f64) -> Result<f64> {
    if !(bytes_accessed > 0.0) {
        return Err(Error::ZeroBytesAccessed);
    }
    if !(compute_ops >= 0.0) || !compute_ops.is_finite() {
        return Err(Error::InvalidHardware {
            reason: "compute_ops must be nonnegative and finite",
        });
    }
    Ok(compute_ops / bytes_accessed)
}

/// Classifies a workload against a hardware ridge point.
pub fn classify(intensity: f64, ridge_point: f64) -> Boundedness {
    if intensity < ridge_point {
        Boundedness::MemoryBound
    } else if intensity > ridge_point {
        Boundedness::ComputeBound
    } else {
        Boundedness::Balanced
    }
}

/// Piecewise execution-time growth curve with a C1 transition.
///
/// `eval(t)` returns `base^t` for `t <= transition` and
/// `base^transition * (1 + ln(base) * (t - transition))` for `t > transition`.
/// Both value and first derivative are continuous at the transition; the
/// curve is strictly increasing, convex below the transition and linear
/// above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCurve {
    transition: f64,
    base: f64,
    log_space_cap: f64,
}

impl GrowthCurve {
    pub fn new(transition: f64, base: f64) -> Result<Self> {
        if !(transition > 0.0) || !transition.is_finite() {
            return Err(Error::InvalidGrowthCurve {
                reason: "transition must be positive and finite",
            });
        }
        if !(base > 1.0) || !base.is_finite() {
            return Err(Error::InvalidGrowthCurve {
                reason: "base must exceed 1",
            });
        }
        Ok(GrowthCurve {
            transition,
            base,
            log_space_cap: LOG_SPACE_TRANSITION_CAP,
        })
    }

    /// Overrides the transition magnitude above which evaluation switches to
    /// log-space.
    pub fn with_log_space_cap(mut self, cap: f64) -> Self {
        self.log_space_cap = cap;
        self
    }

    pub fn transition(&self) -> f64 {
        self.transition
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Evaluates the curve at a real-valued token count `t >= 0`.
    ///
    /// Token counts are real because the model evaluates the curve at
    /// fractional per-expert loads. Results too large for `f64` saturate at
    /// `f64::MAX`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_point(t)?;
        if self.transition > self.log_space_cap {
            // Extreme fitted transitions: compute ln G and exponentiate once,
            // never materializing base^transition on its own.
            let ln = self.ln_eval_inner(t);
            return Ok(if ln > f64::MAX.ln() { f64::MAX } else { ln.exp() });
        }
        let ln_base = self.base.ln();
        if t <= self.transition {
            Ok((t * ln_base).exp())
        } else {
            let at_transition = (self.transition * ln_base).exp();
            Ok(at_transition * (1.0 + ln_base * (t - self.transition)))
        }
    }

    /// Natural log of the curve value, usable even where the value itself
    /// overflows `f64`.
    pub fn ln_eval(&self, t: f64) -> Result<f64> {
        self.check_point(t)?;
        Ok(self.ln_eval_inner(t))
    }

    fn ln_eval_inner(&self, t: f64) -> f64 {
        let ln_base = self.base.ln();
        if t <= self.transition {
            t * ln_base
        } else {
            self.transition * ln_base + (ln_base * (t - self.transition)).ln_1p()
        }
    }

    fn check_point(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidGrowthCurve {
                reason: "t must be nonnegative and finite",
            });
        }
        Ok(())
    }
}

/// One-shot evaluation of the growth curve.
pub fn growth_curve(t: f64, transition: f64, base: f64) -> Result<f64> {
    GrowthCurve::new(transition, base)?.eval(t)
}
