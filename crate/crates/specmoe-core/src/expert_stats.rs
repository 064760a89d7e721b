//! Closed-form statistics of expert activation and per-expert load for a
//! uniformly-routed MoE.
//!
//! Every token independently activates `K` distinct experts chosen uniformly
//! from `E`, so a given expert is missed by one token with probability
//! `(E-K)/E` and by `t` tokens with probability `((E-K)/E)^t`. The expected
//! number of distinct activated experts and the mean tokens-per-expert load
//! follow in closed form. These are the quantities that drive the MoE
//! forward-time model in [`crate::cost_model`].

use crate::error::{Error, Result};
// Backs float math in no_std builds; std's inherent methods shadow it otherwise.
#[allow(unused_imports)]
use num_traits::Float;

/// Default saturation ratio used to declare "almost full" expert activation.
pub const DEFAULT_SATURATION: f64 = 0.95;

/// Expert-count architecture of an MoE model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MoEArch {
    /// Total number of experts per MoE layer (`E`).
    pub total_experts: u32,
    /// Experts activated per token (`K`); `K = E` is the dense special case.
    pub active_per_token: u32,
}

impl MoEArch {
    pub fn new(total_experts: u32, active_per_token: u32) -> Result<Self> {
        let arch = MoEArch {
            total_experts,
            active_per_token,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.active_per_token == 0
            || self.total_experts == 0
            || self.active_per_token > self.total_experts
        {
            return Err(Error::InvalidArch {
                total_experts: self.total_experts,
                active_per_token: self.active_per_token,
            });
        }
        Ok(())
    }

    /// Sparsity `rho = K/E`, in `(0, 1]`.
    pub fn sparsity(&self) -> f64 {
        f64::from(self.active_per_token) / f64::from(self.total_experts)
    }

    pub fn is_dense(&self) -> bool {
        self.active_per_token == self.total_experts
    }
}

/// A saturation query: how many tokens, and what fraction of experts counts
/// as "almost all of them".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationQuery {
    pub token_count: u64,
    pub saturation_ratio: f64,
}

impl ActivationQuery {
    pub fn new(token_count: u64, saturation_ratio: f64) -> Result<Self> {
        if token_count == 0 {
            return Err(Error::ZeroTokenCount);
        }
        check_saturation(saturation_ratio)?;
        Ok(ActivationQuery {
            token_count,
            saturation_ratio,
        })
    }
}

impl Default for ActivationQuery {
    fn default() -> Self {
        ActivationQuery {
            token_count: 1,
            saturation_ratio: DEFAULT_SATURATION,
        }
    }
}

fn check_saturation(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidSaturation { value: tau });
    }
    Ok(())
}

fn check_sparsity(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidSparsity { value: rho });
    }
    Ok(())
}

/// `(1 - rho)^t` evaluated as `exp(t * ln(1 - rho))` so that token counts up
/// to 1e6 keep full precision instead of underflowing through repeated
/// multiplication.
fn miss_probability(rho: f64, tokens: f64) -> f64 {
    (tokens * (-rho).ln_1p()).exp()
}

/// Probability that a fixed expert is activated by at least one of `t` tokens.
///
/// Returns `1 - ((E-K)/E)^t`; monotone nondecreasing in `t`.
pub fn activation_probability(arch: &MoEArch, tokens: u64) -> Result<f64> {
    arch.validate()?;
    if tokens == 0 {
        return Err(Error::ZeroTokenCount);
    }
    // One token activates exactly K of E experts.
    if tokens == 1 {
        return Ok(arch.sparsity());
    }
    Ok(1.0 - miss_probability(arch.sparsity(), tokens as f64))
}

/// Expected number of distinct experts activated by `t` tokens:
/// `N(t) = E * (1 - ((E-K)/E)^t)`.
///
/// `N(1) = K` exactly; `N(t)` approaches `E` as `t` grows.
pub fn expected_activated_experts(arch: &MoEArch, tokens: u64) -> Result<f64> {
    arch.validate()?;
    if tokens == 0 {
        return Err(Error::ZeroTokenCount);
    }
    if tokens == 1 {
        return Ok(f64::from(arch.active_per_token));
    }
    Ok(f64::from(arch.total_experts) * (1.0 - miss_probability(arch.sparsity(), tokens as f64)))
}

/// Smallest token count `t` with `N(t) >= tau * E`, i.e.
/// `ceil(log_{1-rho}(1 - tau))`.
///
/// Dense models (`K = E`) activate everything with one token, so the
/// threshold is 1 by definition there.
pub fn full_activation_threshold(arch: &MoEArch, saturation_ratio: f64) -> Result<u64> {
    arch.validate()?;
    check_saturation(saturation_ratio)?;
    if arch.is_dense() {
        return Ok(1);
    }
    let tau = saturation_ratio;
    let total = f64::from(arch.total_experts);
    // N(t) >= tau*E, evaluated exactly as expected_activated_experts does so
    // the result agrees with an exhaustive scan of that function.
    let saturated = |t: u64| -> f64 {
        if t == 1 {
            f64::from(arch.active_per_token)
        } else {
            total * (1.0 - miss_probability(arch.sparsity(), t as f64))
        }
    };
    threshold_from_seed(arch.sparsity(), tau, |t| saturated(t) >= tau * total)
}

/// Sparsity-parameterized form of [`full_activation_threshold`] for
/// architectures given only by `rho` in `(0, 1)`.
pub fn threshold_for_sparsity(rho: f64, saturation_ratio: f64) -> Result<u64> {
    check_sparsity(rho)?;
    check_saturation(saturation_ratio)?;
    let tau = saturation_ratio;
    threshold_from_seed(rho, tau, |t| miss_probability(rho, t as f64) <= 1.0 - tau)
}

/// Seeds the search with the closed-form ceiling, then walks to the exact
/// smallest token count satisfying `saturated`, absorbing any off-by-one from
/// floating-point rounding of the logarithm ratio.
fn threshold_from_seed(rho: f64, tau: f64, saturated: impl Fn(u64) -> bool) -> Result<u64> {
    let seed = ((1.0 - tau).ln() / (-rho).ln_1p()).ceil();
    let mut t = if seed.is_finite() && seed >= 1.0 {
        seed as u64
    } else {
        1
    };
    while t > 1 && saturated(t - 1) {
        t -= 1;
    }
    while !saturated(t) {
        t += 1;
    }
    Ok(t)
}

/// Mean tokens processed per activated expert:
/// `T_exp(t; rho) = rho * t / (1 - (1 - rho)^t)`, in `[1, t]`.
pub fn mean_expert_load(arch: &MoEArch, tokens: u64) -> Result<f64> {
    arch.validate()?;
    if tokens == 0 {
        return Err(Error::ZeroTokenCount);
    }
    if arch.is_dense() {
        // Every expert sees every token.
        return Ok(tokens as f64);
    }
    mean_load_for_sparsity(arch.sparsity(), tokens)
}

/// Sparsity-parameterized form of [`mean_expert_load`] for `rho` in `(0, 1)`.
pub fn mean_load_for_sparsity(rho: f64, tokens: u64) -> Result<f64> {
    check_sparsity(rho)?;
    if tokens == 0 {
        return Err(Error::ZeroTokenCount);
    }
    // A single token gives each activated expert exactly one token.
    if tokens == 1 {
        return Ok(1.0);
    }
    let t = tokens as f64;
    Ok(rho * t / (1.0 - miss_probability(rho, t)))
}

/// `F(rho; T) = (1 - rho)^(T-1) * (rho*T + 1 - rho)`.
///
/// `F < 1` for all `rho` in `(0, 1)` and `T > 1`, which certifies that the
/// mean expert load strictly decreases as the model gets sparser; `F` itself
/// is strictly decreasing in `rho` and tends to 1 as `rho` tends to 0.
pub fn load_gradient_bound(rho: f64, tokens: u64) -> Result<f64> {
    check_sparsity(rho)?;
    if tokens <= 1 {
        return Err(Error::TokenCountTooSmall {
            value: tokens,
            min: 2,
        });
    }
    let t = tokens as f64;
    Ok(miss_probability(rho, t - 1.0) * (rho * t + 1.0 - rho))
}
