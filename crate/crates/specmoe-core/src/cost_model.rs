//! Forward-time decomposition and speculative-decoding speedup model.
//!
//! A target-model forward pass over `t` tokens is modeled as four additive
//! costs: a fixed loading term, a token-count growth term, an expert-loading
//! term proportional to the expected number of activated experts, and a
//! per-expert-load growth term. Verification is the same expression at
//! `batch * draft_length` tokens; the draft model sees only the fixed and
//! token-growth terms; rejection sampling is affine in the batch size.
//!
//! The speedup of one speculation round against plain autoregressive
//! decoding is the expected generated tokens times the ratio of the
//! autoregressive forward time to the round's total time. Every operation
//! returns its full term-by-term breakdown so end-to-end numbers stay
//! explainable.

use crate::error::{Error, Result};
use crate::expert_stats::{expected_activated_experts, MoEArch};
use crate::roofline::{GrowthCurve, HardwareSpec};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Lower bound of the ridge-scale parameter.
pub const LAMBDA_MIN: f64 = 0.2;
/// Upper bound of the ridge-scale parameter.
pub const LAMBDA_MAX: f64 = 1.0;
/// Exclusive lower bound of the growth base.
pub const GROWTH_BASE_MIN: f64 = 1.0;
/// Upper bound of the growth base.
pub const GROWTH_BASE_MAX: f64 = 2.0;

/// Number of fitted model parameters.
pub const PARAM_COUNT: usize = 10;

/// The ten fitted parameters of the speedup model.
///
/// All time-like coefficients are in arbitrary-but-consistent units; only
/// ratios of model outputs are meaningful. Scaling all eight time
/// coefficients by a common positive constant leaves every speedup and
/// efficiency output unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CostParams {
    /// Fixed time to load the target model's dense (non-expert) parameters.
    pub bias: f64,
    /// Coefficient of the token-count growth term of the target model.
    pub k1: f64,
    /// Time to load one expert's parameters.
    pub k2: f64,
    /// Coefficient of the per-expert-load growth term.
    pub k3: f64,
    /// Fixed time to load the draft model.
    pub draft_bias: f64,
    /// Coefficient of the draft model's token-count growth term.
    pub draft_k: f64,
    /// Fixed overhead of rejection sampling.
    pub reject_bias: f64,
    /// Per-batch-element cost of rejection sampling.
    pub reject_k: f64,
    /// Fraction of the theoretical ridge point actually achieved, in
    /// [0.2, 1]; the growth curves transition at `lambda * ridge_point`.
    pub lambda: f64,
    /// Base of the execution-time growth curve, in (1, 2].
    #[cfg_attr(feature = "serde", serde(rename = "s"))]
    pub growth_base: f64,
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let coeffs = [
            (self.bias, "bias must be >= 0 and finite"),
            (self.k1, "k1 must be >= 0 and finite"),
            (self.k2, "k2 must be >= 0 and finite"),
            (self.k3, "k3 must be >= 0 and finite"),
            (self.draft_bias, "draft_bias must be >= 0 and finite"),
            (self.draft_k, "draft_k must be >= 0 and finite"),
            (self.reject_bias, "reject_bias must be >= 0 and finite"),
            (self.reject_k, "reject_k must be >= 0 and finite"),
        ];
        for (value, reason) in coeffs {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidCostParams { reason });
            }
        }
        if !(self.lambda >= LAMBDA_MIN && self.lambda <= LAMBDA_MAX) {
            return Err(Error::InvalidCostParams {
                reason: "lambda must lie in [0.2, 1]",
            });
        }
        if !(self.growth_base > GROWTH_BASE_MIN && self.growth_base <= GROWTH_BASE_MAX) {
            return Err(Error::InvalidCostParams {
                reason: "growth base must lie in (1, 2]",
            });
        }
        Ok(())
    }

    /// Parameters in fixed order: bias, k1, k2, k3, draft_bias, draft_k,
    /// reject_bias, reject_k, lambda, growth base.
    pub fn to_array(&self) -> [f64; PARAM_COUNT] {
        [
            self.bias,
            self.k1,
            self.k2,
            self.k3,
            self.draft_bias,
            self.draft_k,
            self.reject_bias,
            self.reject_k,
            self.lambda,
            self.growth_base,
        ]
    }

    /// Inverse of [`CostParams::to_array`]; does not validate.
    pub fn from_array(values: [f64; PARAM_COUNT]) -> Self {
        CostParams {
            bias: values[0],
            k1: values[1],
            k2: values[2],
            k3: values[3],
            draft_bias: values[4],
            draft_k: values[5],
            reject_bias: values[6],
            reject_k: values[7],
            lambda: values[8],
            growth_base: values[9],
        }
    }

    fn curve(&self, hw: &HardwareSpec) -> Result<GrowthCurve> {
        GrowthCurve::new(self.lambda * hw.ridge_point(), self.growth_base)
    }
}

/// Which denominator the speedup ratio uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpeedupVariant {
    /// Denominator `draft + decode + verify + reject`: the form the model is
    /// calibrated with. Selected on the CLI as `alg1`.
    #[default]
    Fitted,
    /// Denominator `gamma * draft + verify + reject`: the literal per-round
    /// wall time with one draft pass per drafted token. Selected on the CLI
    /// as `eq2`.
    PerRound,
}

impl SpeedupVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpeedupVariant::Fitted => "alg1",
            SpeedupVariant::PerRound => "eq2",
        }
    }
}

impl fmt::Display for SpeedupVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpeedupVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg1" => Ok(SpeedupVariant::Fitted),
            "eq2" => Ok(SpeedupVariant::PerRound),
            _ => Err(Error::InvalidCostParams {
                reason: "variant must be `alg1` or `eq2`",
            }),
        }
    }
}

/// One target-model forward pass, term by term.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TargetForward {
    /// Tokens processed by this pass.
    pub tokens: f64,
    /// Expected distinct experts activated (`N`).
    pub activated_experts: f64,
    /// Mean tokens per activated expert (`tokens * K / N`).
    pub expert_load: f64,
    /// Fixed dense-loading term (`bias`).
    pub fixed: f64,
    /// Token-count growth term (`k1 * G(tokens)`).
    pub token_growth: f64,
    /// Expert-loading term (`k2 * N`).
    pub expert_loading: f64,
    /// Per-expert-load growth term (`k3 * G(load)`).
    pub load_growth: f64,
    /// Sum of the four terms.
    pub total: f64,
}

/// One draft-model forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DraftForward {
    pub fixed: f64,
    pub token_growth: f64,
    pub total: f64,
}

/// Full per-round decomposition together with the derived ratios.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpeedupReport {
    pub speedup: f64,
    pub target_efficiency: f64,
    /// Expected tokens generated per round, `sigma * (gamma + 1)`.
    pub tokens_per_round: f64,
    pub ar: TargetForward,
    pub verify: TargetForward,
    pub draft: DraftForward,
    pub reject: f64,
}

/// Result of evaluating the model across a batch-size sweep.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub batch_sizes: Vec<u64>,
    pub speedups: Vec<f64>,
    pub target_efficiencies: Vec<f64>,
    /// Maximum predicted speedup across the sweep.
    pub peak_speedup: f64,
    /// Batch size attaining the peak (first one on ties).
    pub peak_batch: u64,
    /// Maximal contiguous batch interval containing the peak where speedup
    /// stays at or above `peak / sqrt(2)`.
    pub robust_range: (u64, u64),
}

fn check_batch(batch: u64) -> Result<()> {
    if batch == 0 {
        return Err(Error::ZeroBatchSize);
    }
    Ok(())
}

fn check_draft_length(draft_length: u32) -> Result<()> {
    if draft_length == 0 {
        return Err(Error::ZeroDraftLength);
    }
    Ok(())
}

fn check_sigma(sigma: f64, draft_length: u32) -> Result<()> {
    let min = 1.0 / (f64::from(draft_length) + 1.0);
    if !(sigma >= min && sigma <= 1.0) {
        return Err(Error::YieldOutOfRange { value: sigma, min });
    }
    Ok(())
}

/// Target forward time over `tokens` tokens: the shared expression behind
/// both the autoregressive and the verification pass.
fn target_forward(
    params: &CostParams,
    arch: &MoEArch,
    curve: &GrowthCurve,
    tokens: u64,
) -> Result<TargetForward> {
    let activated = expected_activated_experts(arch, tokens)?;
    let tokens_f = tokens as f64;
    let load = tokens_f * f64::from(arch.active_per_token) / activated;
    let fixed = params.bias;
    let token_growth = params.k1 * curve.eval(tokens_f)?;
    let expert_loading = params.k2 * activated;
    let load_growth = params.k3 * curve.eval(load)?;
    Ok(TargetForward {
        tokens: tokens_f,
        activated_experts: activated,
        expert_load: load,
        fixed,
        token_growth,
        expert_loading,
        load_growth,
        total: fixed + token_growth + expert_loading + load_growth,
    })
}

/// Autoregressive decode step: one token per request, `batch` tokens total.
pub fn ar_forward_time(
    params: &CostParams,
    arch: &MoEArch,
    hw: &HardwareSpec,
    batch: u64,
) -> Result<TargetForward> {
    params.validate()?;
    hw.validate()?;
    check_batch(batch)?;
    let curve = params.curve(hw)?;
    target_forward(params, arch, &curve, batch)
}

/// Verification pass: `batch * draft_length` tokens in one forward.
pub fn verify_forward_time(
    params: &CostParams,
    arch: &MoEArch,
    hw: &HardwareSpec,
    batch: u64,
    draft_length: u32,
) -> Result<TargetForward> {
    params.validate()?;
    hw.validate()?;
    check_batch(batch)?;
    check_draft_length(draft_length)?;
    let curve = params.curve(hw)?;
    target_forward(params, arch, &curve, batch * u64::from(draft_length))
}

/// Draft-model forward time: `draft_bias + draft_k * G(batch)`.
pub fn draft_forward_time(params: &CostParams, hw: &HardwareSpec, batch: u64) -> Result<DraftForward> {
    params.validate()?;
    hw.validate()?;
    check_batch(batch)?;
    let curve = params.curve(hw)?;
    let token_growth = params.draft_k * curve.eval(batch as f64)?;
    Ok(DraftForward {
        fixed: params.draft_bias,
        token_growth,
        total: params.draft_bias + token_growth,
    })
}

/// Rejection-sampling time: `reject_bias + reject_k * batch`.
pub fn reject_time(params: &CostParams, batch: u64) -> f64 {
    params.reject_bias + params.reject_k * batch as f64
}

/// Predicted speedup of speculative decoding over autoregressive decoding,
/// with the full forward-time breakdown.
pub fn speedup_report(
    params: &CostParams,
    arch: &MoEArch,
    hw: &HardwareSpec,
    batch: u64,
    draft_length: u32,
    sigma: f64,
    variant: SpeedupVariant,
) -> Result<SpeedupReport> {
    params.validate()?;
    hw.validate()?;
    check_batch(batch)?;
    check_draft_length(draft_length)?;
    check_sigma(sigma, draft_length)?;
    let curve = params.curve(hw)?;
    let ar = target_forward(params, arch, &curve, batch)?;
    let verify = target_forward(params, arch, &curve, batch * u64::from(draft_length))?;
    let draft = draft_forward_time(params, hw, batch)?;
    let reject = reject_time(params, batch);
    let tokens_per_round = sigma * (f64::from(draft_length) + 1.0);
    let denominator = match variant {
        SpeedupVariant::Fitted => draft.total + ar.total + verify.total + reject,
        SpeedupVariant::PerRound => f64::from(draft_length) * draft.total + verify.total + reject,
    };
    if denominator == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let speedup = tokens_per_round * ar.total / denominator;
    let target_efficiency = ar.total / verify.total;
    Ok(SpeedupReport {
        speedup,
        target_efficiency,
        tokens_per_round,
        ar,
        verify,
        draft,
        reject,
    })
}

/// Predicted speedup only; see [`speedup_report`] for the decomposition.
pub fn compute_speedup(
    params: &CostParams,
    arch: &MoEArch,
    hw: &HardwareSpec,
    batch: u64,
    draft_length: u32,
    sigma: f64,
    variant: SpeedupVariant,
) -> Result<f64> {
    Ok(speedup_report(params, arch, hw, batch, draft_length, sigma, variant)?.speedup)
}

/// Ratio of the single-token decode time to the verification time, in
/// (0, 1]. Equals 1 at `draft_length = 1` and degrades as verification gets
/// relatively more expensive; the systemic (algorithm-independent) component
/// of speculative-decoding speedup.
pub fn target_efficiency(
    params: &CostParams,
    arch: &MoEArch,
    hw: &HardwareSpec,
    batch: u64,
    draft_length: u32,
) -> Result<f64> {
    params.validate()?;
    hw.validate()?;
    check_batch(batch)?;
    check_draft_length(draft_length)?;
    let curve = params.curve(hw)?;
    let ar = target_forward(params, arch, &curve, batch)?;
    let verify = target_forward(params, arch, &curve, batch * u64::from(draft_length))?;
    if verify.total == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(ar.total / verify.total)
}

/// Evaluates speedup and target efficiency over `batches` and locates the
/// peak and its robust range.
pub fn sweep_batch(
    params: &CostParams,
    arch: &MoEArch,
    hw: &HardwareSpec,
    draft_length: u32,
    sigma: f64,
    batches: &[u64],
    variant: SpeedupVariant,
) -> Result<SweepResult> {
    if batches.is_empty() {
        return Err(Error::InvalidSweepRange {
            reason: "batch list is empty",
        });
    }
    if batches.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSweepRange {
            reason: "batch list must be strictly increasing",
        });
    }
    let mut speedups = Vec::with_capacity(batches.len());
    let mut efficiencies = Vec::with_capacity(batches.len());
    for &batch in batches {
        let report = speedup_report(params, arch, hw, batch, draft_length, sigma, variant)?;
        speedups.push(report.speedup);
        efficiencies.push(report.target_efficiency);
    }
    let mut peak_index = 0;
    for (i, &s) in speedups.iter().enumerate() {
        if s > speedups[peak_index] {
            peak_index = i;
        }
    }
    let peak_speedup = speedups[peak_index];
    let threshold = peak_speedup / core::f64::consts::SQRT_2;
    let mut lo = peak_index;
    while lo > 0 && speedups[lo - 1] >= threshold {
        lo -= 1;
    }
    let mut hi = peak_index;
    while hi + 1 < speedups.len() && speedups[hi + 1] >= threshold {
        hi += 1;
    }
    Ok(SweepResult {
        batch_sizes: batches.to_vec(),
        speedups,
        target_efficiencies: efficiencies,
        peak_speedup,
        peak_batch: batches[peak_index],
        robust_range: (batches[lo], batches[hi]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn arch64x8() -> MoEArch {
        MoEArch::new(64, 8).unwrap()
    }

    fn hw_rp100() -> HardwareSpec {
        // ridge point 100
        HardwareSpec::new("rp100", 1e12, 1e10, 1).unwrap()
    }

    fn zeroed(lambda: f64, growth_base: f64) -> CostParams {
        CostParams {
            bias: 0.0,
            k1: 0.0,
            k2: 0.0,
            k3: 0.0,
            draft_bias: 0.0,
            draft_k: 0.0,
            reject_bias: 0.0,
            reject_k: 0.0,
            lambda,
            growth_base,
        }
    }

    #[test]
    fn params_validation() {
        let mut p = zeroed(0.5, 1.01);
        assert!(p.validate().is_ok());
        p.lambda = 0.1;
        assert!(p.validate().is_err());
        p.lambda = 0.5;
        p.growth_base = 1.0;
        assert!(p.validate().is_err());
        p.growth_base = 1.01;
        p.k2 = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_array_round_trip() {
        let p = CostParams {
            bias: 0.1,
            k1: 0.2,
            k2: 0.3,
            k3: 0.4,
            draft_bias: 0.5,
            draft_k: 0.6,
            reject_bias: 0.7,
            reject_k: 0.8,
            lambda: 0.9,
            growth_base: 1.5,
        };
        assert_eq!(CostParams::from_array(p.to_array()), p);
    }

    #[test]
    fn ar_time_term_structure() {
        let hw = hw_rp100();
        let arch = arch64x8();
        let mut p = zeroed(0.5, 1.01);
        p.bias = 1.0;
        for batch in [1u64, 7, 64] {
            assert_eq!(ar_forward_time(&p, &arch, &hw, batch).unwrap().total, 1.0);
        }
        let mut p = zeroed(0.5, 1.01);
        p.k2 = 1.0;
        let fwd = ar_forward_time(&p, &arch, &hw, 1).unwrap();
        assert_eq!(fwd.total, 8.0);
        assert_eq!(fwd.activated_experts, 8.0);
        assert_eq!(fwd.expert_load, 1.0);
    }

    #[test]
    fn ar_time_matches_straight_line_reimplementation() {
        // Independent re-derivation of the decode-time expression, written
        // as one arithmetic line against raw f64 ops.
        let hw = hw_rp100();
        let arch = arch64x8();
        let p = CostParams {
            bias: 1.0,
            k1: 0.5,
            k2: 0.01,
            k3: 0.2,
            draft_bias: 0.0,
            draft_k: 0.0,
            reject_bias: 0.0,
            reject_k: 0.0,
            lambda: 1.0,
            growth_base: 1.01,
        };
        let batch = 16u64;
        let (e, k, b) = (64.0f64, 8.0f64, batch as f64);
        let lrp = 1.0 * 100.0;
        let s: f64 = 1.01;
        let g = |t: f64| {
            if t <= lrp {
                s.powf(t)
            } else {
                s.powf(lrp) * (1.0 + s.ln() * (t - lrp))
            }
        };
        let n_ar = e * (1.0 - ((e - k) / e).powf(b));
        let t_ar = b * k / n_ar;
        let expected = 1.0 + 0.5 * g(b) + 0.01 * n_ar + 0.2 * g(t_ar);
        let fwd = ar_forward_time(&p, &arch, &hw, batch).unwrap();
        assert_relative_eq!(fwd.total, expected, max_relative = 1e-12);
    }

    #[test]
    fn verify_equals_ar_at_unit_draft_length() {
        let hw = hw_rp100();
        let arch = arch64x8();
        let p = CostParams {
            bias: 0.3,
            k1: 0.05,
            k2: 0.02,
            k3: 0.1,
            draft_bias: 0.0,
            draft_k: 0.0,
            reject_bias: 0.0,
            reject_k: 0.0,
            lambda: 0.5,
            growth_base: 1.02,
        };
        for batch in [1u64, 5, 32] {
            assert_eq!(
                verify_forward_time(&p, &arch, &hw, batch, 1).unwrap().total,
                ar_forward_time(&p, &arch, &hw, batch).unwrap().total
            );
        }
    }

    #[test]
    fn verify_expert_loading_matches_activation_formula() {
        let hw = hw_rp100();
        let arch = arch64x8();
        let mut p = zeroed(0.5, 1.01);
        p.k2 = 1.0;
        let fwd = verify_forward_time(&p, &arch, &hw, 4, 4).unwrap();
        assert_relative_eq!(fwd.total, 56.44370643064008, max_relative = 1e-12);
        // At large token counts the expert term saturates at k2 * E.
        let saturated = verify_forward_time(&p, &arch, &hw, 4096, 4).unwrap();
        assert_relative_eq!(saturated.total, 64.0, max_relative = 1e-9);
    }

    #[test]
    fn draft_time_examples() {
        let hw = hw_rp100();
        let mut p = zeroed(0.5, 1.01);
        p.draft_bias = 0.1;
        assert_eq!(draft_forward_time(&p, &hw, 9).unwrap().total, 0.1);
        let mut p = zeroed(1.0, 1.01);
        p.draft_k = 1.0;
        // Below the transition the draft growth term is the bare curve.
        let fwd = draft_forward_time(&p, &hw, 32).unwrap();
        assert_relative_eq!(fwd.total, 1.01f64.powi(32), max_relative = 1e-12);
        let mut p = zeroed(1.0, 1.01);
        p.draft_bias = 0.05;
        p.draft_k = 0.02;
        assert_relative_eq!(
            draft_forward_time(&p, &hw, 32).unwrap().total,
            0.07749881357062194,
            max_relative = 1e-12
        );
    }

    #[test]
    fn reject_time_is_affine() {
        let mut p = zeroed(0.5, 1.01);
        assert_eq!(reject_time(&p, 100), 0.0);
        p.reject_bias = 0.01;
        p.reject_k = 0.001;
        assert_relative_eq!(reject_time(&p, 10), 0.02, max_relative = 1e-15);
        let mut p = zeroed(0.5, 1.01);
        p.reject_bias = 0.02;
        assert_eq!(reject_time(&p, 7), 0.02);
    }

    #[test]
    fn speedup_denominator_structure() {
        // With zero draft/reject cost and verify == ar (gamma = 1 forces
        // that), the two variants give the documented distinct closed forms:
        // fitted divides by 2*ar, per-round by ar alone. Use a draft length
        // of 3 with a curve-free parameter set so verify == ar still holds.
        let hw = hw_rp100();
        let arch = arch64x8();
        let mut p = zeroed(0.5, 1.01);
        p.bias = 1.0; // ar == verify == 1.0 regardless of token count
        let fitted = compute_speedup(&p, &arch, &hw, 2, 3, 1.0, SpeedupVariant::Fitted).unwrap();
        assert_relative_eq!(fitted, 2.0, max_relative = 1e-12);
        let per_round = compute_speedup(&p, &arch, &hw, 2, 3, 1.0, SpeedupVariant::PerRound).unwrap();
        assert_relative_eq!(per_round, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn speedup_rejects_zero_denominator_and_bad_sigma() {
        let hw = hw_rp100();
        let arch = arch64x8();
        let p = zeroed(0.5, 1.01);
        assert!(matches!(
            compute_speedup(&p, &arch, &hw, 2, 3, 1.0, SpeedupVariant::Fitted),
            Err(Error::ZeroDenominator)
        ));
        let mut p = zeroed(0.5, 1.01);
        p.bias = 1.0;
        assert!(matches!(
            compute_speedup(&p, &arch, &hw, 2, 3, 0.1, SpeedupVariant::Fitted),
            Err(Error::YieldOutOfRange { .. })
        ));
    }

    #[test]
    fn target_efficiency_is_one_at_unit_draft_length() {
        let hw = hw_rp100();
        let arch = arch64x8();
        let p = CostParams {
            bias: 0.1,
            k1: 0.02,
            k2: 0.01,
            k3: 0.05,
            draft_bias: 0.01,
            draft_k: 0.001,
            reject_bias: 0.0,
            reject_k: 0.0,
            lambda: 0.4,
            growth_base: 1.03,
        };
        for batch in [1u64, 13, 60] {
            assert_eq!(target_efficiency(&p, &arch, &hw, batch, 1).unwrap(), 1.0);
        }
    }

    #[test]
    fn sweep_single_batch() {
        let hw = hw_rp100();
        let arch = arch64x8();
        let mut p = zeroed(0.5, 1.01);
        p.bias = 1.0;
        let sweep = sweep_batch(&p, &arch, &hw, 4, 0.8, &[16], SpeedupVariant::Fitted).unwrap();
        assert_eq!(sweep.peak_batch, 16);
        assert_eq!(sweep.robust_range, (16, 16));
        assert_eq!(sweep.speedups.len(), 1);
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        let hw = hw_rp100();
        let arch = arch64x8();
        let mut p = zeroed(0.5, 1.01);
        p.bias = 1.0;
        assert!(sweep_batch(&p, &arch, &hw, 4, 0.8, &[], SpeedupVariant::Fitted).is_err());
        assert!(sweep_batch(&p, &arch, &hw, 4, 0.8, &[4, 4], SpeedupVariant::Fitted).is_err());
        assert!(sweep_batch(&p, &arch, &hw, 4, 0.8, &[8, 4], SpeedupVariant::Fitted).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        prop_compose! {
            fn any_params()(bias in 0.01f64..1.0, k1 in 0.0f64..0.5, k2 in 0.0f64..0.2,
                            k3 in 0.0f64..0.5, draft_bias in 0.0f64..0.2, draft_k in 0.0f64..0.1,
                            reject_bias in 0.0f64..0.05, reject_k in 0.0f64..0.01,
                            lambda in 0.2f64..=1.0, growth_base in 1.001f64..=1.5)
                           -> CostParams {
                CostParams { bias, k1, k2, k3, draft_bias, draft_k, reject_bias, reject_k, lambda, growth_base }
            }
        }

        proptest! {
            #[test]
            fn verify_dominates_ar(
                p in any_params(),
                batch in 1u64..200,
                gamma in 1u32..8,
            ) {
                let hw = hw_rp100();
                let arch = arch64x8();
                let ar = ar_forward_time(&p, &arch, &hw, batch).unwrap().total;
                let verify = verify_forward_time(&p, &arch, &hw, batch, gamma).unwrap().total;
                prop_assert!(verify >= ar);
                if gamma == 1 {
                    prop_assert_eq!(verify, ar);
                }
            }

            #[test]
            fn efficiency_in_unit_interval_and_speedup_bounded(
                p in any_params(),
                batch in 1u64..200,
                gamma in 1u32..8,
                sigma_frac in 0.0f64..=1.0,
            ) {
                let hw = hw_rp100();
                let arch = arch64x8();
                let min_sigma = 1.0 / (f64::from(gamma) + 1.0);
                let sigma = min_sigma + sigma_frac * (1.0 - min_sigma);
                let report =
                    speedup_report(&p, &arch, &hw, batch, gamma, sigma, SpeedupVariant::Fitted)
                        .unwrap();
                prop_assert!(report.target_efficiency > 0.0);
                prop_assert!(report.target_efficiency <= 1.0 + 1e-12);
                // Fitted denominator includes the decode pass itself.
                prop_assert!(report.speedup <= sigma * (f64::from(gamma) + 1.0) + 1e-12);
            }

            #[test]
            fn ratios_invariant_under_common_time_scaling(
                p in any_params(),
                scale in 0.01f64..100.0,
                batch in 1u64..200,
                gamma in 1u32..8,
            ) {
                let hw = hw_rp100();
                let arch = arch64x8();
                let scaled = CostParams {
                    bias: p.bias * scale,
                    k1: p.k1 * scale,
                    k2: p.k2 * scale,
                    k3: p.k3 * scale,
                    draft_bias: p.draft_bias * scale,
                    draft_k: p.draft_k * scale,
                    reject_bias: p.reject_bias * scale,
                    reject_k: p.reject_k * scale,
                    lambda: p.lambda,
                    growth_base: p.growth_base,
                };
                let a = speedup_report(&p, &arch, &hw, batch, gamma, 0.8, SpeedupVariant::Fitted)
                    .unwrap();
                let b =
                    speedup_report(&scaled, &arch, &hw, batch, gamma, 0.8, SpeedupVariant::Fitted)
                        .unwrap();
                prop_assert!((a.speedup - b.speedup).abs() <= 1e-9 * a.speedup.abs());
                prop_assert!(
                    (a.target_efficiency - b.target_efficiency).abs()
                        <= 1e-9 * a.target_efficiency.abs()
                );
            }
        }
    }
}
