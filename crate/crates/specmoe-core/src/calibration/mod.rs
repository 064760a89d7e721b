//! Measurement ingestion, parameter bounds, and bounded nonlinear
//! least-squares calibration of [`CostParams`].
//!
//! The model's ten parameters are fitted to measured speedups by minimizing
//! `1/2 * sum_i (predicted_i - observed_i)^2` subject to box bounds derived
//! from hardware bandwidth and parameter volumes. Because the speedup is a
//! ratio of times, the time coefficients are only identified up to a common
//! scale; the fit therefore promises predictive equivalence, not parameter
//! recovery.

mod solver;

use crate::cost_model::{compute_speedup, CostParams, SpeedupVariant, PARAM_COUNT};
use crate::error::{Error, Result};
use crate::expert_stats::MoEArch;
use crate::roofline::{HardwareSpec, VolumeSpec};
use crate::speculation::sigma_from_alpha;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum number of measurements the fit accepts: one per parameter.
pub const MIN_MEASUREMENTS: usize = PARAM_COUNT;

/// Interior margin enforcing the open growth-base bound `s > 1`.
pub const GROWTH_BASE_MARGIN: f64 = 1e-6;

/// Ratio between the derived loading-time lower bounds and their uppers.
const LOAD_TIME_RELAXATION: f64 = 5.0;

/// One profiled observation of speculative-decoding speedup.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Measurement {
    pub batch_size: u32,
    /// Draft length `gamma`.
    pub draft_length: u32,
    /// Experts activated per token (`K`).
    pub active_per_token: u32,
    /// Total experts (`E`).
    pub total_experts: u32,
    /// Observed yield ratio `sigma`, in (0, 1].
    pub sigma: f64,
    /// Observed end-to-end speedup.
    pub speedup: f64,
}

impl Measurement {
    pub fn validate(&self) -> Result<()> {
        self.validate_at(None)
    }

    fn validate_at(&self, index: Option<usize>) -> Result<()> {
        let fail = |reason: &'static str| Err(Error::InvalidMeasurement { index, reason });
        if self.batch_size == 0 {
            return fail("batch_size must be positive");
        }
        if self.draft_length == 0 {
            return fail("gamma must be positive");
        }
        if self.active_per_token == 0 || self.total_experts == 0 {
            return fail("K and E must be positive");
        }
        if self.active_per_token > self.total_experts {
            return fail("K must not exceed E");
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return fail("sigma must lie in (0, 1]");
        }
        if !(self.speedup > 0.0) || !self.speedup.is_finite() {
            return fail("speedup must be positive and finite");
        }
        Ok(())
    }

    pub fn arch(&self) -> Result<MoEArch> {
        MoEArch::new(self.total_experts, self.active_per_token)
    }
}

fn validate_all(measurements: &[Measurement]) -> Result<()> {
    for (i, m) in measurements.iter().enumerate() {
        m.validate_at(Some(i))?;
    }
    Ok(())
}

/// Box bounds on the ten parameters, stored as a lower and an upper
/// [`CostParams`]. Coefficients without a natural ceiling (`k1`, `k3`,
/// `draft_k`) carry `+inf` uppers; the solver caps them internally.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ParamBounds {
    pub lower: CostParams,
    pub upper: CostParams,
}

impl ParamBounds {
    pub fn validate(&self) -> Result<()> {
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        for i in 0..PARAM_COUNT {
            if !(lo[i] <= hi[i]) || lo[i].is_nan() || hi[i].is_nan() {
                return Err(Error::InvalidBounds {
                    reason: "each lower bound must not exceed its upper bound",
                });
            }
            if !lo[i].is_finite() {
                return Err(Error::InvalidBounds {
                    reason: "lower bounds must be finite",
                });
            }
        }
        if self.lower.lambda < crate::cost_model::LAMBDA_MIN
            || self.upper.lambda > crate::cost_model::LAMBDA_MAX
        {
            return Err(Error::InvalidBounds {
                reason: "lambda bounds must lie within [0.2, 1]",
            });
        }
        if self.lower.growth_base < crate::cost_model::GROWTH_BASE_MIN
            || self.upper.growth_base > crate::cost_model::GROWTH_BASE_MAX
        {
            return Err(Error::InvalidBounds {
                reason: "growth-base bounds must lie within (1, 2]",
            });
        }
        Ok(())
    }

    pub fn contains(&self, params: &CostParams) -> bool {
        let x = params.to_array();
        let lo = self.lower.to_array();
        let hi = self.upper.to_array();
        (0..PARAM_COUNT).all(|i| x[i] >= lo[i] && x[i] <= hi[i])
    }
}

/// Derives default fitting bounds from hardware and parameter volumes.
///
/// The fixed-loading coefficients get `[t_min, 5 * t_min]` windows around
/// their theoretical minimum loading times (`volume * bytes / bandwidth`);
/// the growth coefficients are one-sided `[0, inf)`; the rejection terms are
/// capped by `reject_ceiling`, the configured rejection-time ceiling in
/// model time units.
pub fn default_bounds(
    vol: &VolumeSpec,
    hw: &HardwareSpec,
    measurements: &[Measurement],
    reject_ceiling: f64,
) -> Result<ParamBounds> {
    vol.validate()?;
    hw.validate()?;
    if measurements.is_empty() {
        return Err(Error::EmptyMeasurements);
    }
    validate_all(measurements)?;
    if !(reject_ceiling > 0.0) || !reject_ceiling.is_finite() {
        return Err(Error::InvalidBounds {
            reason: "reject ceiling must be positive and finite",
        });
    }
    let bytes = vol.bytes_per_param();
    let bias_min = vol.dense_param_count * bytes / hw.peak_bandwidth;
    let k2_min = vol.expert_param_count * bytes / hw.peak_bandwidth;
    let draft_bias_min = vol.draft_param_count * bytes / hw.peak_bandwidth;
    let bounds = ParamBounds {
        lower: CostParams {
            bias: bias_min,
            k1: 0.0,
            k2: k2_min,
            k3: 0.0,
            draft_bias: draft_bias_min,
            draft_k: 0.0,
            reject_bias: 0.0,
            reject_k: 0.0,
            lambda: crate::cost_model::LAMBDA_MIN,
            growth_base: crate::cost_model::GROWTH_BASE_MIN + GROWTH_BASE_MARGIN,
        },
        upper: CostParams {
            bias: LOAD_TIME_RELAXATION * bias_min,
            k1: f64::INFINITY,
            k2: LOAD_TIME_RELAXATION * k2_min,
            k3: f64::INFINITY,
            draft_bias: LOAD_TIME_RELAXATION * draft_bias_min,
            draft_k: f64::INFINITY,
            reject_bias: reject_ceiling,
            reject_k: reject_ceiling,
            lambda: crate::cost_model::LAMBDA_MAX,
            growth_base: crate::cost_model::GROWTH_BASE_MAX,
        },
    };
    bounds.validate()?;
    Ok(bounds)
}

/// Every `stride`-th measurement starting at `begin`, preserving order.
///
/// Callers are expected to pass measurements sorted by `(K, gamma, B)` so
/// the subset covers all axes; the subset size is
/// `ceil((total - begin) / stride)`.
pub fn stride_select(measurements: &[Measurement], stride: usize, begin: usize) -> Result<Vec<Measurement>> {
    if stride == 0 {
        return Err(Error::ZeroStride);
    }
    if begin >= measurements.len() {
        return Err(Error::BeginOutOfRange {
            begin,
            total: measurements.len(),
        });
    }
    Ok(measurements[begin..].iter().step_by(stride).copied().collect())
}

/// The least-squares objective at fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveReport {
    /// `1/2 * sum r_i^2`, the quantity the fit minimizes.
    pub half_sum_squares: f64,
    /// `sum r_i^2 / m`, the mean form of the same residuals.
    pub mean_squared_error: f64,
    /// Signed residuals `predicted - observed`, one per measurement.
    pub residuals: Vec<f64>,
}

/// Evaluates the fitting objective for `params` against `measurements`.
pub fn objective(
    params: &CostParams,
    measurements: &[Measurement],
    hw: &HardwareSpec,
    variant: SpeedupVariant,
) -> Result<ObjectiveReport> {
    params.validate()?;
    hw.validate()?;
    if measurements.is_empty() {
        return Err(Error::EmptyMeasurements);
    }
    validate_all(measurements)?;
    let mut residuals = Vec::with_capacity(measurements.len());
    for m in measurements {
        let predicted = compute_speedup(
            params,
            &m.arch()?,
            hw,
            u64::from(m.batch_size),
            m.draft_length,
            m.sigma,
            variant,
        )?;
        residuals.push(predicted - m.speedup);
    }
    let sum_squares: f64 = residuals.iter().map(|r| r * r).sum();
    Ok(ObjectiveReport {
        half_sum_squares: 0.5 * sum_squares,
        mean_squared_error: sum_squares / measurements.len() as f64,
        residuals,
    })
}

/// Solver configuration for [`fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub variant: SpeedupVariant,
    /// Iteration cap per start.
    pub max_iterations: usize,
    /// Number of seeded initial points; the first is deterministic, the
    /// rest are sampled within bounds.
    pub multi_starts: usize,
    pub seed: u64,
    /// Stop when the gradient infinity norm falls below this.
    pub gradient_tolerance: f64,
    /// Stop when the proposed step is this small relative to the iterate.
    pub step_tolerance: f64,
    /// Stop when an accepted step reduces the cost by less than this
    /// relative fraction.
    pub relative_cost_tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            variant: SpeedupVariant::Fitted,
            max_iterations: 300,
            multi_starts: 8,
            seed: 0,
            gradient_tolerance: 1e-12,
            step_tolerance: 1e-14,
            relative_cost_tolerance: 1e-14,
        }
    }
}

/// Outcome of a bounded least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: CostParams,
    /// `1/2 * sum r^2` at the fitted parameters.
    pub objective: f64,
    /// `sum r^2 / m` at the fitted parameters.
    pub mean_squared_error: f64,
    pub residuals: Vec<f64>,
    /// Solver iterations spent on the winning start.
    pub iterations: usize,
    /// Whether the winning start met a first-order or step-size tolerance
    /// before its iteration cap. A `false` value flags the returned
    /// parameters as best-so-far rather than converged.
    pub converged: bool,
    pub seed: u64,
    /// Index of the winning start.
    pub best_start: usize,
}

/// Fits [`CostParams`] to measurements by bounded least squares.
///
/// Multi-start damped Gauss-Newton over smoothly reparameterized bounds;
/// deterministic for a given seed, and the result never leaves `bounds`.
/// Needs at least [`MIN_MEASUREMENTS`] measurements.
pub fn fit(
    measurements: &[Measurement],
    hw: &HardwareSpec,
    bounds: &ParamBounds,
    config: &FitConfig,
) -> Result<FitResult> {
    hw.validate()?;
    bounds.validate()?;
    if measurements.len() < MIN_MEASUREMENTS {
        return Err(Error::TooFewMeasurements {
            have: measurements.len(),
            need: MIN_MEASUREMENTS,
        });
    }
    validate_all(measurements)?;
    for m in measurements {
        // The model cannot reproduce a yield below the bonus-token floor;
        // reject such rows up front instead of failing mid-solve.
        let min_sigma = 1.0 / (f64::from(m.draft_length) + 1.0);
        if m.sigma < min_sigma {
            return Err(Error::YieldOutOfRange {
                value: m.sigma,
                min: min_sigma,
            });
        }
    }
    if config.multi_starts == 0 || config.max_iterations == 0 {
        return Err(Error::InvalidBounds {
            reason: "multi_starts and max_iterations must be positive",
        });
    }
    solver::solve(measurements, hw, bounds, config)
}

/// How synthesized measurements assign the yield ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaModel {
    /// The same yield for every grid point.
    Constant(f64),
    /// Yield derived from a fixed per-token acceptance rate, so it varies
    /// with the draft length.
    FromAlpha(f64),
}

impl SigmaModel {
    fn yield_for(&self, draft_length: u32) -> Result<f64> {
        match *self {
            SigmaModel::Constant(sigma) => {
                let min = 1.0 / (f64::from(draft_length) + 1.0);
                if !(sigma >= min && sigma <= 1.0) {
                    return Err(Error::YieldOutOfRange { value: sigma, min });
                }
                Ok(sigma)
            }
            SigmaModel::FromAlpha(alpha) => sigma_from_alpha(alpha, draft_length),
        }
    }
}

/// The default synthesis grid: 6 activation counts x 2 draft lengths x 19
/// batch sizes = 228 points.
pub const DEFAULT_BATCH_SIZES: [u32; 19] = [
    1, 2, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40, 44, 48, 52, 56, 60, 80, 100,
];

/// Grid of workloads to synthesize measurements over.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthGrid {
    pub total_experts: u32,
    pub active_counts: Vec<u32>,
    pub draft_lengths: Vec<u32>,
    pub batch_sizes: Vec<u32>,
}

impl Default for SynthGrid {
    fn default() -> Self {
        SynthGrid {
            total_experts: 64,
            active_counts: alloc::vec![1, 2, 4, 8, 16, 32],
            draft_lengths: alloc::vec![3, 4],
            batch_sizes: DEFAULT_BATCH_SIZES.to_vec(),
        }
    }
}

impl SynthGrid {
    fn validate(&self) -> Result<()> {
        if self.active_counts.is_empty() {
            return Err(Error::EmptyGrid { axis: "active_counts" });
        }
        if self.draft_lengths.is_empty() {
            return Err(Error::EmptyGrid { axis: "draft_lengths" });
        }
        if self.batch_sizes.is_empty() {
            return Err(Error::EmptyGrid { axis: "batch_sizes" });
        }
        Ok(())
    }
}

/// Evaluates the model over the grid and emits measurements, optionally with
/// multiplicative Gaussian noise of relative strength `noise`.
///
/// Rows come out sorted by `(K, gamma, B)` — the ordering [`stride_select`]
/// expects. Output is deterministic for a given seed; noisy speedups are
/// floored at `1e-9` so rows always satisfy the measurement invariants.
pub fn synthesize_measurements(
    true_params: &CostParams,
    hw: &HardwareSpec,
    grid: &SynthGrid,
    sigma_model: SigmaModel,
    noise: f64,
    seed: u64,
) -> Result<Vec<Measurement>> {
    true_params.validate()?;
    hw.validate()?;
    grid.validate()?;
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::InvalidNoise { value: noise });
    }
    let mut active_counts = grid.active_counts.clone();
    active_counts.sort_unstable();
    active_counts.dedup();
    let mut draft_lengths = grid.draft_lengths.clone();
    draft_lengths.sort_unstable();
    draft_lengths.dedup();
    let mut batch_sizes = grid.batch_sizes.clone();
    batch_sizes.sort_unstable();
    batch_sizes.dedup();

    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut row_index = 0u64;
    for &active in &active_counts {
        let arch = MoEArch::new(grid.total_experts, active)?;
        for &gamma in &draft_lengths {
            let sigma = sigma_model.yield_for(gamma)?;
            for &batch in &batch_sizes {
                if batch == 0 {
                    return Err(Error::ZeroBatchSize);
                }
                let clean = compute_speedup(
                    true_params,
                    &arch,
                    hw,
                    u64::from(batch),
                    gamma,
                    sigma,
                    SpeedupVariant::Fitted,
                )?;
                let speedup = if noise > 0.0 {
                    let mut rng = base.clone();
                    rng.set_stream(row_index);
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    (clean * (1.0 + noise * z)).max(1e-9)
                } else {
                    clean
                };
                rows.push(Measurement {
                    batch_size: batch,
                    draft_length: gamma,
                    active_per_token: active,
                    total_experts: grid.total_experts,
                    sigma,
                    speedup,
                });
                row_index += 1;
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hw() -> HardwareSpec {
        // ridge point 156
        HardwareSpec::new("bench", 3.12e14, 2e12, 2).unwrap()
    }

    fn true_params() -> CostParams {
        CostParams {
            bias: 0.014,
            k1: 0.004,
            k2: 0.0012,
            k3: 0.08,
            draft_bias: 0.001,
            draft_k: 0.0015,
            reject_bias: 0.0005,
            reject_k: 2e-5,
            lambda: 0.45,
            growth_base: 1.04,
        }
    }

    fn sample_measurement() -> Measurement {
        Measurement {
            batch_size: 16,
            draft_length: 4,
            active_per_token: 8,
            total_experts: 64,
            sigma: 0.9,
            speedup: 2.0,
        }
    }

    #[test]
    fn measurement_validation() {
        assert!(sample_measurement().validate().is_ok());
        let mut m = sample_measurement();
        m.batch_size = 0;
        assert!(m.validate().is_err());
        let mut m = sample_measurement();
        m.active_per_token = 65;
        assert!(m.validate().is_err());
        let mut m = sample_measurement();
        m.sigma = 0.0;
        assert!(m.validate().is_err());
        let mut m = sample_measurement();
        m.speedup = -1.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn default_bounds_windows() {
        let vol = VolumeSpec::new(7e9, 3.9e8, 4.5e8, 16).unwrap();
        let hw = hw();
        let ms = [sample_measurement()];
        let bounds = default_bounds(&vol, &hw, &ms, 0.005).unwrap();
        let bias_min = 7e9 * 2.0 / 2e12;
        assert_relative_eq!(bounds.lower.bias, bias_min, max_relative = 1e-12);
        assert_relative_eq!(bounds.upper.bias, 5.0 * bias_min, max_relative = 1e-12);
        assert_eq!(bounds.lower.lambda, 0.2);
        assert_eq!(bounds.upper.lambda, 1.0);
        assert_eq!(bounds.upper.growth_base, 2.0);
        assert!(bounds.lower.growth_base > 1.0);
        assert!(bounds.upper.k1.is_infinite());
        assert_eq!(bounds.upper.reject_bias, 0.005);

        // Doubling the expert volume doubles the k2 window.
        let vol2 = VolumeSpec::new(7e9, 7.8e8, 4.5e8, 16).unwrap();
        let bounds2 = default_bounds(&vol2, &hw, &ms, 0.005).unwrap();
        assert_relative_eq!(bounds2.lower.k2, 2.0 * bounds.lower.k2, max_relative = 1e-12);
        assert_relative_eq!(bounds2.upper.k2, 2.0 * bounds.upper.k2, max_relative = 1e-12);
    }

    #[test]
    fn default_bounds_require_measurements() {
        let vol = VolumeSpec::new(7e9, 3.9e8, 4.5e8, 16).unwrap();
        assert!(matches!(
            default_bounds(&vol, &hw(), &[], 0.005),
            Err(Error::EmptyMeasurements)
        ));
    }

    #[test]
    fn stride_selection_sizes() {
        let rows: Vec<Measurement> = (0..228)
            .map(|i| Measurement {
                batch_size: 1 + (i % 100) as u32,
                ..sample_measurement()
            })
            .collect();
        assert_eq!(stride_select(&rows, 11, 0).unwrap().len(), 21);
        assert_eq!(stride_select(&rows, 25, 0).unwrap().len(), 10);
        assert_eq!(stride_select(&rows, 1, 0).unwrap().len(), 228);
        assert_eq!(stride_select(&rows, 11, 5).unwrap().len(), 21);
        assert!(matches!(stride_select(&rows, 0, 0), Err(Error::ZeroStride)));
        assert!(matches!(
            stride_select(&rows, 11, 228),
            Err(Error::BeginOutOfRange { .. })
        ));
    }

    #[test]
    fn objective_zero_at_generating_params() {
        let hw = hw();
        let rows = synthesize_measurements(
            &true_params(),
            &hw,
            &SynthGrid::default(),
            SigmaModel::FromAlpha(0.8),
            0.0,
            1,
        )
        .unwrap();
        let report = objective(&true_params(), &rows, &hw, SpeedupVariant::Fitted).unwrap();
        assert!(report.half_sum_squares < 1e-24);
        assert_eq!(report.residuals.len(), 228);
    }

    #[test]
    fn objective_counts_a_known_miss() {
        let hw = hw();
        let mut rows = synthesize_measurements(
            &true_params(),
            &hw,
            &SynthGrid::default(),
            SigmaModel::FromAlpha(0.8),
            0.0,
            1,
        )
        .unwrap();
        let single = alloc::vec![Measurement {
            speedup: rows[0].speedup + 2.0,
            ..rows.remove(0)
        }];
        let report = objective(&true_params(), &single, &hw, SpeedupVariant::Fitted).unwrap();
        assert_relative_eq!(report.half_sum_squares, 2.0, max_relative = 1e-9);
        assert_relative_eq!(report.mean_squared_error, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn synthesis_shape_and_determinism() {
        let hw = hw();
        let grid = SynthGrid::default();
        let a = synthesize_measurements(
            &true_params(),
            &hw,
            &grid,
            SigmaModel::FromAlpha(0.8),
            0.01,
            9,
        )
        .unwrap();
        assert_eq!(a.len(), 228);
        let b = synthesize_measurements(
            &true_params(),
            &hw,
            &grid,
            SigmaModel::FromAlpha(0.8),
            0.01,
            9,
        )
        .unwrap();
        assert_eq!(a, b);
        // Sorted by (K, gamma, B).
        assert!(a.windows(2).all(|w| {
            let key = |m: &Measurement| (m.active_per_token, m.draft_length, m.batch_size);
            key(&w[0]) <= key(&w[1])
        }));
    }

    #[test]
    fn fit_requires_enough_measurements() {
        let hw = hw();
        let rows = synthesize_measurements(
            &true_params(),
            &hw,
            &SynthGrid::default(),
            SigmaModel::FromAlpha(0.8),
            0.0,
            1,
        )
        .unwrap();
        let vol = VolumeSpec::new(7e9, 3.9e8, 4.5e8, 16).unwrap();
        let bounds = default_bounds(&vol, &hw, &rows, 0.005).unwrap();
        let err = fit(&rows[..9], &hw, &bounds, &FitConfig::default());
        assert!(matches!(err, Err(Error::TooFewMeasurements { have: 9, need: 10 })));
    }

    #[test]
    fn fit_round_trip_on_stride_subset() {
        let hw = hw();
        let rows = synthesize_measurements(
            &true_params(),
            &hw,
            &SynthGrid::default(),
            SigmaModel::FromAlpha(0.8),
            0.0,
            1,
        )
        .unwrap();
        let subset = stride_select(&rows, 11, 0).unwrap();
        assert_eq!(subset.len(), 21);
        let vol = VolumeSpec::new(7e9, 3.9e8, 4.5e8, 16).unwrap();
        let bounds = default_bounds(&vol, &hw, &subset, 0.005).unwrap();
        let config = FitConfig {
            seed: 2024,
            ..FitConfig::default()
        };
        let result = fit(&subset, &hw, &bounds, &config).unwrap();
        assert!(bounds.contains(&result.params));
        assert!(
            result.mean_squared_error < 1e-10,
            "subset mse {}",
            result.mean_squared_error
        );
        // Predictive equivalence over the full grid.
        let full = objective(&result.params, &rows, &hw, SpeedupVariant::Fitted).unwrap();
        assert!(full.mean_squared_error < 1e-8, "full mse {}", full.mean_squared_error);
    }

    #[test]
    fn fit_is_deterministic_per_seed() {
        let hw = hw();
        let rows = synthesize_measurements(
            &true_params(),
            &hw,
            &SynthGrid::default(),
            SigmaModel::FromAlpha(0.8),
            0.01,
            3,
        )
        .unwrap();
        let subset = stride_select(&rows, 11, 0).unwrap();
        let vol = VolumeSpec::new(7e9, 3.9e8, 4.5e8, 16).unwrap();
        let bounds = default_bounds(&vol, &hw, &subset, 0.005).unwrap();
        let config = FitConfig {
            seed: 7,
            multi_starts: 3,
            ..FitConfig::default()
        };
        let a = fit(&subset, &hw, &bounds, &config).unwrap();
        let b = fit(&subset, &hw, &bounds, &config).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.best_start, b.best_start);
    }
}
