//! Damped Gauss-Newton solver over smoothly reparameterized box bounds.
//!
//! Each bounded parameter is mapped to an unconstrained coordinate through a
//! scaled logistic, so the inner loop is an ordinary Levenberg-Marquardt
//! iteration with a numerically differenced Jacobian and Nielsen damping
//! updates; every iterate maps back to a strictly feasible parameter vector.
//! Coefficients whose spec bound is `+inf` are capped at [`COEFF_CAP`] —
//! an implementation ceiling for solver stability, not a model bound.

use super::{FitConfig, FitResult, Measurement, ParamBounds, GROWTH_BASE_MARGIN};
use crate::cost_model::{compute_speedup, CostParams, PARAM_COUNT};
use crate::error::{Error, Result};
use crate::roofline::HardwareSpec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Internal ceiling for parameters with unbounded uppers.
pub(crate) const COEFF_CAP: f64 = 1e12;

/// Interior clamp keeping the logistic inverse finite at the bounds.
const INTERIOR_EPS: f64 = 1e-12;

struct BoundTransform {
    lower: [f64; PARAM_COUNT],
    upper: [f64; PARAM_COUNT],
    /// Which coordinates had their infinite upper replaced by the cap;
    /// initial points for these use a time-scale heuristic instead of the
    /// (absurdly large) interval midpoint.
    capped: [bool; PARAM_COUNT],
    /// Upper limit used when sampling initial values for capped
    /// coefficients.
    init_ceiling: f64,
}

impl BoundTransform {
    fn new(bounds: &ParamBounds) -> Self {
        let mut lower = bounds.lower.to_array();
        let mut upper = bounds.upper.to_array();
        let mut capped = [false; PARAM_COUNT];
        for i in 0..PARAM_COUNT {
            if !upper[i].is_finite() {
                upper[i] = COEFF_CAP;
                capped[i] = true;
            }
        }
        // Growth base index 9: keep the open bound strictly interior.
        lower[PARAM_COUNT - 1] = lower[PARAM_COUNT - 1].max(1.0 + GROWTH_BASE_MARGIN);
        // Natural time scale of the problem: the dense loading window.
        let time_scale = if upper[0].is_finite() && upper[0] > 0.0 {
            upper[0]
        } else {
            lower[0].max(1.0)
        };
        BoundTransform {
            lower,
            upper,
            capped,
            init_ceiling: 20.0 * time_scale,
        }
    }

    fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Unconstrained coordinates for a feasible parameter vector.
    fn to_internal(&self, x: &[f64; PARAM_COUNT]) -> [f64; PARAM_COUNT] {
        let mut z = [0.0; PARAM_COUNT];
        for i in 0..PARAM_COUNT {
            let w = self.width(i);
            if w <= 0.0 {
                z[i] = 0.0;
                continue;
            }
            let u = ((x[i] - self.lower[i]) / w).clamp(INTERIOR_EPS, 1.0 - INTERIOR_EPS);
            z[i] = (u / (1.0 - u)).ln();
        }
        z
    }

    /// Feasible parameter vector for arbitrary unconstrained coordinates.
    fn to_external(&self, z: &[f64; PARAM_COUNT]) -> CostParams {
        let mut x = [0.0; PARAM_COUNT];
        for i in 0..PARAM_COUNT {
            let w = self.width(i);
            if w <= 0.0 {
                x[i] = self.lower[i];
                continue;
            }
            x[i] = self.lower[i] + w / (1.0 + (-z[i]).exp());
        }
        CostParams::from_array(x)
    }

    /// Initial upper limit per coordinate: the true bound, except for
    /// capped coefficients which start near the problem's time scale.
    fn init_upper(&self, i: usize) -> f64 {
        if self.capped[i] {
            self.upper[i].min(self.init_ceiling.max(self.lower[i]))
        } else {
            self.upper[i]
        }
    }

    /// Deterministic first start: midpoint of the initialization box.
    fn center_start(&self) -> [f64; PARAM_COUNT] {
        let mut x = [0.0; PARAM_COUNT];
        for i in 0..PARAM_COUNT {
            x[i] = 0.5 * (self.lower[i] + self.init_upper(i));
        }
        self.to_internal(&x)
    }

    /// Bound-uniform random start within the initialization box.
    fn random_start(&self, rng: &mut ChaCha8Rng) -> [f64; PARAM_COUNT] {
        let mut x = [0.0; PARAM_COUNT];
        for i in 0..PARAM_COUNT {
            let hi = self.init_upper(i);
            x[i] = self.lower[i] + rng.gen::<f64>() * (hi - self.lower[i]);
        }
        self.to_internal(&x)
    }
}

struct Problem<'a> {
    measurements: &'a [Measurement],
    hw: &'a HardwareSpec,
    config: &'a FitConfig,
    transform: BoundTransform,
}

impl Problem<'_> {
    /// Residual vector at unconstrained coordinates; `None` when any model
    /// evaluation fails or goes non-finite.
    fn residuals(&self, z: &[f64; PARAM_COUNT]) -> Option<Vec<f64>> {
        let params = self.transform.to_external(z);
        let mut out = Vec::with_capacity(self.measurements.len());
        for m in self.measurements {
            let predicted = compute_speedup(
                &params,
                &m.arch().ok()?,
                self.hw,
                u64::from(m.batch_size),
                m.draft_length,
                m.sigma,
                self.config.variant,
            )
            .ok()?;
            if !predicted.is_finite() {
                return None;
            }
            out.push(predicted - m.speedup);
        }
        Some(out)
    }

    fn cost(residuals: &[f64]) -> f64 {
        0.5 * residuals.iter().map(|r| r * r).sum::<f64>()
    }
}

struct StartOutcome {
    z: [f64; PARAM_COUNT],
    cost: f64,
    iterations: usize,
    converged: bool,
}

/// One Levenberg-Marquardt descent from `z0`.
fn descend(problem: &Problem<'_>, z0: [f64; PARAM_COUNT]) -> Option<StartOutcome> {
    let cfg = problem.config;
    let m = problem.measurements.len();
    let mut z = z0;
    let mut residuals = problem.residuals(&z)?;
    let mut cost = Problem::cost(&residuals);
    let mut damping: Option<f64> = None;
    let mut growth = 2.0;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iterations {
        iterations += 1;
        // Central-difference Jacobian in the unconstrained coordinates.
        let mut jacobian = alloc::vec![0.0; m * PARAM_COUNT];
        for j in 0..PARAM_COUNT {
            let h = 1e-6 * z[j].abs().max(1.0);
            let mut fwd = z;
            fwd[j] += h;
            let mut bwd = z;
            bwd[j] -= h;
            let rf = problem.residuals(&fwd)?;
            let rb = problem.residuals(&bwd)?;
            for (i, col) in jacobian.iter_mut().skip(j).step_by(PARAM_COUNT).enumerate() {
                *col = (rf[i] - rb[i]) / (2.0 * h);
            }
        }
        // Normal equations: gradient and Gauss-Newton Hessian.
        let mut gradient = [0.0; PARAM_COUNT];
        let mut hessian = [[0.0; PARAM_COUNT]; PARAM_COUNT];
        for i in 0..m {
            let row = &jacobian[i * PARAM_COUNT..(i + 1) * PARAM_COUNT];
            for a in 0..PARAM_COUNT {
                gradient[a] += row[a] * residuals[i];
                for b in a..PARAM_COUNT {
                    hessian[a][b] += row[a] * row[b];
                }
            }
        }
        for a in 0..PARAM_COUNT {
            for b in 0..a {
                hessian[a][b] = hessian[b][a];
            }
        }
        let grad_norm = gradient.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if grad_norm < cfg.gradient_tolerance {
            converged = true;
            break;
        }
        let max_diag = (0..PARAM_COUNT).fold(0.0f64, |acc, i| acc.max(hessian[i][i]));
        let mu = damping.get_or_insert(if max_diag > 0.0 { 1e-3 * max_diag } else { 1e-3 });

        let mut stepped = false;
        for _ in 0..50 {
            let step = match solve_damped(&hessian, &gradient, *mu) {
                Some(step) => step,
                None => {
                    *mu *= 4.0;
                    continue;
                }
            };
            let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
            let z_norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if step_norm < cfg.step_tolerance * (z_norm + cfg.step_tolerance) {
                converged = true;
                stepped = true;
                break;
            }
            let mut candidate = z;
            for i in 0..PARAM_COUNT {
                candidate[i] += step[i];
            }
            let trial = problem.residuals(&candidate);
            let trial_cost = trial.as_ref().map(|r| Problem::cost(r));
            // Gain ratio against the local quadratic model.
            let predicted: f64 = (0..PARAM_COUNT)
                .map(|i| 0.5 * step[i] * (*mu * step[i] - gradient[i]))
                .sum();
            match (trial, trial_cost) {
                (Some(r), Some(c)) if c.is_finite() && c < cost && predicted > 0.0 => {
                    let gain = (cost - c) / predicted;
                    let relative_drop = (cost - c) / cost.max(f64::MIN_POSITIVE);
                    z = candidate;
                    residuals = r;
                    cost = c;
                    *mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * gain - 1.0).powi(3));
                    growth = 2.0;
                    stepped = true;
                    if relative_drop < cfg.relative_cost_tolerance {
                        converged = true;
                    }
                    break;
                }
                _ => {
                    *mu *= growth;
                    growth *= 2.0;
                }
            }
        }
        if !stepped || converged {
            break;
        }
    }
    Some(StartOutcome {
        z,
        cost,
        iterations,
        converged,
    })
}

/// Solves `(H + mu*I) step = -g` by Cholesky; `None` if the damped matrix is
/// not positive definite.
fn solve_damped(
    hessian: &[[f64; PARAM_COUNT]; PARAM_COUNT],
    gradient: &[f64; PARAM_COUNT],
    mu: f64,
) -> Option<[f64; PARAM_COUNT]> {
    let n = PARAM_COUNT;
    let mut chol = [[0.0f64; PARAM_COUNT]; PARAM_COUNT];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = hessian[i][j] + if i == j { mu } else { 0.0 };
            for k in 0..j {
                sum -= chol[i][k] * chol[j][k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                chol[i][j] = sum.sqrt();
            } else {
                chol[i][j] = sum / chol[j][j];
            }
        }
    }
    // Forward then backward substitution on -g.
    let mut y = [0.0f64; PARAM_COUNT];
    for i in 0..n {
        let mut sum = -gradient[i];
        for k in 0..i {
            sum -= chol[i][k] * y[k];
        }
        y[i] = sum / chol[i][i];
    }
    let mut x = [0.0f64; PARAM_COUNT];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= chol[k][i] * x[k];
        }
        x[i] = sum / chol[i][i];
    }
    Some(x)
}

pub(super) fn solve(
    measurements: &[Measurement],
    hw: &HardwareSpec,
    bounds: &ParamBounds,
    config: &FitConfig,
) -> Result<FitResult> {
    let problem = Problem {
        measurements,
        hw,
        config,
        transform: BoundTransform::new(bounds),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<(StartOutcome, usize)> = None;
    for start in 0..config.multi_starts {
        let z0 = if start == 0 {
            problem.transform.center_start()
        } else {
            problem.transform.random_start(&mut rng)
        };
        let Some(outcome) = descend(&problem, z0) else {
            continue;
        };
        // Strict improvement keeps the earliest start on ties, making the
        // merge independent of evaluation order.
        let better = match &best {
            None => true,
            Some((current, _)) => outcome.cost < current.cost,
        };
        if better {
            best = Some((outcome, start));
        }
    }
    let (outcome, best_start) = best.ok_or(Error::ZeroDenominator)?;
    let params = problem.transform.to_external(&outcome.z);
    let residuals = problem.residuals(&outcome.z).ok_or(Error::ZeroDenominator)?;
    let sum_squares: f64 = residuals.iter().map(|r| r * r).sum();
    Ok(FitResult {
        params,
        objective: 0.5 * sum_squares,
        mean_squared_error: sum_squares / measurements.len() as f64,
        residuals,
        iterations: outcome.iterations,
        converged: outcome.converged,
        seed: config.seed,
        best_start,
    })
}
