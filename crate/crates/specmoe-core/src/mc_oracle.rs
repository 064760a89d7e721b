//! Seeded Monte Carlo oracles for the closed-form expectations.
//!
//! These simulations realize the generative processes directly — tokens
//! drawing `K` distinct experts uniformly, draft chains accepting an i.i.d.
//! Bernoulli prefix — without sharing any formula evaluation with the
//! analytic modules, so agreement between the two is meaningful evidence.
//!
//! Randomness comes from ChaCha (8 rounds) with a fixed seeding scheme:
//! trial `i` uses stream `i` of the generator keyed by the caller's seed.
//! Per-trial streams make every trial's draw independent of how trials might
//! be partitioned across workers, so merged estimates cannot depend on the
//! partitioning.

use crate::error::{Error, Result};
use crate::expert_stats::MoEArch;
use alloc::{vec, vec::Vec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over sqrt(trials). A single trial carries
    /// no spread information, so `std_error` is infinite for `trials == 1`.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Streaming mean/variance accumulator (Welford).
struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn finish(self, seed: u64) -> McEstimate {
        #[allow(unused_imports)]
use num_traits::Float;
        let std_error = if self.count >= 2 {
            (self.m2 / (self.count - 1) as f64).sqrt() / (self.count as f64).sqrt()
        } else {
            f64::INFINITY
        };
        McEstimate {
            mean: self.mean,
            std_error,
            trials: self.count,
            seed,
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::TokenCountTooSmall { value: 0, min: 1 });
    }
    Ok(())
}

/// Generator for trial `index` under `seed`: one ChaCha stream per trial.
fn trial_rng(base: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(index);
    rng
}

/// Routing simulation yielding both the distinct-expert count and the
/// tokens-per-expert load from the same trials.
#[derive(Debug, Clone, Copy)]
pub struct RoutingEstimate {
    pub activated: McEstimate,
    pub mean_load: McEstimate,
}

/// Simulates `t` tokens each routing to `K` distinct experts chosen
/// uniformly from `E`, over independent trials.
pub fn simulate_routing(arch: &MoEArch, tokens: u64, trials: u64, seed: u64) -> Result<RoutingEstimate> {
    arch.validate()?;
    if tokens == 0 {
        return Err(Error::ZeroTokenCount);
    }
    check_trials(trials)?;
    let total = arch.total_experts as usize;
    let active = arch.active_per_token as usize;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut activated = Accumulator::new();
    let mut load = Accumulator::new();
    // Expert index pool for the partial shuffle and a trial-stamped hit
    // marker, both reused across trials.
    let mut pool: Vec<u32> = (0..arch.total_experts).collect();
    let mut hit_stamp = vec![u64::MAX; total];
    for trial in 0..trials {
        let mut rng = trial_rng(&base, trial);
        let mut distinct = 0u32;
        for _ in 0..tokens {
            // Partial Fisher-Yates: the first `active` slots become one
            // uniform K-subset without replacement.
            for slot in 0..active {
                let pick = rng.gen_range(slot..total);
                pool.swap(slot, pick);
                let expert = pool[slot] as usize;
                if hit_stamp[expert] != trial {
                    hit_stamp[expert] = trial;
                    distinct += 1;
                }
            }
        }
        activated.push(f64::from(distinct));
        load.push(tokens as f64 * active as f64 / f64::from(distinct));
    }
    Ok(RoutingEstimate {
        activated: activated.finish(seed),
        mean_load: load.finish(seed),
    })
}

/// Mean distinct activated experts over seeded routing trials.
pub fn simulate_activation(arch: &MoEArch, tokens: u64, trials: u64, seed: u64) -> Result<McEstimate> {
    Ok(simulate_routing(arch, tokens, trials, seed)?.activated)
}

/// Mean tokens-per-activated-expert over seeded routing trials.
///
/// Each trial contributes `t*K / N_trial`, so the estimate targets
/// `E[t*K/N]` while the closed form is `t*K / E[N]`; the gap between the two
/// shrinks with the variance of `N` and is bounded empirically by callers
/// via [`RoutingEstimate`] rather than corrected here.
pub fn simulate_expert_load(arch: &MoEArch, tokens: u64, trials: u64, seed: u64) -> Result<McEstimate> {
    Ok(simulate_routing(arch, tokens, trials, seed)?.mean_load)
}

/// Mean tokens emitted per speculation round: an i.i.d. Bernoulli(`alpha`)
/// prefix of `draft_length` drafts plus the bonus token.
pub fn simulate_acceptance(alpha: f64, draft_length: u32, rounds: u64, seed: u64) -> Result<McEstimate> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(Error::InvalidAcceptanceRate { value: alpha });
    }
    if draft_length == 0 {
        return Err(Error::ZeroDraftLength);
    }
    check_trials(rounds)?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Accumulator::new();
    for round in 0..rounds {
        let mut rng = trial_rng(&base, round);
        let mut accepted = 0u32;
        while accepted < draft_length && rng.gen::<f64>() < alpha {
            accepted += 1;
        }
        acc.push(f64::from(accepted + 1));
    }
    Ok(acc.finish(seed))
}
