//! Acceptance-rate arithmetic for chain speculation.
//!
//! A round drafts `gamma` tokens; the target accepts an i.i.d.
//! Bernoulli(`alpha`) prefix of them and always emits one bonus token from
//! the verification pass itself, so a round yields between 1 and `gamma + 1`
//! tokens. The yield ratio `sigma` normalizes the expected yield by that
//! maximum.

use crate::error::{Error, Result};
// Backs float math in no_std builds; std's inherent methods shadow it otherwise.
#[allow(unused_imports)]
use num_traits::Float;

/// Absolute tolerance of the numeric `alpha` inversion.
pub const INVERSION_TOLERANCE: f64 = 1e-9;

/// Consistency tolerance when both `alpha` and `sigma` are supplied.
const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

/// Speculation workload: draft length plus acceptance behavior, given as the
/// per-token acceptance rate, the per-round yield ratio, or both.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SpecConfig {
    /// Tokens drafted per round (`gamma`).
    pub draft_length: u32,
    /// Probability the target accepts the next draft token given an accepted
    /// prefix (`alpha`).
    #[cfg_attr(feature = "serde", serde(default))]
    pub acceptance_rate: Option<f64>,
    /// Generated tokens per round over the maximum `gamma + 1` (`sigma`).
    #[cfg_attr(feature = "serde", serde(default))]
    pub sigma: Option<f64>,
}

impl SpecConfig {
    /// Builds and validates a config. At least one of `acceptance_rate` and
    /// `sigma` must be present; when both are, they must agree within 1e-9.
    pub fn new(draft_length: u32, acceptance_rate: Option<f64>, sigma: Option<f64>) -> Result<Self> {
        let cfg = SpecConfig {
            draft_length,
            acceptance_rate,
            sigma,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_alpha(draft_length: u32, acceptance_rate: f64) -> Result<Self> {
        Self::new(draft_length, Some(acceptance_rate), None)
    }

    pub fn from_sigma(draft_length: u32, sigma: f64) -> Result<Self> {
        Self::new(draft_length, None, Some(sigma))
    }

    pub fn validate(&self) -> Result<()> {
        if self.draft_length == 0 {
            return Err(Error::ZeroDraftLength);
        }
        match (self.acceptance_rate, self.sigma) {
            (None, None) => Err(Error::InvalidAcceptanceRate { value: f64::NAN }),
            (Some(alpha), None) => {
                check_alpha(alpha)?;
                Ok(())
            }
            (None, Some(sigma)) => {
                check_sigma(sigma, self.draft_length)?;
                Ok(())
            }
            (Some(alpha), Some(sigma)) => {
                check_alpha(alpha)?;
                check_sigma(sigma, self.draft_length)?;
                let derived = sigma_from_alpha(alpha, self.draft_length)?;
                if (derived - sigma).abs() > CROSS_CHECK_TOLERANCE {
                    return Err(Error::YieldOutOfRange {
                        value: sigma,
                        min: derived,
                    });
                }
                Ok(())
            }
        }
    }

    /// The yield ratio, deriving it from `alpha` when not stored.
    pub fn yield_ratio(&self) -> Result<f64> {
        match (self.sigma, self.acceptance_rate) {
            (Some(sigma), _) => Ok(sigma),
            (None, Some(alpha)) => sigma_from_alpha(alpha, self.draft_length),
            (None, None) => Err(Error::InvalidAcceptanceRate { value: f64::NAN }),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(Error::InvalidAcceptanceRate { value: alpha });
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

/// Yield ratio from acceptance rate:
/// `sigma = ((1 - alpha^(gamma+1)) / (1 - alpha)) / (gamma + 1)`.
///
/// The expression has a removable singularity at `alpha = 1`, handled as an
/// explicit limit branch returning 1.
pub fn sigma_from_alpha(alpha: f64, draft_length: u32) -> Result<f64> {
    check_alpha(alpha)?;
    if draft_length == 0 {
        return Err(Error::ZeroDraftLength);
    }
    let rounds = f64::from(draft_length) + 1.0;
    if alpha == 1.0 {
        return Ok(1.0);
    }
    Ok((1.0 - alpha.powf(rounds)) / (1.0 - alpha) / rounds)
}

/// Inverts [`sigma_from_alpha`] by bracketed bisection.
///
/// The map is strictly increasing in `alpha` on [0, 1], so bisection always
/// converges; the result is accurate to [`INVERSION_TOLERANCE`].
pub fn alpha_from_sigma(sigma: f64, draft_length: u32) -> Result<f64> {
    if draft_length == 0 {
        return Err(Error::ZeroDraftLength);
    }
    check_sigma(sigma, draft_length)?;
    if sigma == 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // 60 halvings take the bracket width below 1e-18, well past tolerance.
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sigma_from_alpha(mid, draft_length)? < sigma {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < INVERSION_TOLERANCE * 1e-3 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Expected tokens generated per round: `sigma * (gamma + 1)`.
pub fn expected_tokens_per_round(cfg: &SpecConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.yield_ratio()? * (f64::from(cfg.draft_length) + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sigma_limits() {
        assert_eq!(sigma_from_alpha(0.0, 4).unwrap(), 0.2);
        assert_eq!(sigma_from_alpha(1.0, 7).unwrap(), 1.0);
        assert_relative_eq!(sigma_from_alpha(0.8, 3).unwrap(), 0.738, max_relative = 1e-12);
    }

    #[test]
    fn sigma_rejects_bad_alpha() {
        assert!(matches!(
            sigma_from_alpha(-0.1, 4),
            Err(Error::InvalidAcceptanceRate { .. })
        ));
        assert!(matches!(
            sigma_from_alpha(1.1, 4),
            Err(Error::InvalidAcceptanceRate { .. })
        ));
        assert!(matches!(sigma_from_alpha(0.5, 0), Err(Error::ZeroDraftLength)));
    }

    #[test]
    fn alpha_inversion_examples() {
        assert_eq!(alpha_from_sigma(1.0, 3).unwrap(), 1.0);
        assert!(alpha_from_sigma(0.2, 4).unwrap().abs() < 1e-9);
        assert_relative_eq!(
            alpha_from_sigma(0.90, 4).unwrap(),
            0.9472945702352835,
            epsilon = 1e-9
        );
        assert!(matches!(
            alpha_from_sigma(0.19, 4),
            Err(Error::YieldOutOfRange { .. })
        ));
        assert!(matches!(
            alpha_from_sigma(1.01, 4),
            Err(Error::YieldOutOfRange { .. })
        ));
    }

    #[test]
    fn expected_tokens_examples() {
        let none = SpecConfig::from_alpha(3, 0.0).unwrap();
        assert_eq!(expected_tokens_per_round(&none).unwrap(), 1.0);
        let all = SpecConfig::from_alpha(3, 1.0).unwrap();
        assert_eq!(expected_tokens_per_round(&all).unwrap(), 4.0);
        let mid = SpecConfig::from_alpha(3, 0.8).unwrap();
        assert_relative_eq!(
            expected_tokens_per_round(&mid).unwrap(),
            2.952,
            max_relative = 1e-12
        );
    }

    #[test]
    fn config_cross_check() {
        // Consistent pair accepted.
        let sigma = sigma_from_alpha(0.8, 4).unwrap();
        assert!(SpecConfig::new(4, Some(0.8), Some(sigma)).is_ok());
        // Inconsistent pair rejected.
        assert!(SpecConfig::new(4, Some(0.8), Some(0.95)).is_err());
        // At least one of the two must be present.
        assert!(SpecConfig::new(4, None, None).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sigma_strictly_increasing_in_alpha(
                alpha in 0.0f64..0.999,
                gamma in 1u32..16,
            ) {
                let lo = sigma_from_alpha(alpha, gamma).unwrap();
                let hi = sigma_from_alpha(alpha + 1e-3, gamma).unwrap();
                prop_assert!(hi > lo);
            }

            #[test]
            fn sigma_continuous_at_one(gamma in 1u32..16) {
                let near = sigma_from_alpha(1.0 - 1e-9, gamma).unwrap();
                prop_assert!((near - 1.0).abs() < 1e-8);
            }

            #[test]
            fn inversion_round_trip(alpha in 0.0f64..=1.0, gamma in 1u32..12) {
                let sigma = sigma_from_alpha(alpha, gamma).unwrap();
                let back = alpha_from_sigma(sigma, gamma).unwrap();
                prop_assert!((back - alpha).abs() < 1e-8);
            }
        }
    }
}
