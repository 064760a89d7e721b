//! Error type shared by all modules.

use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Input-contract and evaluation failures.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Expert counts violate `1 <= K <= E`.
    InvalidArch {
        total_experts: u32,
        active_per_token: u32,
    },
    /// A token count of zero where at least one token is required.
    ZeroTokenCount,
    /// A token count below the minimum the formula is defined for.
    TokenCountTooSmall { value: u64, min: u64 },
    /// Saturation ratio outside the open interval (0, 1).
    InvalidSaturation { value: f64 },
    /// Sparsity outside the open interval (0, 1).
    InvalidSparsity { value: f64 },
    /// Acceptance rate outside [0, 1].
    InvalidAcceptanceRate { value: f64 },
    /// Yield outside the attainable range `[1/(gamma+1), 1]`.
    YieldOutOfRange { value: f64, min: f64 },
    /// Draft length of zero.
    ZeroDraftLength,
    /// Inconsistent or non-positive hardware description.
    InvalidHardware { reason: &'static str },
    /// Inconsistent or non-positive parameter volumes.
    InvalidVolume { reason: &'static str },
    /// Arithmetic intensity with zero bytes accessed.
    ZeroBytesAccessed,
    /// Growth-curve construction or evaluation outside its domain.
    InvalidGrowthCurve { reason: &'static str },
    /// Cost parameters violating their invariants.
    InvalidCostParams { reason: &'static str },
    /// Batch size of zero.
    ZeroBatchSize,
    /// The speedup denominator evaluated to zero.
    ZeroDenominator,
    /// Batch list for a sweep is empty or not strictly increasing.
    InvalidSweepRange { reason: &'static str },
    /// A measurement violating its invariants; `index` is the position in
    /// the input slice when validated in bulk.
    InvalidMeasurement {
        index: Option<usize>,
        reason: &'static str,
    },
    /// An operation that needs at least one measurement got none.
    EmptyMeasurements,
    /// Stride of zero.
    ZeroStride,
    /// Subset offset at or past the end of the measurement list.
    BeginOutOfRange { begin: usize, total: usize },
    /// Fewer measurements than fittable parameters.
    TooFewMeasurements { have: usize, need: usize },
    /// Parameter bounds violating their invariants.
    InvalidBounds { reason: &'static str },
    /// Negative noise level.
    InvalidNoise { value: f64 },
    /// Synthesis grid with an empty axis.
    EmptyGrid { axis: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArch {
                total_experts,
                active_per_token,
            } => write!(
                f,
                "invalid MoE architecture: need 1 <= K <= E, got K={active_per_token}, E={total_experts}"
            ),
            Error::ZeroTokenCount => write!(f, "token count must be at least 1"),
            Error::TokenCountTooSmall { value, min } => {
                write!(f, "token count {value} below minimum {min}")
            }
            Error::InvalidSaturation { value } => {
                write!(f, "saturation ratio must lie in (0, 1), got {value}")
            }
            Error::InvalidSparsity { value } => {
                write!(f, "sparsity must lie in (0, 1), got {value}")
            }
            Error::InvalidAcceptanceRate { value } => {
                write!(f, "acceptance rate must lie in [0, 1], got {value}")
            }
            Error::YieldOutOfRange { value, min } => {
                write!(f, "yield must lie in [{min}, 1], got {value}")
            }
            Error::ZeroDraftLength => write!(f, "draft length must be at least 1"),
            Error::InvalidHardware { reason } => write!(f, "invalid hardware spec: {reason}"),
            Error::InvalidVolume { reason } => write!(f, "invalid volume spec: {reason}"),
            Error::ZeroBytesAccessed => {
                write!(f, "arithmetic intensity needs a nonzero byte count")
            }
            Error::InvalidGrowthCurve { reason } => write!(f, "invalid growth curve: {reason}"),
            Error::InvalidCostParams { reason } => write!(f, "invalid cost params: {reason}"),
            Error::ZeroBatchSize => write!(f, "batch size must be at least 1"),
            Error::ZeroDenominator => write!(f, "speedup denominator is zero"),
            Error::InvalidSweepRange { reason } => write!(f, "invalid sweep range: {reason}"),
            Error::InvalidMeasurement { index, reason } => match index {
                Some(i) => write!(f, "invalid measurement at index {i}: {reason}"),
                None => write!(f, "invalid measurement: {reason}"),
            },
            Error::EmptyMeasurements => write!(f, "at least one measurement required"),
            Error::ZeroStride => write!(f, "stride must be at least 1"),
            Error::BeginOutOfRange { begin, total } => {
                write!(f, "begin offset {begin} out of range for {total} measurements")
            }
            Error::TooFewMeasurements { have, need } => {
                write!(f, "need at least {need} measurements to fit, got {have}")
            }
            Error::InvalidBounds { reason } => write!(f, "invalid parameter bounds: {reason}"),
            Error::InvalidNoise { value } => write!(f, "noise level must be >= 0, got {value}"),
            Error::EmptyGrid { axis } => write!(f, "synthesis grid axis `{axis}` is empty"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
