//! Analytical performance model for speculative decoding (SD) on
//! mixture-of-experts (MoE) LLMs.
//!
//! Speculative decoding trades one expensive autoregressive forward pass per
//! token for a cheap draft pass plus a multi-token verification pass. Whether
//! that trade wins depends on how much more the verification pass costs than a
//! plain decode step, which for MoE models is governed by expert activation
//! statistics and the hardware roofline. This crate provides:
//!
//! - closed-form expert activation and load statistics ([`expert_stats`]),
//! - acceptance-rate / yield arithmetic for draft chains ([`speculation`]),
//! - ridge-point arithmetic and the piecewise execution-time growth curve
//!   ([`roofline`]),
//! - the ten-parameter forward-time decomposition and speedup model
//!   ([`cost_model`]),
//! - bounded least-squares calibration of those parameters from measured
//!   speedups ([`calibration`]),
//! - seeded Monte Carlo oracles that check every closed form independently
//!   ([`mc_oracle`]), and
//! - self-validation suites combining the above ([`validation`]).
//!
//! All model times are in arbitrary-but-consistent units; every reported
//! output is a ratio. The crate is `no_std`-compatible (requires `alloc`);
//! enable the default `std` feature for std float intrinsics.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod calibration;
pub mod cost_model;
pub mod error;
pub mod expert_stats;
pub mod mc_oracle;
pub mod roofline;
pub mod speculation;
pub mod validation;

pub use calibration::{FitConfig, FitResult, Measurement, ParamBounds};
pub use cost_model::{CostParams, SpeedupReport, SpeedupVariant, SweepResult};
pub use error::{Error, Result};
pub use expert_stats::MoEArch;
pub use mc_oracle::McEstimate;
pub use roofline::{HardwareSpec, VolumeSpec};
pub use speculation::SpecConfig;
