//! Link-level Monte Carlo simulator for cell-free symbiotic radio.
//!
//! Distributed multi-antenna APs serve one receiver while a passive
//! backscatter device (BD) rides on their signal. The pipeline is
//!
//! 1. [`scenario`]: geometry and large-scale gains,
//! 2. [`channel`]: Rayleigh small-scale draws and projected training statistics,
//! 3. [`estimation`]: two-phase LMMSE of the direct and cascaded channels,
//! 4. [`beamforming`]: per-AP weighted-MRT,
//! 5. [`rates`]: perfect-CSI rates and imperfect-CSI lower bounds,
//! 6. [`montecarlo`]: reproducible parallel trials aggregated into rate regions,
//!
//! with [`cli`] handling config files and CSV output.
//!
//! Numeric code is generic over [`Real`]; the `*64` aliases below fix the
//! scalar to `f64`, which every shipped tolerance assumes.

// `!(x > 0)` is the NaN-rejecting form used by every argument check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod math;
pub mod montecarlo;
pub mod num;
pub mod rates;
pub mod scenario;

pub use error::{Error, Result};
pub use math::{ComplexVec, SimRng};
pub use num::Real;
pub use scenario::ScenarioConfig;

pub type ComplexVec64 = math::ComplexVec<f64>;
pub type ComplexVec32 = math::ComplexVec<f32>;
pub type LinkGains64 = scenario::LinkGains<f64>;
pub type LinkBudget64 = scenario::LinkBudget<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type ChannelEstimate64 = estimation::ChannelEstimate<f64>;
pub type BeamformerSet64 = beamforming::BeamformerSet<f64>;
pub type RatePair64 = rates::RatePair<f64>;
pub type RateRegion64 = montecarlo::RateRegion<f64>;
pub type RateRegion32 = montecarlo::RateRegion<f32>;
pub type Campaign64 = montecarlo::Campaign<f64>;
