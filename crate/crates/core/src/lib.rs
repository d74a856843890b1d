//! Capacity analysis for sparse multipath channels in the wideband, low-snr
//! regime.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: exponential integral, seeded Gaussian streams, least-squares
//!   fitting and exact summation.
//! - [`channel`]: delay-Doppler binning of discrete paths, coherence geometry,
//!   the T-W-P relation and generic sub-linear scaling laws.
//! - [`capacity`]: coherent ergodic capacity of the Rayleigh block-fading
//!   channel (closed form, low-snr bounds, Monte Carlo).
//! - [`training`]: the pilot-based scheme with MMSE estimation and its
//!   optimized lower bound.
//! - [`asymptotics`]: low-snr expansion fits, peaky signaling and the
//!   T-vs-W scaling region map.

pub mod asymptotics;
pub mod capacity;
pub mod channel;
mod error;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};

pub use asymptotics::{ExpansionFit, PeakyParams, RegionVerdict, Scheme};
pub use capacity::{CapacityMethod, CapacityResult};
pub use channel::{
    ChannelParams, CoherenceGeometry, Path, PathSet, ScalingLaw, SignalingParams, VirtualChannel,
};
pub use numerics::{PolyFit, RngStream};
pub use training::TrainingDesign;

/// log2(e), the conversion factor from nats to bits.
pub const LOG2_E: f64 = std::f64::consts::LOG2_E;
