//! Mixed-criticality superposition coding (MC-SC) over a RIS-assisted THz downlink.
//!
//! The crate is organised bottom-up:
//!
//! - [`config`]: system parameters, defaults and the flat `key = value` file format.
//! - [`channel`]: deterministic link budget plus blockage and pointing-error sampling.
//! - [`mcsc`]: SINRs, decode indicators and closed-form outage probabilities.
//! - [`optimizer`]: max-min stability-gap power allocation (SCA with quadratic-transform
//!   updates) and its brute-force oracles.
//! - [`queueing`]: slot-level simulation of the HC/LC buffers.
//! - [`experiments`]: sweep drivers, the time-sharing baseline and beamwidth adaptation.
//! - [`export`]: CSV writers for sweeps and traces.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod export;
pub mod mcsc;
pub mod optimizer;
pub mod queueing;
pub mod rng;
pub mod search;

pub use config::SystemConfig;
pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
