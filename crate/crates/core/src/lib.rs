//! Simulation of a three-node flying relay network (edge node, gateway,
//! backhaul) used to compare 802.11n rate controllers: Minstrel-HT, an
//! SNR-feedback "Ideal" controller and the trajectory-aware TARA variant
//! of Minstrel-HT.
//!
//! The crate is organized bottom-up:
//!
//! - [`kinematics`]: piecewise-linear trajectories and random scenarios.
//! - [`channel`]: Friis SNR, the NIST OFDM error model and SNR thresholds.
//! - [`rate_control`]: the three controllers and their retry chains.
//! - [`simulator`]: the two-link discrete-event simulation.
//! - [`analysis`]: CCDFs, percentiles, confidence intervals and gains.
//! - [`csvfmt`]: CSV encoding shared by the artifact writers.

pub mod analysis;
pub mod channel;
pub mod csvfmt;
pub mod error;
pub mod kinematics;
pub mod rate_control;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
