//! Slot-level simulation and analysis of a two-way relay network where the
//! relay buffers traffic from both users and picks one of seven transmission
//! modes per slot, with every node sending at a single fixed rate.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: block Rayleigh fading draws, thresholds and SNR regions.
//! * [`regions`]: region probabilities, both closed form and empirical.
//! * [`policy`]: the randomized mode-selection dice and their rates.
//! * [`engine`]: the slot-by-slot queue simulation.
//! * [`analytics`]: closed-form throughput and outage.
//! * [`benchmarks`]: two-way, TDBC and MABC reference schemes.
//! * [`oracle`]: offline dynamic-programming and selection-metric checks.

pub mod analytics;
pub mod benchmarks;
pub mod channel;
pub mod engine;
mod error;
pub mod mode;
pub mod oracle;
pub mod policy;
pub mod regions;
pub mod rng;

pub use error::{Error, Result};

/// Absolute tolerance used whenever two probabilities are compared for
/// equality (branch selection, degenerate denominators).
pub const PROB_EPS: f64 = 1e-12;
