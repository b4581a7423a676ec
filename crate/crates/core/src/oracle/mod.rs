//! Offline checks of the policy.
//!
//! [`dp`] computes the best possible delivery on a known fading sequence, an
//! upper bound for any causal scheduler. [`kkt`] checks that every mode the
//! dice can pick maximizes the per-slot selection metric for weights that
//! match the statistical branch.

pub mod dp;
pub mod kkt;

pub use dp::{dp_offline_optimum, exhaustive_optimum, DpSolution, DEFAULT_HORIZON_CAP};
pub use kkt::{selection_metrics, verify_policy_kkt, KktReport, KktViolation, SelectionMetrics, SelectionWeights};
