//! Selection metrics and the argmax check of the dice.

use serde::{Deserialize, Serialize};

use crate::channel::SnrRegion;
use crate::mode::TransmissionMode;
use crate::policy::{identify_branch, DiceTable, Order, RatioCell, StatisticalBranch};
use crate::regions::RegionProbabilities;
use crate::{Error, Result, PROB_EPS};

/// Multipliers `(mu1, mu2)` of the two buffer-balance constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionWeights {
    pub mu1: f64,
    pub mu2: f64,
}

const WEIGHT_TOL: f64 = 1e-12;

impl SelectionWeights {
    pub const A: SelectionWeights = SelectionWeights { mu1: 0.0, mu2: 1.0 };
    pub const B: SelectionWeights = SelectionWeights {
        mu1: 1.0 / 3.0,
        mu2: 1.0 / 3.0,
    };
    pub const C: SelectionWeights = SelectionWeights { mu1: 1.0, mu2: 0.0 };

    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        let w = SelectionWeights { mu1, mu2 };
        if w.is_feasible() {
            Ok(w)
        } else {
            Err(Error::InfeasibleWeights { mu1, mu2 })
        }
    }

    /// Inside the triangle with corners A, B and C.
    pub fn is_feasible(&self) -> bool {
        let (a, b) = (self.mu1, self.mu2);
        a.is_finite()
            && b.is_finite()
            && a + b <= 1.0 + WEIGHT_TOL
            && a + 2.0 * b >= 1.0 - WEIGHT_TOL
            && 2.0 * a + b >= 1.0 - WEIGHT_TOL
    }

    /// The corner whose metric ordering reproduces the dice of `branch`.
    pub fn for_branch(branch: StatisticalBranch) -> Self {
        match (branch.cell, branch.order) {
            (RatioCell::AboveBound, _) => Self::B,
            (_, Order::P3AtMostP4) => Self::A,
            (_, Order::P3AtLeastP4) => Self::C,
        }
    }
}

/// Metric values `Lambda_1..Lambda_7` of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics(pub [f64; 7]);

impl SelectionMetrics {
    pub fn get(&self, mode: TransmissionMode) -> f64 {
        self.0[mode.index()]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Modes within `tol` of the largest metric.
    pub fn argmax(&self, tol: f64) -> Vec<TransmissionMode> {
        let best = self.max();
        TransmissionMode::ALL
            .into_iter()
            .filter(|m| self.get(*m) >= best - tol)
            .collect()
    }
}

/// Metrics for decodability flags `O1..O7`.
pub fn selection_metrics(weights: SelectionWeights, flags: [bool; 7], rate0: f64) -> Result<SelectionMetrics> {
    if !weights.is_feasible() {
        return Err(Error::InfeasibleWeights {
            mu1: weights.mu1,
            mu2: weights.mu2,
        });
    }
    let (m1, m2) = (weights.mu1, weights.mu2);
    let coef = [1.0 - m1, 1.0 - m2, 2.0 - m1 - m2, m2, m1, m1 + m2, 0.0];
    let mut out = [0.0; 7];
    for k in 0..7 {
        out[k] = if flags[k] { coef[k] * rate0 } else { 0.0 };
    }
    Ok(SelectionMetrics(out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktViolation {
    pub region: SnrRegion,
    pub mode: TransmissionMode,
    pub probability: f64,
    pub metrics: SelectionMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub branch: StatisticalBranch,
    pub weights: SelectionWeights,
    pub violations: Vec<KktViolation>,
}

impl KktReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every mode the dice can select maximizes the selection metric
/// in its region. Regions and faces with probability at most `1e-12` are
/// skipped.
pub fn verify_policy_kkt(probs: &RegionProbabilities, dice: &DiceTable) -> Result<KktReport> {
    let branch = identify_branch(probs)?;
    let weights = SelectionWeights::for_branch(branch);
    let mut violations = Vec::new();
    for region in SnrRegion::ALL {
        if probs.get(region) <= PROB_EPS {
            continue;
        }
        let metrics = selection_metrics(weights, region.flags(), 1.0)?;
        let best = metrics.max();
        let (faces, modes) = dice.die(region);
        for (&p, &mode) in faces.iter().zip(modes) {
            if p > PROB_EPS && metrics.get(mode) < best - 1e-12 {
                violations.push(KktViolation {
                    region,
                    mode,
                    probability: p,
                    metrics,
                });
            }
        }
    }
    Ok(KktReport {
        branch,
        weights,
        violations,
    })
}
