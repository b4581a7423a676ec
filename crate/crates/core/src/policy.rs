//! Randomized mode selection.
//!
//! The policy never looks at the buffers. In every slot it observes the SNR
//! region and rolls the die attached to that region:
//!
//! | region | die | faces          |
//! |--------|-----|----------------|
//! | R1     | 1   | M3, M6         |
//! | R2     | 2   | M1, M2, M6     |
//! | R3     | 3   | M1, M4, M7     |
//! | R4     | 4   | M2, M5, M7     |
//! | R5     |     | M7 always      |
//!
//! The face probabilities depend only on the region probabilities. They are
//! chosen so that each relay buffer receives exactly as much as it forwards
//! on average, while the sum throughput is as large as possible. Which
//! formulas apply is decided by a [`StatisticalBranch`]: the ordering of
//! `P_R3` and `P_R4` together with where `P_R2 - P_R1` falls relative to
//! `P_min` and `2 P_max - P_min`.
//!
//! In the two lowest cells the solution is not unique. The remaining degree
//! of freedom is exposed as a fairness parameter `lambda` that trades rate
//! between the two directions without changing the sum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::SnrRegion;
use crate::mode::TransmissionMode;
use crate::regions::RegionProbabilities;
use crate::{Error, Result, PROB_EPS};

use TransmissionMode::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    /// `P_R3 <= P_R4`; also chosen on ties.
    P3AtMostP4,
    /// `P_R3 >= P_R4`.
    P3AtLeastP4,
}

/// Position of `d = P_R2 - P_R1` relative to the cell boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RatioCell {
    /// `d <= 0`
    AtMostZero,
    /// `0 <= d <= P_min`
    ZeroToOne,
    /// `P_min <= d <= 2 P_max - P_min`
    OneToBound,
    /// `d >= 2 P_max - P_min`
    AboveBound,
}

impl RatioCell {
    pub const ALL: [RatioCell; 4] = [
        RatioCell::AtMostZero,
        RatioCell::ZeroToOne,
        RatioCell::OneToBound,
        RatioCell::AboveBound,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatisticalBranch {
    pub order: Order,
    pub cell: RatioCell,
}

impl StatisticalBranch {
    /// All eight branches, column by column.
    pub fn all() -> impl Iterator<Item = StatisticalBranch> {
        [Order::P3AtMostP4, Order::P3AtLeastP4].into_iter().flat_map(|order| {
            RatioCell::ALL
                .into_iter()
                .map(move |cell| StatisticalBranch { order, cell })
        })
    }
}

/// Classifies region probabilities into one of the eight branches.
///
/// The ratio conditions are evaluated multiplied through by `P_min`, so the
/// classification stays well defined when `P_min = 0`. Values within
/// [`PROB_EPS`] of a boundary go to the lower cell.
pub fn identify_branch(probs: &RegionProbabilities) -> Result<StatisticalBranch> {
    probs.validate()?;
    let order = if probs.p3() <= probs.p4() + PROB_EPS {
        Order::P3AtMostP4
    } else {
        Order::P3AtLeastP4
    };
    Ok(StatisticalBranch {
        order,
        cell: ratio_cell(probs),
    })
}

pub(crate) fn ratio_cell(probs: &RegionProbabilities) -> RatioCell {
    let d = probs.p2() - probs.p1();
    let (lo, hi) = (probs.p_min(), probs.p_max());
    if d <= PROB_EPS {
        RatioCell::AtMostZero
    } else if d <= lo + PROB_EPS {
        RatioCell::ZeroToOne
    } else if d <= 2.0 * hi - lo + PROB_EPS {
        RatioCell::OneToBound
    } else {
        RatioCell::AboveBound
    }
}

/// The four dice of the policy, fully normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiceTable {
    /// Faces M3, M6 used in R1.
    pub die1: [f64; 2],
    /// Faces M1, M2, M6 used in R2.
    pub die2: [f64; 3],
    /// Faces M1, M4, M7 used in R3.
    pub die3: [f64; 3],
    /// Faces M2, M5, M7 used in R4.
    pub die4: [f64; 3],
    pub branch: StatisticalBranch,
    /// Fairness parameter after clamping to its feasible interval.
    pub fairness: f64,
}

const DIE1_FACES: [TransmissionMode; 2] = [M3, M6];
const DIE2_FACES: [TransmissionMode; 3] = [M1, M2, M6];
const DIE3_FACES: [TransmissionMode; 3] = [M1, M4, M7];
const DIE4_FACES: [TransmissionMode; 3] = [M2, M5, M7];
const R5_FACES: [TransmissionMode; 1] = [M7];
const R5_DIE: [f64; 1] = [1.0];

impl DiceTable {
    /// Face probabilities and their modes for the die rolled in `region`.
    pub fn die(&self, region: SnrRegion) -> (&[f64], &'static [TransmissionMode]) {
        match region {
            SnrRegion::R1 => (&self.die1, &DIE1_FACES),
            SnrRegion::R2 => (&self.die2, &DIE2_FACES),
            SnrRegion::R3 => (&self.die3, &DIE3_FACES),
            SnrRegion::R4 => (&self.die4, &DIE4_FACES),
            SnrRegion::R5 => (&R5_DIE, &R5_FACES),
        }
    }

    /// Probability that `mode` is chosen given that the slot is in `region`.
    pub fn probability(&self, region: SnrRegion, mode: TransmissionMode) -> f64 {
        let (p, faces) = self.die(region);
        faces.iter().zip(p).filter(|(m, _)| **m == mode).map(|(_, q)| *q).sum()
    }

    /// The table for the network with the user labels exchanged.
    pub fn swapped(&self) -> Self {
        let [a, b, c] = self.die2;
        DiceTable {
            die1: self.die1,
            die2: [b, a, c],
            die3: self.die4,
            die4: self.die3,
            branch: StatisticalBranch {
                order: match self.branch.order {
                    Order::P3AtMostP4 => Order::P3AtLeastP4,
                    Order::P3AtLeastP4 => Order::P3AtMostP4,
                },
                cell: self.branch.cell,
            },
            fairness: self.fairness,
        }
    }

    /// Checks that every die is a probability vector.
    pub fn validate(&self) -> Result<()> {
        let dice: [&[f64]; 4] = [&self.die1, &self.die2, &self.die3, &self.die4];
        for (n, die) in dice.into_iter().enumerate() {
            for (face, &v) in die.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidDie {
                        die: n + 1,
                        face,
                        value: v,
                    });
                }
            }
            let sum: f64 = die.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidDie {
                    die: n + 1,
                    face: die.len() - 1,
                    value: sum,
                });
            }
        }
        Ok(())
    }
}

/// Feasible interval of the fairness parameter for the given probabilities.
///
/// Cells without a degree of freedom return `(0, 0)`.
pub fn fairness_range(probs: &RegionProbabilities) -> Result<(f64, f64)> {
    let branch = identify_branch(probs)?;
    Ok(fairness_range_for(probs, branch))
}

fn fairness_range_for(probs: &RegionProbabilities, branch: StatisticalBranch) -> (f64, f64) {
    let p = oriented(probs, branch.order);
    match branch.cell {
        RatioCell::AtMostZero => (0.0, 1.0),
        RatioCell::ZeroToOne => (0.0, 1.0 - offset_ratio(&p)),
        RatioCell::OneToBound | RatioCell::AboveBound => (0.0, 0.0),
    }
}

/// `(P_R2 - P_R1) / P_min` restricted to `[0, 1]`, or 0 when `P_min = 0`.
fn offset_ratio(p: &RegionProbabilities) -> f64 {
    if p.p3() > 0.0 {
        ((p.p2() - p.p1()) / p.p3()).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn oriented(probs: &RegionProbabilities, order: Order) -> RegionProbabilities {
    match order {
        Order::P3AtMostP4 => *probs,
        Order::P3AtLeastP4 => probs.swapped(),
    }
}

/// Builds the dice for `probs` with fairness parameter `lambda`.
///
/// `lambda` is clamped to [`fairness_range`]. In the lowest cells a larger
/// `lambda` moves rate from user 2 to user 1 when `P_R3 <= P_R4`, and the
/// other way round when `P_R3 > P_R4`.
pub fn build_dice(probs: &RegionProbabilities, lambda: f64) -> Result<DiceTable> {
    let branch = identify_branch(probs)?;
    build_dice_for_branch(probs, branch, lambda)
}

/// Builds the dice using the formulas of an explicitly chosen branch.
///
/// Fails with [`Error::InvalidDie`] when the branch does not fit `probs`.
pub fn build_dice_for_branch(probs: &RegionProbabilities, branch: StatisticalBranch, lambda: f64) -> Result<DiceTable> {
    probs.validate()?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::param("lambda", lambda, "must lie in [0, 1]"));
    }
    let p = oriented(probs, branch.order);
    let (lo, hi) = fairness_range_for(probs, branch);
    let lambda = lambda.clamp(lo, hi);
    let raw = raw_faces(&p, branch.cell, lambda);
    let table = DiceTable {
        die1: normalize(1, &raw.die1)?,
        die2: normalize(2, &raw.die2)?,
        die3: normalize(3, &raw.die3)?,
        die4: normalize(4, &raw.die4)?,
        branch: StatisticalBranch {
            order: Order::P3AtMostP4,
            cell: branch.cell,
        },
        fairness: lambda,
    };
    Ok(match branch.order {
        Order::P3AtMostP4 => table,
        Order::P3AtLeastP4 => table.swapped(),
    })
}

/// The fairness parameter that maximizes the user 1 to user 2 rate.
pub fn max_r12_fairness(probs: &RegionProbabilities) -> Result<f64> {
    let (lo, hi) = fairness_range(probs)?;
    let r12 = |lambda| -> Result<f64> {
        let dice = build_dice(probs, lambda)?;
        Ok(expected_rates(probs, &dice, 1.0).r_r2)
    };
    Ok(if r12(hi)? > r12(lo)? { hi } else { lo })
}

/// Dice with the fairness parameter chosen by [`max_r12_fairness`].
pub fn build_dice_max_r12(probs: &RegionProbabilities) -> Result<DiceTable> {
    build_dice(probs, max_r12_fairness(probs)?)
}

/// Listed faces (all but the last) of each die, before validation.
struct RawFaces {
    die1: Vec<f64>,
    die2: Vec<f64>,
    die3: Vec<f64>,
    die4: Vec<f64>,
}

/// Face formulas for `P_R3 <= P_R4`.
fn raw_faces(p: &RegionProbabilities, cell: RatioCell, lambda: f64) -> RawFaces {
    let (p1, p2, p3, p4) = (p.p1(), p.p2(), p.p3(), p.p4());
    let all_m3 = vec![1.0];
    let all_m6 = vec![0.0, 0.0];
    let all_silent = vec![0.0, 0.0];
    match cell {
        RatioCell::AtMostZero | RatioCell::ZeroToOne => {
            let die1 = if cell == RatioCell::ZeroToOne || p1 <= 0.0 {
                all_m3
            } else {
                vec![0.5 + p2 / (2.0 * p1)]
            };
            let (die3, die4) = if p3 > 0.0 {
                let s = p3 / p4;
                let r = if cell == RatioCell::ZeroToOne {
                    offset_ratio(p)
                } else {
                    0.0
                };
                let m1 = lambda + r;
                (vec![m1, 1.0 - m1], vec![(1.0 - lambda) * s, lambda * s])
            } else {
                (all_silent.clone(), all_silent)
            };
            RawFaces {
                die1,
                die2: all_m6,
                die3,
                die4,
            }
        }
        RatioCell::OneToBound => RawFaces {
            die1: all_m3,
            die2: vec![0.5 - (p1 + p3) / (2.0 * p2), 0.0],
            die3: vec![1.0, 0.0],
            die4: vec![(p2 + p3 - p1) / (2.0 * p4), 0.0],
        },
        RatioCell::AboveBound => RawFaces {
            die1: all_m3,
            die2: vec![
                1.0 / 3.0 - (p1 + 2.0 * p3 - p4) / (3.0 * p2),
                1.0 / 3.0 - (p1 + 2.0 * p4 - p3) / (3.0 * p2),
            ],
            die3: vec![1.0, 0.0],
            die4: vec![1.0, 0.0],
        },
    }
}

fn normalize<const N: usize>(die: usize, listed: &[f64]) -> Result<[f64; N]> {
    debug_assert_eq!(listed.len() + 1, N);
    let check = |face: usize, v: f64| -> Result<f64> {
        if v.is_finite() && (-PROB_EPS..=1.0 + PROB_EPS).contains(&v) {
            Ok(v.clamp(0.0, 1.0))
        } else {
            Err(Error::InvalidDie { die, face, value: v })
        }
    };
    let mut out = [0.0; N];
    for (face, &v) in listed.iter().enumerate() {
        out[face] = check(face, v)?;
    }
    let last = 1.0 - out[..N - 1].iter().sum::<f64>();
    out[N - 1] = check(N - 1, last)?;
    Ok(out)
}

/// Rolls the die of `region`. Consumes one uniform unless the region is R5.
pub fn select_mode<R: Rng + ?Sized>(region: SnrRegion, dice: &DiceTable, rng: &mut R) -> TransmissionMode {
    if region == SnrRegion::R5 {
        return M7;
    }
    let (probs, faces) = dice.die(region);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (p, mode) in probs.iter().zip(faces).take(faces.len() - 1) {
        acc += p;
        if u < acc {
            return *mode;
        }
    }
    faces[faces.len() - 1]
}

/// Average per-link rates implied by a dice table when buffers never starve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkRates {
    pub r_1r: f64,
    pub r_2r: f64,
    pub r_r1: f64,
    pub r_r2: f64,
}

impl LinkRates {
    /// Sum of the two end-to-end rates, `r_1r + r_2r`.
    pub fn sum(&self) -> f64 {
        self.r_1r + self.r_2r
    }
}

pub fn expected_rates(probs: &RegionProbabilities, dice: &DiceTable, rate0: f64) -> LinkRates {
    let (p1, p2, p3, p4) = (probs.p1(), probs.p2(), probs.p3(), probs.p4());
    let broadcast = p1 * dice.die1[1] + p2 * dice.die2[2];
    LinkRates {
        r_1r: (p1 * dice.die1[0] + p2 * dice.die2[0] + p3 * dice.die3[0]) * rate0,
        r_2r: (p1 * dice.die1[0] + p2 * dice.die2[1] + p4 * dice.die4[0]) * rate0,
        r_r1: (p3 * dice.die3[1] + broadcast) * rate0,
        r_r2: (p4 * dice.die4[1] + broadcast) * rate0,
    }
}
