//! Block Rayleigh fading, rate thresholds and the five SNR regions.

use std::f64::consts::LN_2;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::mode::TransmissionMode;
use crate::{Error, Result};

/// Link statistics and the operating point of the network.
///
/// `gamma` is the linear transmit SNR shared by all nodes; `omega1` and
/// `omega2` are the mean fading power gains of the user 1 and user 2 links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma: f64,
    pub rate0: f64,
}

impl SystemParams {
    pub fn new(omega1: f64, omega2: f64, gamma: f64, rate0: f64) -> Result<Self> {
        let p = SystemParams {
            omega1,
            omega2,
            gamma,
            rate0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric links with unit mean gain.
    pub fn symmetric(gamma: f64, rate0: f64) -> Result<Self> {
        Self::new(1.0, 1.0, gamma, rate0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("gamma", self.gamma),
            ("rate0", self.rate0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, v, "must be finite and strictly positive"));
            }
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds::from_valid_rate(self.rate0)
    }

    pub fn omega_min(&self) -> f64 {
        self.omega1.min(self.omega2)
    }

    pub fn omega_max(&self) -> f64 {
        self.omega1.max(self.omega2)
    }

    /// The same network with the user labels exchanged.
    pub fn swapped(&self) -> Self {
        SystemParams {
            omega1: self.omega2,
            omega2: self.omega1,
            ..*self
        }
    }
}

/// Decoding thresholds for a fixed rate `R0`: a single link carries `R0` iff
/// its SNR exceeds `gamma_thr = 2^R0 - 1`, and the multiple-access channel
/// carries `R0` from both users iff the SNR sum exceeds `2^(2 R0) - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub gamma_thr: f64,
    pub gamma_thr_sum: f64,
}

impl Thresholds {
    pub fn new(rate0: f64) -> Result<Self> {
        if !(rate0.is_finite() && rate0 > 0.0) {
            return Err(Error::param("rate0", rate0, "must be finite and strictly positive"));
        }
        Ok(Self::from_valid_rate(rate0))
    }

    fn from_valid_rate(rate0: f64) -> Self {
        Thresholds {
            gamma_thr: (rate0 * LN_2).exp_m1(),
            gamma_thr_sum: (2.0 * rate0 * LN_2).exp_m1(),
        }
    }
}

/// Instantaneous link SNRs of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw {
    pub snr1: f64,
    pub snr2: f64,
}

impl ChannelDraw {
    pub fn new(snr1: f64, snr2: f64) -> Self {
        ChannelDraw { snr1, snr2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SnrRegion {
    R1,
    R2,
    R3,
    R4,
    R5,
}

impl SnrRegion {
    pub const ALL: [SnrRegion; 5] = [
        SnrRegion::R1,
        SnrRegion::R2,
        SnrRegion::R3,
        SnrRegion::R4,
        SnrRegion::R5,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The region with the user labels exchanged.
    pub fn swapped(self) -> Self {
        match self {
            SnrRegion::R3 => SnrRegion::R4,
            SnrRegion::R4 => SnrRegion::R3,
            other => other,
        }
    }

    /// Decodability flags `O1..O7` shared by every draw in this region.
    pub fn flags(self) -> [bool; 7] {
        let (ok1, ok2, mac) = match self {
            SnrRegion::R1 => (true, true, true),
            SnrRegion::R2 => (true, true, false),
            SnrRegion::R3 => (true, false, false),
            SnrRegion::R4 => (false, true, false),
            SnrRegion::R5 => (false, false, false),
        };
        [ok1, ok2, mac, ok1, ok2, ok1 && ok2, true]
    }
}

impl fmt::Display for SnrRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.index() + 1)
    }
}

/// Gain from one uniform variate by inverting the exponential CDF.
pub fn exponential_from_uniform(u: f64, mean: f64) -> f64 {
    -mean * (-u).ln_1p()
}

/// Draws one slot of fading. Consumes exactly two uniforms, link 1 first.
pub fn draw_gains<R: Rng + ?Sized>(rng: &mut R, params: &SystemParams) -> ChannelDraw {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    ChannelDraw {
        snr1: params.gamma * exponential_from_uniform(u1, params.omega1),
        snr2: params.gamma * exponential_from_uniform(u2, params.omega2),
    }
}

pub fn classify_region(draw: ChannelDraw, thr: Thresholds) -> SnrRegion {
    let ok1 = draw.snr1 > thr.gamma_thr;
    let ok2 = draw.snr2 > thr.gamma_thr;
    match (ok1, ok2) {
        (true, true) if draw.snr1 + draw.snr2 > thr.gamma_thr_sum => SnrRegion::R1,
        (true, true) => SnrRegion::R2,
        (true, false) => SnrRegion::R3,
        (false, true) => SnrRegion::R4,
        (false, false) => SnrRegion::R5,
    }
}

/// Whether mode `mode` succeeds on `draw`, ignoring buffer contents.
pub fn decodable(mode: TransmissionMode, draw: ChannelDraw, thr: Thresholds) -> bool {
    classify_region(draw, thr).flags()[mode.index()]
}
