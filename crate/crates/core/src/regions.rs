//! Probabilities of the five SNR regions under Rayleigh fading.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{classify_region, draw_gains, SnrRegion, SystemParams};
use crate::{Error, Result};

/// `[P_R1, P_R2, P_R3, P_R4, P_R5]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionProbabilities(pub [f64; 5]);

/// Tolerance on the total probability mass.
pub const SUM_TOL: f64 = 1e-12;

impl RegionProbabilities {
    /// Validates and wraps five region probabilities.
    pub fn new(p: [f64; 5]) -> Result<Self> {
        let probs = RegionProbabilities(p);
        probs.validate()?;
        Ok(probs)
    }

    pub fn validate(&self) -> Result<()> {
        for (l, &v) in self.0.iter().enumerate() {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidProbabilities(format!("P_R{} = {v}", l + 1)));
            }
        }
        let total: f64 = self.0.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidProbabilities(format!("sum is {total}")));
        }
        Ok(())
    }

    pub fn get(&self, region: SnrRegion) -> f64 {
        self.0[region.index()]
    }

    pub fn p1(&self) -> f64 {
        self.0[0]
    }
    pub fn p2(&self) -> f64 {
        self.0[1]
    }
    pub fn p3(&self) -> f64 {
        self.0[2]
    }
    pub fn p4(&self) -> f64 {
        self.0[3]
    }
    pub fn p5(&self) -> f64 {
        self.0[4]
    }

    pub fn p_max(&self) -> f64 {
        self.p3().max(self.p4())
    }

    pub fn p_min(&self) -> f64 {
        self.p3().min(self.p4())
    }

    /// Probabilities seen after exchanging the two users.
    pub fn swapped(&self) -> Self {
        let [a, b, c, d, e] = self.0;
        RegionProbabilities([a, b, d, c, e])
    }
}

/// Closed-form region probabilities for independent exponential link gains.
pub fn analytic_probabilities(params: &SystemParams) -> Result<RegionProbabilities> {
    params.validate()?;
    let thr = params.thresholds();
    let (t, s) = (thr.gamma_thr, thr.gamma_thr_sum);
    let a = 1.0 / (params.omega1 * params.gamma);
    let b = 1.0 / (params.omega2 * params.gamma);

    let ok1 = (-a * t).exp();
    let ok2 = (-b * t).exp();
    let fail1 = -(-a * t).exp_m1();
    let fail2 = -(-b * t).exp_m1();

    let w = s - 2.0 * t;
    let p2 = if (a - b).abs() < 1e-9 * a.max(b) {
        ok1 * ok2 * (-(-a * w).exp_m1()) - a * (-a * s).exp() * w
    } else {
        ok1 * ok2 * (-(-a * w).exp_m1()) - a * (-b * s).exp() * ((b - a) * t).exp() * ((b - a) * w).exp_m1() / (b - a)
    };
    let p2 = p2.clamp(0.0, 1.0);
    let p1 = (ok1 * ok2 - p2).clamp(0.0, 1.0);

    RegionProbabilities::new([p1, p2, ok1 * fail2, ok2 * fail1, fail1 * fail2])
}

/// Region frequencies over `n_samples` independent fading draws.
pub fn empirical_probabilities<R: Rng + ?Sized>(
    params: &SystemParams,
    n_samples: u64,
    rng: &mut R,
) -> Result<RegionProbabilities> {
    params.validate()?;
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let thr = params.thresholds();
    let mut counts = [0u64; 5];
    for _ in 0..n_samples {
        counts[classify_region(draw_gains(rng, params), thr).index()] += 1;
    }
    let n = n_samples as f64;
    let mut p = counts.map(|c| c as f64 / n);
    // keep the sum exactly one regardless of rounding
    p[4] = 1.0 - p[..4].iter().sum::<f64>();
    Ok(RegionProbabilities(p))
}

/// Exact `P_max` and its first-order high-SNR approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmaxHighSnr {
    pub exact: f64,
    pub asymptote: f64,
}

pub fn high_snr_pmax(params: &SystemParams) -> Result<PmaxHighSnr> {
    params.validate()?;
    let t = params.thresholds().gamma_thr;
    let x_min = t / (params.omega_min() * params.gamma);
    let x_max = t / (params.omega_max() * params.gamma);
    Ok(PmaxHighSnr {
        exact: -(-x_min).exp_m1() * (-x_max).exp(),
        asymptote: x_min,
    })
}
