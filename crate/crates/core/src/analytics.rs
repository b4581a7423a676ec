//! Closed-form sum throughput and system outage of the optimal policy.

use serde::{Deserialize, Serialize};

use crate::channel::SystemParams;
use crate::regions::{high_snr_pmax, RegionProbabilities};
use crate::{Result, PROB_EPS};

/// True when the optimum is limited by the weaker of R3 and R4, i.e. when
/// `P_R2 - P_R1 <= 2 P_max - P_min`.
pub fn min_region_limited(probs: &RegionProbabilities) -> bool {
    probs.p2() - probs.p1() <= 2.0 * probs.p_max() - probs.p_min() + PROB_EPS
}

/// Largest achievable `R_12 + R_21` in bits per symbol.
pub fn max_sum_throughput(probs: &RegionProbabilities, rate0: f64) -> Result<f64> {
    probs.validate()?;
    let [p1, p2, p3, p4, _] = probs.0;
    let normalized = if min_region_limited(probs) {
        p1 + p2 + probs.p_min()
    } else {
        2.0 / 3.0 * (2.0 * p1 + p2 + p3 + p4)
    };
    Ok(normalized * rate0)
}

/// Smallest achievable system outage, `1 - max_sum_throughput / R0`.
pub fn system_outage(probs: &RegionProbabilities) -> Result<f64> {
    probs.validate()?;
    Ok(if min_region_limited(probs) {
        probs.p5() + probs.p_max()
    } else {
        1.0 / 3.0 - 2.0 / 3.0 * (probs.p1() - probs.p5())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighSnrSummary {
    /// Sum throughput reached as the SNR grows without bound.
    pub r_sum_limit: f64,
    /// Outage `P_max` at the given SNR.
    pub f_sys_exact: f64,
    /// First-order approximation `gamma_thr / (Omega_min gamma)`.
    pub f_sys_asymptote: f64,
}

pub fn high_snr_summary(params: &SystemParams) -> Result<HighSnrSummary> {
    let pmax = high_snr_pmax(params)?;
    Ok(HighSnrSummary {
        r_sum_limit: params.rate0,
        f_sys_exact: pmax.exact,
        f_sys_asymptote: pmax.asymptote,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::analytic_probabilities;

    fn rp(p: [f64; 5]) -> RegionProbabilities {
        RegionProbabilities::new(p).unwrap()
    }

    #[test]
    fn examples() {
        let perfect = rp([1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(max_sum_throughput(&perfect, 1.0).unwrap(), 1.0);
        assert_eq!(system_outage(&perfect).unwrap(), 0.0);

        let p = analytic_probabilities(&SystemParams::symmetric(10.0, 1.0).unwrap()).unwrap();
        assert!((max_sum_throughput(&p, 1.0).unwrap() - (-0.1f64).exp()).abs() < 1e-12);
        assert!((system_outage(&p).unwrap() - 0.0951625820).abs() < 1e-9);

        let q = rp([0.1, 0.6, 0.1, 0.1, 0.1]);
        assert!((max_sum_throughput(&q, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((max_sum_throughput(&q, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_min_region_uses_first_form() {
        // P_min = 0 with P_R2 > P_R1: still limited by the weak region
        let p = rp([0.1, 0.3, 0.0, 0.6, 0.0]);
        assert!(min_region_limited(&p));
        assert!((max_sum_throughput(&p, 1.0).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn high_snr() {
        let s = high_snr_summary(&SystemParams::symmetric(1e6, 1.0).unwrap()).unwrap();
        assert_eq!(s.r_sum_limit, 1.0);
        assert!((s.f_sys_asymptote - 1e-6).abs() < 1e-20);
        assert!((s.f_sys_exact / s.f_sys_asymptote - 1.0).abs() < 0.005);
        let d = high_snr_summary(&SystemParams::new(2.0, 2.0, 1e6, 1.0).unwrap()).unwrap();
        assert!((d.f_sys_asymptote - s.f_sys_asymptote / 2.0).abs() < 1e-20);
    }

    #[test]
    fn exact_outage_tracks_closed_form_at_high_snr() {
        for db in [40.0, 50.0, 60.0] {
            let params = SystemParams::symmetric(10f64.powf(db / 10.0), 1.0).unwrap();
            let probs = analytic_probabilities(&params).unwrap();
            let s = high_snr_summary(&params).unwrap();
            let gap = system_outage(&probs).unwrap() - s.f_sys_exact;
            assert!((gap - probs.p5()).abs() < 1e-15 && gap < 1.1 * s.f_sys_asymptote.powi(2));
        }
    }
}
