//! Reference schemes with fixed phase schedules: traditional two-way relaying,
//! time-division broadcast (TDBC) and multiple-access broadcast (MABC).
//!
//! Each scheme cycles through a fixed set of modes, one per phase. The relay
//! buffers whatever it decodes, so a direction's throughput is the smaller of
//! what enters and what leaves the relay. A broadcast phase (M6) succeeds
//! only when both users can decode, exactly as in the engine.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{draw_gains, SystemParams};
use crate::engine::{simulate, ErrorEstimate, Scheduler, ThroughputReport};
use crate::mode::TransmissionMode;
use crate::regions::analytic_probabilities;
use crate::rng::{stream, SimRng};
use crate::{Error, Result};

use TransmissionMode::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkScheme {
    TwoWay,
    Tdbc,
    Mabc,
}

impl BenchmarkScheme {
    pub const ALL: [BenchmarkScheme; 3] = [BenchmarkScheme::TwoWay, BenchmarkScheme::Tdbc, BenchmarkScheme::Mabc];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkScheme::TwoWay => "twoway",
            BenchmarkScheme::Tdbc => "tdbc",
            BenchmarkScheme::Mabc => "mabc",
        }
    }
}

impl fmt::Display for BenchmarkScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "twoway" => Ok(BenchmarkScheme::TwoWay),
            "tdbc" => Ok(BenchmarkScheme::Tdbc),
            "mabc" => Ok(BenchmarkScheme::Mabc),
            _ => Err(Error::UnknownScheme(s.to_string())),
        }
    }
}

/// Per-slot success probabilities of the individual links and of the
/// multiple-access phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSuccess {
    pub e1: f64,
    pub e2: f64,
    pub p_mac: f64,
}

impl LinkSuccess {
    /// Probability that a broadcast reaches both users.
    pub fn broadcast(&self) -> f64 {
        self.e1 * self.e2
    }
}

pub fn link_success_probs(params: &SystemParams) -> Result<LinkSuccess> {
    let t = params.thresholds().gamma_thr;
    let probs = analytic_probabilities(params)?;
    Ok(LinkSuccess {
        e1: (-t / (params.omega1 * params.gamma)).exp(),
        e2: (-t / (params.omega2 * params.gamma)).exp(),
        p_mac: probs.p1(),
    })
}

/// Ordered phases of a schedule with their time fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub phases: Vec<(TransmissionMode, f64)>,
}

impl BenchmarkPlan {
    pub fn fractions(&self) -> Vec<f64> {
        self.phases.iter().map(|p| p.1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub scheme: BenchmarkScheme,
    pub r_sum: f64,
    pub f_sys: f64,
    pub plan: BenchmarkPlan,
}

/// Optimal phase fractions and the resulting sum throughput.
///
/// Every scheme is optimal when the inflow and outflow of each buffer are
/// equal, which gives the fractions in closed form:
///
/// * two-way: `R_sum = e1 e2 / (e1 + e2) R0`
/// * TDBC: `R_sum = 2 e1 e2 / (1 + e1 + e2) R0`
/// * MABC: `R_sum = 2 p q / (p + q) R0` with `p = P_R1`, `q = e1 e2`
pub fn optimize_benchmark(scheme: BenchmarkScheme, params: &SystemParams) -> Result<BenchmarkResult> {
    let link = link_success_probs(params)?;
    let (e1, e2, q) = (link.e1, link.e2, link.broadcast());
    let (r_norm, phases) = match scheme {
        BenchmarkScheme::TwoWay => {
            if e1 > 0.0 && e2 > 0.0 {
                let f = 1.0 / (2.0 * (1.0 / e1 + 1.0 / e2));
                (2.0 * f, vec![(M1, f / e1), (M2, f / e2), (M5, f / e2), (M4, f / e1)])
            } else {
                (0.0, vec![(M1, 0.25), (M2, 0.25), (M5, 0.25), (M4, 0.25)])
            }
        }
        BenchmarkScheme::Tdbc => {
            if q > 0.0 {
                let f = q / (1.0 + e1 + e2);
                (2.0 * f, vec![(M1, f / e1), (M2, f / e2), (M6, f / q)])
            } else {
                (0.0, vec![(M1, 1.0 / 3.0), (M2, 1.0 / 3.0), (M6, 1.0 / 3.0)])
            }
        }
        BenchmarkScheme::Mabc => {
            let p = link.p_mac;
            if p + q > 0.0 {
                let tau = q / (p + q);
                (2.0 * p * q / (p + q), vec![(M3, tau), (M6, 1.0 - tau)])
            } else {
                (0.0, vec![(M3, 0.5), (M6, 0.5)])
            }
        }
    };
    Ok(BenchmarkResult {
        scheme,
        r_sum: r_norm * params.rate0,
        f_sys: 1.0 - r_norm,
        plan: BenchmarkPlan { phases },
    })
}

/// Splits `n` slots among `fractions` by largest remainders; ties go to the
/// earlier phase.
pub fn apportion(fractions: &[f64], n: u64) -> Vec<u64> {
    let total: f64 = fractions.iter().sum();
    let exact: Vec<f64> = fractions.iter().map(|f| f / total * n as f64).collect();
    let mut counts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

/// Contiguous phase blocks over the horizon.
struct PhaseSchedule {
    /// `(first slot after the block, mode)` in slot order.
    ends: Vec<(u64, TransmissionMode)>,
    current: usize,
}

impl PhaseSchedule {
    fn new(plan: &BenchmarkPlan, n: u64) -> Self {
        let counts = apportion(&plan.fractions(), n);
        let mut end = 0;
        let ends = plan
            .phases
            .iter()
            .zip(counts)
            .map(|(&(mode, _), c)| {
                end += c;
                (end, mode)
            })
            .collect();
        PhaseSchedule { ends, current: 0 }
    }
}

impl Scheduler for PhaseSchedule {
    fn choose(&mut self, slot: u64, _region: crate::channel::SnrRegion, _rng: &mut SimRng) -> TransmissionMode {
        while self.current < self.ends.len() && slot >= self.ends[self.current].0 {
            self.current += 1;
        }
        self.ends.get(self.current).map_or(M7, |e| e.1)
    }
}

/// Simulates an arbitrary phase plan on fading from stream `stream_index`.
pub fn simulate_plan(
    plan: &BenchmarkPlan,
    params: &SystemParams,
    n_slots: u64,
    seed: u64,
    stream_index: u64,
) -> Result<ThroughputReport> {
    params.validate()?;
    if plan.phases.iter().any(|p| !(p.1 >= 0.0 && p.1.is_finite())) || plan.fractions().iter().sum::<f64>() <= 0.0 {
        return Err(Error::Config(
            "phase fractions must be nonnegative and not all zero".into(),
        ));
    }
    let mut rng = stream(seed, stream_index);
    let out = simulate(
        &mut PhaseSchedule::new(plan, n_slots),
        |_, rng| draw_gains(rng, params),
        params.thresholds(),
        params.rate0,
        n_slots,
        0,
        &mut rng,
        ErrorEstimate::Iid,
        false,
    )?;
    Ok(out.report)
}

/// Simulates a scheme with its optimal fractions.
pub fn simulate_benchmark(
    scheme: BenchmarkScheme,
    params: &SystemParams,
    n_slots: u64,
    seed: u64,
    stream_index: u64,
) -> Result<ThroughputReport> {
    let plan = optimize_benchmark(scheme, params)?.plan;
    simulate_plan(&plan, params, n_slots, seed, stream_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(gamma: f64) -> SystemParams {
        SystemParams::symmetric(gamma, 1.0).unwrap()
    }

    #[test]
    fn parse_names() {
        assert_eq!("TwoWay".parse::<BenchmarkScheme>().unwrap(), BenchmarkScheme::TwoWay);
        assert_eq!("two-way".parse::<BenchmarkScheme>().unwrap(), BenchmarkScheme::TwoWay);
        assert_eq!("MABC".parse::<BenchmarkScheme>().unwrap(), BenchmarkScheme::Mabc);
        assert!(matches!(
            "proposed".parse::<BenchmarkScheme>(),
            Err(Error::UnknownScheme(_))
        ));
    }

    #[test]
    fn link_probs() {
        let l = link_success_probs(&at(10.0)).unwrap();
        assert!((l.e1 - 0.904837418).abs() < 1e-9);
        let hi = link_success_probs(&at(1e15)).unwrap();
        assert!(hi.e1 > 1.0 - 1e-12 && hi.p_mac > 1.0 - 1e-12);
        let strong = link_success_probs(&SystemParams::new(2.0, 1.0, 10.0, 1.0).unwrap()).unwrap();
        assert!(strong.e1 > l.e1);
    }

    #[test]
    fn closed_forms() {
        let p = at(10.0);
        let e = (-0.1f64).exp();
        let two = optimize_benchmark(BenchmarkScheme::TwoWay, &p).unwrap();
        assert!((two.r_sum - e / 2.0).abs() < 1e-12);
        let tdbc = optimize_benchmark(BenchmarkScheme::Tdbc, &p).unwrap();
        assert!((tdbc.r_sum - 2.0 * e * e / (1.0 + 2.0 * e)).abs() < 1e-12);
        for r in [&two, &tdbc, &optimize_benchmark(BenchmarkScheme::Mabc, &p).unwrap()] {
            assert!((r.plan.fractions().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((r.f_sys - (1.0 - r.r_sum)).abs() < 1e-12);
        }
    }

    #[test]
    fn saturation() {
        let p = at(1e12);
        let val = |s| optimize_benchmark(s, &p).unwrap().r_sum;
        assert!((val(BenchmarkScheme::TwoWay) - 0.5).abs() < 1e-9);
        assert!((val(BenchmarkScheme::Tdbc) - 2.0 / 3.0).abs() < 1e-9);
        assert!((val(BenchmarkScheme::Mabc) - 1.0).abs() < 1e-9);
        let tau = optimize_benchmark(BenchmarkScheme::Mabc, &p).unwrap().plan.phases[0].1;
        assert!((tau - 0.5).abs() < 1e-9);
    }

    #[test]
    fn apportionment() {
        assert_eq!(apportion(&[0.5, 0.25, 0.25], 10), vec![5, 3, 2]);
        assert_eq!(apportion(&[1.0 / 3.0; 3], 10), vec![4, 3, 3]);
        let c = apportion(&[0.123, 0.456, 0.421], 1_000_003);
        assert_eq!(c.iter().sum::<u64>(), 1_000_003);
    }

    #[test]
    fn mabc_without_access_phase_delivers_nothing() {
        let plan = BenchmarkPlan {
            phases: vec![(M3, 0.0), (M6, 1.0)],
        };
        let r = simulate_plan(&plan, &at(10.0), 10_000, 1, 0).unwrap();
        assert_eq!(r.r_sum, 0.0);
    }

    #[test]
    fn simulation_matches_closed_form() {
        let p = at(10.0);
        for (k, s) in BenchmarkScheme::ALL.into_iter().enumerate() {
            let want = optimize_benchmark(s, &p).unwrap().r_sum;
            let got = simulate_benchmark(s, &p, 1_000_000, 21, k as u64).unwrap();
            assert!(
                (got.r_sum - want).abs() < 3.0 * got.r_sum_stderr,
                "{s}: {} vs {want}",
                got.r_sum
            );
        }
    }
}
