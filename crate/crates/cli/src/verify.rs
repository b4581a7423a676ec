//! Oracle suites behind the `verify` command.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use relaysim::analytics::max_sum_throughput;
use relaysim::channel::SystemParams;
use relaysim::engine::{fading_trace, policy_dice, replay, DicePolicy};
use relaysim::oracle::dp::{dp_offline_optimum, exhaustive_optimum, EXHAUSTIVE_MAX};
use relaysim::oracle::verify_policy_kkt;
use relaysim::policy::{build_dice, expected_rates, fairness_range, identify_branch, StatisticalBranch};
use relaysim::regions::{analytic_probabilities, empirical_probabilities, RegionProbabilities};
use relaysim::rng::{stream, SimRng};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random probability vectors per statistical branch.
    pub points_per_branch: usize,
    pub region_samples: u64,
    /// Short traces compared against enumeration.
    pub short_traces: usize,
    /// Traces for the dominance check and their length.
    pub long_traces: usize,
    pub long_length: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            points_per_branch: 125,
            region_samples: 1_000_000,
            short_traces: 200,
            long_traces: 6,
            long_length: 2_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// First few failure descriptions.
    pub details: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str, outcomes: Vec<Option<String>>) -> Self {
        let cases = outcomes.len();
        let failed: Vec<String> = outcomes.into_iter().flatten().collect();
        SuiteResult {
            name,
            cases,
            failures: failed.len(),
            details: failed.into_iter().take(10).collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub suites: Vec<SuiteResult>,
    /// Largest relative gap between the offline optimum and the policy.
    pub max_dp_gap: f64,
    pub passed: bool,
}

/// A random probability vector, with coordinates zeroed now and then.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R) -> RegionProbabilities {
    loop {
        let mut w = [0.0; 5];
        for x in &mut w {
            *x = if rng.gen_bool(0.1) {
                0.0
            } else {
                -(1.0 - rng.gen::<f64>()).ln()
            };
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let mut p = w.map(|x| x / total);
        p[4] = (1.0 - p[..4].iter().sum::<f64>()).max(0.0);
        if let Ok(p) = RegionProbabilities::new(p) {
            return p;
        }
    }
}

/// A random probability vector that falls in `branch`.
pub fn random_probabilities_in<R: Rng + ?Sized>(branch: StatisticalBranch, rng: &mut R) -> RegionProbabilities {
    loop {
        let p = random_probabilities(rng);
        if identify_branch(&p).is_ok_and(|b| b == branch) {
            return p;
        }
    }
}

/// Everything the table of dice promises, for one probability vector.
pub fn check_policy_point(p: &RegionProbabilities, lambda: f64) -> Option<String> {
    let fail = |what: &str| Some(format!("{what} at {:?}, lambda {lambda}", p.0));
    let Ok(dice) = build_dice(p, lambda) else {
        return fail("dice construction failed");
    };
    if dice.validate().is_err() {
        return fail("invalid dice");
    }
    let r = expected_rates(p, &dice, 1.0);
    if (r.r_1r - r.r_r2).abs() > 1e-10 || (r.r_2r - r.r_r1).abs() > 1e-10 {
        return fail("buffer balance");
    }
    let best = max_sum_throughput(p, 1.0).ok()?;
    if (r.sum() - best).abs() > 1e-10 {
        return fail("sum throughput");
    }
    let (lo, hi) = fairness_range(p).ok()?;
    for l in [lo, hi] {
        let other = expected_rates(p, &build_dice(p, l).ok()?, 1.0).sum();
        if (other - r.sum()).abs() > 1e-10 {
            return fail("fairness changes the sum");
        }
    }
    match verify_policy_kkt(p, &dice) {
        Ok(rep) if rep.passed() => None,
        Ok(rep) => fail(&format!("{} metric violations", rep.violations.len())),
        Err(e) => fail(&e.to_string()),
    }
}

fn policy_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut rng = stream(opts.seed, 0);
    let mut outcomes = Vec::new();
    for branch in StatisticalBranch::all() {
        for _ in 0..opts.points_per_branch {
            let p = random_probabilities_in(branch, &mut rng);
            let lambda = rng.gen::<f64>();
            outcomes.push(check_policy_point(&p, lambda));
        }
    }
    SuiteResult::new("policy", outcomes)
}

fn region_suite(opts: &VerifyOptions, params: &[SystemParams]) -> Result<SuiteResult, CliError> {
    let mut outcomes = Vec::new();
    for (i, sp) in params.iter().enumerate() {
        let a = analytic_probabilities(sp)?;
        let e = empirical_probabilities(sp, opts.region_samples, &mut stream(opts.seed, 100 + i as u64))?;
        let n = opts.region_samples as f64;
        for k in 0..5 {
            let sd = (a.0[k] * (1.0 - a.0[k]) / n).sqrt();
            let ok = (a.0[k] - e.0[k]).abs() <= 3.0 * sd + 1e-12;
            outcomes.push((!ok).then(|| format!("region {} at {sp:?}: {} vs {}", k + 1, a.0[k], e.0[k])));
        }
    }
    Ok(SuiteResult::new("regions", outcomes))
}

fn trace_params(i: usize, base: &SystemParams) -> SystemParams {
    let db = [5.0, 15.0, 25.0][i % 3];
    SystemParams {
        gamma: 10f64.powf(db / 10.0),
        ..*base
    }
}

fn exhaustive_suite(opts: &VerifyOptions, base: &SystemParams) -> SuiteResult {
    let outcomes = (0..opts.short_traces)
        .into_par_iter()
        .map(|i| {
            let sp = SystemParams {
                gamma: 10f64.powf((i % 16) as f64 / 1.5 - 2.0),
                ..*base
            };
            let n = 1 + i % EXHAUSTIVE_MAX;
            let f = fading_trace(&sp, n, &mut stream(opts.seed, 1000 + i as u64));
            let dp = dp_offline_optimum(&f, sp.thresholds(), sp.rate0, EXHAUSTIVE_MAX)
                .ok()?
                .delivered;
            let brute = exhaustive_optimum(&f, sp.thresholds(), sp.rate0).ok()?;
            (dp != brute).then(|| format!("trace {i}: dp {dp} vs enumeration {brute}"))
        })
        .collect();
    SuiteResult::new("dp_enumeration", outcomes)
}

/// Offline optimum and policy throughput, both per slot, on one trace.
pub fn dominance_case(
    sp: &SystemParams,
    length: usize,
    fading_rng: &mut SimRng,
    policy_rng: &mut SimRng,
) -> Result<(f64, f64), CliError> {
    let f = fading_trace(sp, length, fading_rng);
    let dp = dp_offline_optimum(&f, sp.thresholds(), sp.rate0, length.max(1))?;
    let dice = policy_dice(sp, None)?;
    let out = replay(&mut DicePolicy { dice }, &f, sp.thresholds(), sp.rate0, policy_rng)?;
    Ok((dp.delivered / length as f64, out.report.r_sum))
}

fn dominance_suite(opts: &VerifyOptions, base: &SystemParams) -> Result<(SuiteResult, f64), CliError> {
    let cases: Vec<(f64, Option<String>)> = (0..opts.long_traces)
        .into_par_iter()
        .map(|i| {
            let sp = trace_params(i, base);
            let (dp, pol) = dominance_case(
                &sp,
                opts.long_length,
                &mut stream(opts.seed, 2000 + i as u64),
                &mut stream(opts.seed, 3000 + i as u64),
            )?;
            let best = max_sum_throughput(&analytic_probabilities(&sp)?, sp.rate0)?;
            let gap = (dp - pol) / best;
            Ok((
                gap,
                (dp < pol - 1e-12).then(|| format!("trace {i}: optimum {dp} below policy {pol}")),
            ))
        })
        .collect::<Result<_, CliError>>()?;
    let max_gap = cases.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    Ok((
        SuiteResult::new("dp_dominance", cases.into_iter().map(|c| c.1).collect()),
        max_gap,
    ))
}

/// Runs every suite for the channel of `base` (its SNR is replaced per suite).
pub fn run_verification(opts: &VerifyOptions, base: &SystemParams) -> Result<VerifyReport, CliError> {
    let region_params = [
        *base,
        SystemParams {
            omega1: 2.0,
            omega2: 1.0,
            ..*base
        },
    ];
    let (dominance, max_dp_gap) = dominance_suite(opts, base)?;
    let suites = vec![
        policy_suite(opts),
        region_suite(opts, &region_params)?,
        exhaustive_suite(opts, base),
        dominance,
    ];
    let passed = suites.iter().all(SuiteResult::passed);
    Ok(VerifyReport {
        options: *opts,
        suites,
        max_dp_gap,
        passed,
    })
}
