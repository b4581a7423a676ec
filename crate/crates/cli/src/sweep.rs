use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use relaysim::analytics::{max_sum_throughput, system_outage};
use relaysim::benchmarks::{optimize_benchmark, simulate_benchmark};
use relaysim::engine::{run, RunConfig, ThroughputReport};
use relaysim::regions::analytic_probabilities;

use crate::config::{ExperimentConfig, Scheme, SnrPoint};
use crate::error::CliError;

/// One line of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma_db: f64,
    pub scheme: Scheme,
    pub r_sum_analytic: f64,
    pub r_sum_sim: f64,
    pub r_sum_stderr: f64,
    pub f_sys_analytic: f64,
    pub f_sys_sim: f64,
    pub f12: f64,
    pub f21: f64,
    pub starvation_rate: f64,
    pub n_slots: u64,
    pub seed: u64,
}

/// Closed-form sum throughput and system outage of a scheme.
pub fn analytic(cfg: &ExperimentConfig, point: SnrPoint, scheme: Scheme) -> Result<(f64, f64), CliError> {
    let params = cfg.params(point);
    Ok(match scheme.benchmark() {
        None => {
            let probs = analytic_probabilities(&params)?;
            (max_sum_throughput(&probs, params.rate0)?, system_outage(&probs)?)
        }
        Some(b) => {
            let res = optimize_benchmark(b, &params)?;
            (res.r_sum, res.f_sys)
        }
    })
}

/// Random stream used for `scheme` at sweep position `index`.
pub fn stream_index(index: usize, scheme: Scheme) -> u64 {
    let k = Scheme::ALL.iter().position(|&s| s == scheme).expect("listed scheme");
    (index * Scheme::ALL.len() + k) as u64
}

fn check(report: &ThroughputReport, rate0: f64) -> Result<(), CliError> {
    let identity = (report.f_sys - (1.0 - report.r_sum / rate0)).abs();
    if identity.is_nan() || identity >= 1e-9 || report.r_12 != report.r_r2 || report.r_21 != report.r_r1 {
        return Err(CliError::Invariant(format!(
            "inconsistent throughput report {report:?}"
        )));
    }
    Ok(())
}

fn simulate(cfg: &ExperimentConfig, index: usize, scheme: Scheme) -> Result<SweepRow, CliError> {
    let point = cfg.sweep[index];
    let params = cfg.params(point);
    let stream = stream_index(index, scheme);
    let report = match scheme.benchmark() {
        None => {
            let out = run(&RunConfig {
                params,
                fairness: cfg.fairness,
                n_slots: cfg.n_slots,
                warmup: cfg.warmup,
                seed: cfg.seed,
                stream,
                trace: false,
            })?;
            let t = out.sim.totals;
            if t.stored_1 - t.delivered_12 != out.sim.final_buffers.q1
                || t.stored_2 - t.delivered_21 != out.sim.final_buffers.q2
            {
                return Err(CliError::Invariant(format!("packet count mismatch at {} dB", point.db)));
            }
            out.sim.report
        }
        Some(b) => simulate_benchmark(b, &params, cfg.n_slots, cfg.seed, stream)?,
    };
    check(&report, params.rate0)?;
    let (r_sum_analytic, f_sys_analytic) = analytic(cfg, point, scheme)?;
    Ok(SweepRow {
        gamma_db: point.db,
        scheme,
        r_sum_analytic,
        r_sum_sim: report.r_sum,
        r_sum_stderr: report.r_sum_stderr,
        f_sys_analytic,
        f_sys_sim: report.f_sys,
        f12: report.f_12,
        f21: report.f_21,
        starvation_rate: report.starvation_rate,
        n_slots: cfg.n_slots,
        seed: cfg.seed,
    })
}

/// Simulates every (point, scheme) pair in parallel. Rows come back sorted by
/// SNR and scheme.
pub fn run_sweep(cfg: &ExperimentConfig, schemes: &[Scheme]) -> Result<Vec<SweepRow>, CliError> {
    let tasks: Vec<(usize, Scheme)> = (0..cfg.sweep.len())
        .flat_map(|i| schemes.iter().map(move |&s| (i, s)))
        .collect();
    let mut rows: Vec<(usize, SweepRow)> = tasks
        .par_iter()
        .map(|&(i, s)| simulate(cfg, i, s).map(|row| (i, row)))
        .collect::<Result<_, _>>()?;
    rows.sort_by_key(|(i, row)| (*i, row.scheme));
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
