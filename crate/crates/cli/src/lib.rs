//! Experiment driver behind the `relaysim` binary.
//!
//! Each subcommand maps to a function here that returns plain data; the binary
//! only parses flags and writes the results.

pub mod config;
pub mod error;
pub mod sweep;
pub mod verify;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use relaysim::engine::{run, PacketTotals, RunConfig, ThroughputReport, TraceRow};
use relaysim::policy::DiceTable;

pub use config::{ExperimentConfig, RawConfig, Scheme};
pub use error::CliError;

/// Result of the `run` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub gamma_db: f64,
    pub r_sum_analytic: f64,
    pub f_sys_analytic: f64,
    pub dice: DiceTable,
    pub report: ThroughputReport,
    pub totals: PacketTotals,
    pub n_slots: u64,
    pub warmup: u64,
    pub seed: u64,
}

fn run_config(cfg: &ExperimentConfig, trace: bool) -> RunConfig {
    RunConfig {
        params: cfg.params(cfg.point),
        fairness: cfg.fairness,
        n_slots: cfg.n_slots,
        warmup: cfg.warmup,
        seed: cfg.seed,
        stream: 0,
        trace,
    }
}

/// Simulates the proposed policy at the single configured SNR.
///
/// The per-slot trace is returned as well when the configuration asks for it.
pub fn run_point(cfg: &ExperimentConfig) -> Result<(RunSummary, Option<Vec<TraceRow>>), CliError> {
    let out = run(&run_config(cfg, cfg.trace))?;
    let (r_sum_analytic, f_sys_analytic) = sweep::analytic(cfg, cfg.point, Scheme::Proposed)?;
    let t = out.sim.totals;
    if t.stored_1 - t.delivered_12 != out.sim.final_buffers.q1
        || t.stored_2 - t.delivered_21 != out.sim.final_buffers.q2
    {
        return Err(CliError::Invariant("packet count mismatch".into()));
    }
    let summary = RunSummary {
        gamma_db: cfg.point.db,
        r_sum_analytic,
        f_sys_analytic,
        dice: out.dice,
        report: out.sim.report,
        totals: t,
        n_slots: cfg.n_slots,
        warmup: cfg.warmup,
        seed: cfg.seed,
    };
    Ok((summary, out.sim.trace))
}

/// Per-slot trace of the proposed policy at the configured SNR.
pub fn trace_point(cfg: &ExperimentConfig) -> Result<Vec<TraceRow>, CliError> {
    let out = run(&run_config(cfg, true))?;
    out.sim
        .trace
        .ok_or_else(|| CliError::Invariant("trace requested but not recorded".into()))
}

/// Writes `bytes` to `path`, or to standard output when there is no path.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Invariant(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn sweep_csv(rows: &[sweep::SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    sweep::write_csv(rows, &mut buf)?;
    Ok(buf)
}

pub fn trace_csv(rows: &[TraceRow]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    relaysim::engine::write_trace_csv(rows, &mut buf)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_point_matches_library() {
        let cfg =
            ExperimentConfig::try_from(config::parse_document("n_slots = 50000\ngamma_db = 15").unwrap()).unwrap();
        let (summary, trace) = run_point(&cfg).unwrap();
        assert!(trace.is_none());
        let direct = run(&RunConfig {
            warmup: 500,
            ..RunConfig::new(cfg.params(cfg.point), 50_000, 1)
        })
        .unwrap();
        assert_eq!(summary.report, direct.sim.report);
        assert!((summary.report.r_sum - summary.r_sum_analytic).abs() < 0.02);
    }

    #[test]
    fn trace_has_one_row_per_slot() {
        let cfg = ExperimentConfig::try_from(config::parse_document("n_slots = 300").unwrap()).unwrap();
        let rows = trace_point(&cfg).unwrap();
        assert_eq!(rows.len(), 300);
        let text = String::from_utf8(trace_csv(&rows).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 301);
    }
}
