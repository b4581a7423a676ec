//! Experiment configuration: a TOML or JSON document with every field optional.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use relaysim::benchmarks::BenchmarkScheme;
use relaysim::channel::SystemParams;

use crate::error::CliError;

/// A scheme evaluated in a sweep. Sort order is the row order of the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Proposed,
    TwoWay,
    Tdbc,
    Mabc,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::TwoWay, Scheme::Tdbc, Scheme::Mabc];

    pub fn benchmark(self) -> Option<BenchmarkScheme> {
        match self {
            Scheme::Proposed => None,
            Scheme::TwoWay => Some(BenchmarkScheme::TwoWay),
            Scheme::Tdbc => Some(BenchmarkScheme::Tdbc),
            Scheme::Mabc => Some(BenchmarkScheme::Mabc),
        }
    }

    pub fn name(self) -> &'static str {
        match self.benchmark() {
            None => "proposed",
            Some(b) => b.name(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s.trim().eq_ignore_ascii_case("proposed") {
            return Ok(Scheme::Proposed);
        }
        let b: BenchmarkScheme = s
            .parse()
            .map_err(|e: relaysim::Error| CliError::Config(e.to_string()))?;
        Ok(match b {
            BenchmarkScheme::TwoWay => Scheme::TwoWay,
            BenchmarkScheme::Tdbc => Scheme::Tdbc,
            BenchmarkScheme::Mabc => Scheme::Mabc,
        })
    }
}

/// Inclusive range of transmit SNRs in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    /// Grid points `start + k * step` up to `stop`, tolerant to rounding.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as i64;
        (0..=n.max(0)).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    /// Sweep table; standard output when absent.
    pub csv: Option<PathBuf>,
    /// JSON report of `run`, `verify` and sweeps.
    pub json: Option<PathBuf>,
    /// Per-slot trace of `trace` and of runs with `trace = true`.
    pub trace_csv: Option<PathBuf>,
}

/// The document as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub omega1: f64,
    pub omega2: f64,
    pub rate0: f64,
    /// Transmit SNR of single-point commands.
    pub gamma_db: f64,
    pub sweep: Option<SweepRange>,
    pub n_slots: u64,
    /// Slots discarded before averaging; 1% of `n_slots` when absent.
    pub warmup: Option<u64>,
    pub seed: u64,
    /// Fairness parameter; the rate from user 1 to user 2 is maximized when absent.
    pub fairness: Option<f64>,
    pub schemes: Vec<Scheme>,
    pub outputs: Outputs,
    pub trace: bool,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig {
            omega1: 1.0,
            omega2: 1.0,
            rate0: 1.0,
            gamma_db: 10.0,
            sweep: None,
            n_slots: 1_000_000,
            warmup: None,
            seed: 1,
            fairness: None,
            schemes: Scheme::ALL.to_vec(),
            outputs: Outputs::default(),
            trace: false,
        }
    }
}

/// One transmit SNR in both units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrPoint {
    pub db: f64,
    pub linear: f64,
}

impl SnrPoint {
    fn from_db(db: f64) -> Self {
        SnrPoint {
            db,
            linear: 10f64.powf(db / 10.0),
        }
    }
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub omega1: f64,
    pub omega2: f64,
    pub rate0: f64,
    /// The single point of `run` and `trace`.
    pub point: SnrPoint,
    /// The points of `sweep` and `bench`; just `point` without a sweep range.
    pub sweep: Vec<SnrPoint>,
    pub n_slots: u64,
    pub warmup: u64,
    pub seed: u64,
    pub fairness: Option<f64>,
    pub schemes: Vec<Scheme>,
    pub outputs: Outputs,
    pub trace: bool,
}

impl ExperimentConfig {
    pub fn params(&self, point: SnrPoint) -> SystemParams {
        SystemParams {
            omega1: self.omega1,
            omega2: self.omega2,
            gamma: point.linear,
            rate0: self.rate0,
        }
    }
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = CliError;

    fn try_from(raw: RawConfig) -> Result<Self, CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if raw.n_slots == 0 {
            return bad("n_slots must be at least 1".into());
        }
        let warmup = raw.warmup.unwrap_or(raw.n_slots / 100);
        if warmup >= raw.n_slots {
            return bad(format!("warmup {warmup} must be smaller than n_slots {}", raw.n_slots));
        }
        if let Some(l) = raw.fairness {
            if !(0.0..=1.0).contains(&l) {
                return bad(format!("fairness {l} must lie in [0, 1]"));
            }
        }
        if !raw.gamma_db.is_finite() {
            return bad("gamma_db must be finite".into());
        }
        let point = SnrPoint::from_db(raw.gamma_db);
        let sweep = match raw.sweep {
            None => vec![point],
            Some(r) => {
                if !(r.step > 0.0 && r.step.is_finite()) {
                    return bad(format!("sweep step {} must be positive", r.step));
                }
                if !(r.start.is_finite() && r.stop.is_finite() && r.stop >= r.start) {
                    return bad(format!("sweep range {}..{} is empty", r.start, r.stop));
                }
                r.points().into_iter().map(SnrPoint::from_db).collect()
            }
        };
        let mut schemes = raw.schemes;
        schemes.sort();
        schemes.dedup();
        if schemes.is_empty() {
            return bad("schemes must not be empty".into());
        }
        let cfg = ExperimentConfig {
            omega1: raw.omega1,
            omega2: raw.omega2,
            rate0: raw.rate0,
            point,
            sweep,
            n_slots: raw.n_slots,
            warmup,
            seed: raw.seed,
            fairness: raw.fairness,
            schemes,
            outputs: raw.outputs,
            trace: raw.trace,
        };
        for p in cfg.sweep.iter().chain([&cfg.point]) {
            cfg.params(*p).validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(cfg)
    }
}

/// Parses a document; JSON when it starts with `{`, TOML otherwise.
pub fn parse_document(text: &str) -> Result<RawConfig, CliError> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub fn load(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_document(&text)
}
