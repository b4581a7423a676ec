use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relaysim_cli::config::{self, RawConfig, SweepRange};
use relaysim_cli::verify::{run_verification, VerifyOptions};
use relaysim_cli::{
    emit, run_point, sweep, sweep_csv, to_json, trace_csv, trace_point, CliError, ExperimentConfig, Scheme,
};

/// Simulator for a buffer-aided two-way relay network.
#[derive(Debug, Parser)]
#[command(name = "relaysim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the proposed policy at one SNR and print a JSON summary.
    Run(ConfigArgs),
    /// Analytic and simulated throughput of every scheme over an SNR range, as CSV.
    Sweep(ConfigArgs),
    /// Like `sweep`, restricted to the benchmark schemes.
    Bench(ConfigArgs),
    /// Run the oracle suites; exits with status 3 if any check fails.
    Verify {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        suites: SuiteArgs,
    },
    /// Per-slot CSV of the proposed policy at one SNR.
    Trace(ConfigArgs),
}

/// Every flag overrides the matching key of the configuration file.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML or JSON configuration document.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega1: Option<f64>,
    #[arg(long)]
    omega2: Option<f64>,
    #[arg(long)]
    rate0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma_db: Option<f64>,
    /// First SNR of the sweep in dB.
    #[arg(long, allow_negative_numbers = true, requires_all = ["sweep_stop", "sweep_step"])]
    sweep_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["sweep_start", "sweep_step"])]
    sweep_stop: Option<f64>,
    #[arg(long, requires_all = ["sweep_start", "sweep_stop"])]
    sweep_step: Option<f64>,
    #[arg(long)]
    n_slots: Option<u64>,
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    fairness: Option<f64>,
    /// Comma-separated subset of proposed, twoway, tdbc, mabc.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    trace_csv: Option<PathBuf>,
    /// Keep the per-slot trace of `run` (written to --trace-csv).
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = VerifyOptions::default().points_per_branch)]
    points_per_branch: usize,
    #[arg(long, default_value_t = VerifyOptions::default().region_samples)]
    region_samples: u64,
    #[arg(long, default_value_t = VerifyOptions::default().short_traces)]
    short_traces: usize,
    #[arg(long, default_value_t = VerifyOptions::default().long_traces)]
    long_traces: usize,
    #[arg(long, default_value_t = VerifyOptions::default().long_length)]
    long_length: usize,
}

impl ConfigArgs {
    fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => config::load(path)?,
            None => RawConfig::default(),
        };
        let set = |target: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *target = v;
            }
        };
        set(&mut raw.omega1, self.omega1);
        set(&mut raw.omega2, self.omega2);
        set(&mut raw.rate0, self.rate0);
        set(&mut raw.gamma_db, self.gamma_db);
        if let (Some(start), Some(stop), Some(step)) = (self.sweep_start, self.sweep_stop, self.sweep_step) {
            raw.sweep = Some(SweepRange { start, stop, step });
        }
        raw.n_slots = self.n_slots.unwrap_or(raw.n_slots);
        raw.warmup = self.warmup.or(raw.warmup);
        raw.seed = self.seed.unwrap_or(raw.seed);
        raw.fairness = self.fairness.or(raw.fairness);
        raw.schemes = self.schemes.unwrap_or(raw.schemes);
        raw.outputs.csv = self.csv.or(raw.outputs.csv);
        raw.outputs.json = self.json.or(raw.outputs.json);
        raw.outputs.trace_csv = self.trace_csv.or(raw.outputs.trace_csv);
        raw.trace |= self.trace;
        ExperimentConfig::try_from(raw)
    }
}

fn sweep_command(cfg: &ExperimentConfig, schemes: &[Scheme]) -> Result<(), CliError> {
    let rows = sweep::run_sweep(cfg, schemes)?;
    if let Some(path) = &cfg.outputs.json {
        emit(Some(path), &to_json(&rows)?)?;
    }
    emit(cfg.outputs.csv.as_deref(), &sweep_csv(&rows)?)
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            if cfg.trace && cfg.outputs.trace_csv.is_none() {
                return Err(CliError::Config("trace = true needs an outputs.trace_csv path".into()));
            }
            let (summary, trace) = run_point(&cfg)?;
            if let (Some(rows), Some(path)) = (trace, &cfg.outputs.trace_csv) {
                emit(Some(path), &trace_csv(&rows)?)?;
            }
            emit(cfg.outputs.json.as_deref(), &to_json(&summary)?)?;
        }
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            sweep_command(&cfg, &cfg.schemes)?;
        }
        Command::Bench(args) => {
            let cfg = args.resolve()?;
            let mut schemes: Vec<Scheme> = cfg
                .schemes
                .iter()
                .copied()
                .filter(|s| s.benchmark().is_some())
                .collect();
            if schemes.is_empty() {
                schemes = Scheme::ALL[1..].to_vec();
            }
            sweep_command(&cfg, &schemes)?;
        }
        Command::Verify { config, suites } => {
            let cfg = config.resolve()?;
            let opts = VerifyOptions {
                seed: cfg.seed,
                points_per_branch: suites.points_per_branch,
                region_samples: suites.region_samples,
                short_traces: suites.short_traces,
                long_traces: suites.long_traces,
                long_length: suites.long_length,
            };
            let report = run_verification(&opts, &cfg.params(cfg.point))?;
            emit(cfg.outputs.json.as_deref(), &to_json(&report)?)?;
            if !report.passed {
                for suite in report.suites.iter().filter(|s| !s.passed()) {
                    eprintln!(
                        "suite {} failed {} of {} cases",
                        suite.name, suite.failures, suite.cases
                    );
                }
                return Ok(ExitCode::from(3));
            }
        }
        Command::Trace(args) => {
            let cfg = args.resolve()?;
            let rows = trace_point(&cfg)?;
            emit(cfg.outputs.trace_csv.as_deref(), &trace_csv(&rows)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
