//! Batch runner behind the `relay-ia` binary.
//!
//! `verify` certifies alignment for one or more channel draws and `sweep`
//! estimates degrees of freedom over an SNR grid. Both accept a flat TOML
//! config whose keys mirror the flags.
//!
//! Exit codes: 0 success, 1 alignment failure or too many skipped trials,
//! 2 configuration or I/O error, 3 not enough relays.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use relay_ia::prelude::*;

use config::{ExperimentConfig, RunArgs};
use output::{plot_path, render_plot_data, render_sweep, render_verify, write_atomically, TrialReport};

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "IA_RELAY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "relay-ia", version, about = "Relay-aided interference alignment experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check alignment ranks for `--trials` channel draws (default 1).
    Verify(RunArgs),
    /// Estimate degrees of freedom from the sum-rate slope (default 50 trials).
    Sweep(RunArgs),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Io(String),
    Infeasible { required: usize, available: usize },
    Alignment(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Alignment(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Infeasible { .. } => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Infeasible { required, available } => {
                write!(f, "infeasible: required relays: {required} (available {available})")
            }
            CliError::Alignment(m) => write!(f, "alignment failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InfeasibleRelayCount { required, available } => CliError::Infeasible { required, available },
            Error::InvalidTopology(_) | Error::TopologyMismatch { .. } | Error::InvalidSweep(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Alignment(other.to_string()),
        }
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn check_feasible(cfg: &ExperimentConfig) -> Result<(), CliError> {
    match cfg.missing_relays() {
        Some(required) => Err(CliError::Infeasible { required, available: cfg.relays }),
        None => Ok(()),
    }
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<(), CliError> {
    check_feasible(cfg)?;
    let topo = cfg.topology()?;
    let scheme = cfg.scheme.scheme();
    let opts = cfg.scheme_options();
    let expected = expected_interference_dim(&topo, scheme);

    let mut reports = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials as u64 {
        let report = match run_trial(topo, scheme, &opts, cfg.seed, trial) {
            Ok(t) => {
                let alignment = verify_alignment(&t.effective_channel(1.0)?, expected);
                TrialReport {
                    trial,
                    seed: Some(t.realization.seed()),
                    resamples: t.resamples,
                    pass: alignment.pass(),
                    error: None,
                    alignment: Some(alignment),
                }
            }
            Err(e) if e.is_resample_trigger() => TrialReport {
                trial,
                seed: None,
                resamples: MAX_RESAMPLES,
                pass: false,
                error: Some(e.to_string()),
                alignment: None,
            },
            Err(e) => return Err(e.into()),
        };
        print_trial(&report);
        reports.push(report);
    }

    if let Some(out) = &cfg.output_path {
        write_atomically(&[(out.clone(), render_verify(cfg, &reports)?)])?;
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::Alignment(format!("{failed} of {} trials failed verification", reports.len())));
    }
    Ok(())
}

fn print_trial(report: &TrialReport) {
    match &report.alignment {
        Some(a) => {
            for r in &a.receivers {
                println!(
                    "trial {} receiver {}: interference_rank={} desired_rank={} total_rank={} expected_interference={} {}",
                    report.trial,
                    r.receiver,
                    r.interference_rank,
                    r.desired_rank,
                    r.total_rank,
                    a.expected_interference_dim,
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
        }
        None => println!("trial {}: {}", report.trial, report.error.as_deref().unwrap_or("failed")),
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(), CliError> {
    check_feasible(cfg)?;
    let topo = cfg.topology()?;
    let settings =
        SweepSettings { snr_grid_db: cfg.snr_grid(), trials: cfg.trials, base_seed: cfg.seed, threads: thread_cap()? };
    let est = estimate_dof(topo, cfg.scheme.scheme(), &cfg.scheme_options(), &settings)?;

    for (snr, rate) in est.snr_points_db.iter().zip(&est.sum_rates_bits) {
        println!("snr_db={snr} mean_sum_rate_bits={rate:.6}");
    }
    let (num, den) = cfg.reference_dof();
    println!(
        "slope={:.4} fit_residual={:.3e} reference_dof={num}/{den} trials_used={} skipped={}",
        est.slope_per_log2p, est.fit_residual, est.trials_used, est.skipped
    );

    if let Some(out) = &cfg.output_path {
        write_atomically(&[
            (out.clone(), render_sweep(cfg, &est)?),
            (plot_path(out), render_plot_data(cfg, &est)),
        ])?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match &cli.command {
        Command::Verify(a) => a.resolve(1).and_then(|cfg| run_verify(&cfg)),
        Command::Sweep(a) => a.resolve(50).and_then(|cfg| run_sweep(&cfg)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
