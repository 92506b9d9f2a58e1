use rayon::prelude::*;
use serde::Serialize;

use crate::channel::NetworkTopology;
use crate::error::{Error, Result};
use crate::evaluation::alignment::verify_alignment;
use crate::evaluation::rates::{sum_rate, zf_rates};
use crate::evaluation::trial::{expected_interference_dim, run_trial, Scheme, SchemeOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// Strictly ascending, at least three points.
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl SweepSettings {
    /// 40 to 80 dB in 10 dB steps.
    pub fn default_grid() -> Vec<f64> {
        vec![40.0, 50.0, 60.0, 70.0, 80.0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofEstimate {
    pub snr_points_db: Vec<f64>,
    /// Mean sum rate per channel use (bits), one entry per SNR point.
    pub sum_rates_bits: Vec<f64>,
    /// Least-squares slope of `sum_rates_bits` against `log2 P`.
    pub slope_per_log2p: f64,
    /// RMS error of the linear fit.
    pub fit_residual: f64,
    pub trials: usize,
    pub trials_used: usize,
    pub skipped: usize,
    pub resamples: u64,
}

/// Ordinary least squares slope of `y` on `x` and the RMS residual.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, (sse / n).sqrt())
}

struct TrialOutcome {
    block_sum_rates: Option<Vec<f64>>,
    resamples: u32,
}

fn run_one(
    topology: NetworkTopology,
    scheme: Scheme,
    opts: &SchemeOptions,
    settings: &SweepSettings,
    trial: u64,
) -> Result<TrialOutcome> {
    let solved = match run_trial(topology, scheme, opts, settings.base_seed, trial) {
        Ok(t) => t,
        Err(e) if e.is_resample_trigger() => {
            return Ok(TrialOutcome { block_sum_rates: None, resamples: crate::channel::MAX_RESAMPLES })
        }
        Err(e) => return Err(e),
    };
    let expected = expected_interference_dim(&topology, scheme);
    // Ranks do not depend on P, so one verification covers the whole grid.
    let report = verify_alignment(&solved.effective_channel(1.0)?, expected);
    if !report.pass() {
        return Ok(TrialOutcome { block_sum_rates: None, resamples: solved.resamples });
    }
    let mut rates = Vec::with_capacity(settings.snr_grid_db.len());
    for &snr in &settings.snr_grid_db {
        let power = 10f64.powf(snr / 10.0);
        match zf_rates(&solved.effective_channel(power)?, &report) {
            Ok(r) => rates.push(sum_rate(&r)),
            Err(_) => return Ok(TrialOutcome { block_sum_rates: None, resamples: solved.resamples }),
        }
    }
    Ok(TrialOutcome { block_sum_rates: Some(rates), resamples: solved.resamples })
}

/// Mean zero-forcing sum rate per channel use over `settings.trials`
/// independent trials at each SNR, and its slope against `log2 P`.
///
/// Trials that exhaust their resample budget or fail verification are
/// skipped; more than 1% skipped is an error. Aggregation runs in trial
/// order, so the result does not depend on the worker count.
pub fn estimate_dof(
    topology: NetworkTopology,
    scheme: Scheme,
    opts: &SchemeOptions,
    settings: &SweepSettings,
) -> Result<DofEstimate> {
    let grid = &settings.snr_grid_db;
    if grid.len() < 3 {
        return Err(Error::InvalidSweep(format!("need at least 3 SNR points, got {}", grid.len())));
    }
    if grid.iter().any(|s| !s.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSweep("SNR grid must be finite and strictly ascending".into()));
    }
    if settings.trials == 0 {
        return Err(Error::InvalidSweep("need at least one trial".into()));
    }

    let work = || -> Vec<Result<TrialOutcome>> {
        (0..settings.trials as u64)
            .into_par_iter()
            .map(|t| run_one(topology, scheme, opts, settings, t))
            .collect()
    };
    let outcomes = match settings.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidSweep(e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut totals = vec![0.0; grid.len()];
    let mut used = 0usize;
    let mut resamples = 0u64;
    for outcome in outcomes {
        let outcome = outcome?;
        resamples += u64::from(outcome.resamples);
        if let Some(rates) = outcome.block_sum_rates {
            used += 1;
            totals.iter_mut().zip(&rates).for_each(|(acc, r)| *acc += r);
        }
    }
    let skipped = settings.trials - used;
    if skipped * 100 > settings.trials {
        return Err(Error::TooManySkipped { skipped, trials: settings.trials });
    }

    let slots = topology.total_slots() as f64;
    let sum_rates_bits: Vec<f64> = totals.iter().map(|t| t / used as f64 / slots).collect();
    let log2_power: Vec<f64> = grid.iter().map(|s| s / 10.0 * std::f64::consts::LOG2_10).collect();
    let (slope, fit_residual) = fit_slope(&log2_power, &sum_rates_bits);
    Ok(DofEstimate {
        snr_points_db: grid.clone(),
        sum_rates_bits,
        slope_per_log2p: slope,
        fit_residual,
        trials: settings.trials,
        trials_used: used,
        skipped,
        resamples,
    })
}
