use std::io::Write;
use std::path::{Path, PathBuf};

use relay_ia::evaluation::{AlignmentReport, DofEstimate};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::{ExperimentConfig, Format};
use crate::CliError;

/// Writes every `(path, contents)` pair through a sibling temp file and
/// renames them into place only after all writes succeeded.
pub fn write_atomically(files: &[(PathBuf, Vec<u8>)]) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
        tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
        tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Companion plot-data path: `<out>.plot.dat`.
pub fn plot_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".plot.dat");
    PathBuf::from(name)
}

#[derive(Serialize)]
pub struct TrialReport {
    pub trial: u64,
    /// Seed of the realization that was finally used.
    pub seed: Option<u64>,
    pub resamples: u32,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment: Option<AlignmentReport>,
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    config: &'a ExperimentConfig,
    pass: bool,
    trials: &'a [TrialReport],
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn json_bytes<T: Serialize>(doc: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("report is serializable");
    bytes.push(b'\n');
    bytes
}

pub fn render_verify(cfg: &ExperimentConfig, trials: &[TrialReport]) -> Result<Vec<u8>, CliError> {
    let pass = trials.iter().all(|t| t.pass);
    match cfg.format {
        Format::Json => Ok(json_bytes(&VerifyDocument { config: cfg, pass, trials })),
        Format::Csv => {
            let header = [
                "trial",
                "seed",
                "receiver",
                "interference_rank",
                "desired_rank",
                "total_rank",
                "desired_streams",
                "expected_interference_dim",
                "pass",
            ];
            let mut rows = Vec::new();
            for t in trials {
                let seed = t.seed.map(|s| s.to_string()).unwrap_or_default();
                match &t.alignment {
                    Some(report) => rows.extend(report.receivers.iter().map(|r| {
                        vec![
                            t.trial.to_string(),
                            seed.clone(),
                            r.receiver.to_string(),
                            r.interference_rank.to_string(),
                            r.desired_rank.to_string(),
                            r.total_rank.to_string(),
                            r.desired_streams.to_string(),
                            report.expected_interference_dim.to_string(),
                            r.pass.to_string(),
                        ]
                    })),
                    None => {
                        let mut row = vec![t.trial.to_string(), seed];
                        row.extend(std::iter::repeat_n(String::new(), 6));
                        row.push("false".into());
                        rows.push(row);
                    }
                }
            }
            csv_bytes(&header, rows)
        }
    }
}

#[derive(Serialize)]
struct SweepPoint {
    snr_db: f64,
    mean_sum_rate_bits: f64,
    trials_used: usize,
    skipped: usize,
}

#[derive(Serialize)]
struct SweepSummary {
    slope: f64,
    fit_residual: f64,
    reference_dof: f64,
    reference_dof_exact: String,
    trials: usize,
    trials_used: usize,
    skipped: usize,
    resamples: u64,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    config: &'a ExperimentConfig,
    points: Vec<SweepPoint>,
    summary: SweepSummary,
}

fn opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_sweep(cfg: &ExperimentConfig, est: &DofEstimate) -> Result<Vec<u8>, CliError> {
    let (num, den) = cfg.reference_dof();
    let reference = num as f64 / den as f64;
    match cfg.format {
        Format::Json => {
            let points = est
                .snr_points_db
                .iter()
                .zip(&est.sum_rates_bits)
                .map(|(&snr_db, &mean_sum_rate_bits)| SweepPoint {
                    snr_db,
                    mean_sum_rate_bits,
                    trials_used: est.trials_used,
                    skipped: est.skipped,
                })
                .collect();
            let summary = SweepSummary {
                slope: est.slope_per_log2p,
                fit_residual: est.fit_residual,
                reference_dof: reference,
                reference_dof_exact: format!("{num}/{den}"),
                trials: est.trials,
                trials_used: est.trials_used,
                skipped: est.skipped,
                resamples: est.resamples,
            };
            Ok(json_bytes(&SweepDocument { config: cfg, points, summary }))
        }
        Format::Csv => {
            let header = [
                "row",
                "scheme",
                "M",
                "N",
                "K",
                "J",
                "L",
                "snr_db",
                "mean_sum_rate_bits",
                "trials_used",
                "skipped",
                "slope",
                "fit_residual",
                "reference_dof",
            ];
            let prefix = |row: &str| {
                vec![
                    row.to_string(),
                    cfg.scheme.as_str().to_string(),
                    cfg.m.to_string(),
                    cfg.n.to_string(),
                    opt(cfg.k),
                    cfg.relays.to_string(),
                    cfg.antennas.to_string(),
                ]
            };
            let mut rows: Vec<Vec<String>> = est
                .snr_points_db
                .iter()
                .zip(&est.sum_rates_bits)
                .map(|(snr, rate)| {
                    let mut r = prefix("point");
                    r.extend([
                        snr.to_string(),
                        rate.to_string(),
                        est.trials_used.to_string(),
                        est.skipped.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]);
                    r
                })
                .collect();
            let mut summary = prefix("summary");
            summary.extend([
                String::new(),
                String::new(),
                est.trials_used.to_string(),
                est.skipped.to_string(),
                est.slope_per_log2p.to_string(),
                est.fit_residual.to_string(),
                reference.to_string(),
            ]);
            rows.push(summary);
            csv_bytes(&header, rows)
        }
    }
}

/// Whitespace-separated `snr_db mean_sum_rate_bits` columns for plotting tools.
pub fn render_plot_data(cfg: &ExperimentConfig, est: &DofEstimate) -> Vec<u8> {
    let mut text = format!(
        "# {} M={} N={} J={} L={} slope={}\n# snr_db mean_sum_rate_bits\n",
        cfg.scheme.as_str(),
        cfg.m,
        cfg.n,
        cfg.relays,
        cfg.antennas,
        est.slope_per_log2p
    );
    for (snr, rate) in est.snr_points_db.iter().zip(&est.sum_rates_bits) {
        text.push_str(&format!("{snr} {rate}\n"));
    }
    text.into_bytes()
}
