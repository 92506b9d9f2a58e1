use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use relay_ia::prelude::*;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    #[value(name = "x-theorem1")]
    #[serde(rename = "x-theorem1")]
    XTheorem1,
    #[value(name = "partial-ia")]
    PartialIa,
    #[value(name = "ic-theorem3")]
    #[serde(rename = "ic-theorem3")]
    IcTheorem3,
}

impl SchemeArg {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeArg::XTheorem1 => "x-theorem1",
            SchemeArg::PartialIa => "partial-ia",
            SchemeArg::IcTheorem3 => "ic-theorem3",
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            SchemeArg::XTheorem1 => Scheme::XTheorem1,
            SchemeArg::PartialIa => Scheme::PartialIa,
            SchemeArg::IcTheorem3 => Scheme::IcTheorem3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecodingArg {
    LeastNorm,
    NullSpace,
}

/// Flat key-value config file; keys mirror the command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relays: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antennas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_varying: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint_beamforming: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ic_precoding: Option<PrecodingArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text form: known keys in a fixed order, absent keys omitted.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("config values are always representable")
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Transmitters (X channel).
    #[arg(long)]
    pub m: Option<usize>,
    /// Receivers (X channel).
    #[arg(long)]
    pub n: Option<usize>,
    /// Users (interference channel and partial alignment).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub relays: Option<usize>,
    /// Antennas per relay.
    #[arg(long)]
    pub antennas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_stop: Option<f64>,
    #[arg(long)]
    pub snr_step: Option<f64>,
    /// Hold every channel coefficient constant across slots.
    #[arg(long)]
    pub no_time_varying: bool,
    /// Keep transmitters silent during relay slots.
    #[arg(long)]
    pub no_joint_beamforming: bool,
    #[arg(long, value_enum)]
    pub ic_precoding: Option<PrecodingArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RunArgs {
    /// Flag values layered over `file`.
    pub fn merge_over(&self, file: ConfigFile) -> ConfigFile {
        ConfigFile {
            scheme: self.scheme.or(file.scheme),
            m: self.m.or(file.m),
            n: self.n.or(file.n),
            k: self.k.or(file.k),
            relays: self.relays.or(file.relays),
            antennas: self.antennas.or(file.antennas),
            seed: self.seed.or(file.seed),
            trials: self.trials.or(file.trials),
            snr_start: self.snr_start.or(file.snr_start),
            snr_stop: self.snr_stop.or(file.snr_stop),
            snr_step: self.snr_step.or(file.snr_step),
            time_varying: if self.no_time_varying { Some(false) } else { file.time_varying },
            joint_beamforming: if self.no_joint_beamforming { Some(false) } else { file.joint_beamforming },
            ic_precoding: self.ic_precoding.or(file.ic_precoding),
            out: self.out.clone().or(file.out),
            format: self.format.or(file.format),
        }
    }

    pub fn resolve(&self, default_trials: usize) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        ExperimentConfig::from_file(self.merge_over(file), default_trials)
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scheme: SchemeArg,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "J")]
    pub relays: usize,
    #[serde(rename = "L")]
    pub antennas: usize,
    pub seed: u64,
    pub trials: usize,
    pub snr_start_db: f64,
    pub snr_stop_db: f64,
    pub snr_step_db: f64,
    pub time_varying: bool,
    pub joint_beamforming: bool,
    pub ic_precoding: PrecodingArg,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

fn require(value: Option<usize>, name: &str, scheme: SchemeArg) -> Result<usize, CliError> {
    value.ok_or_else(|| CliError::Config(format!("--{name} is required for {}", scheme.as_str())))
}

impl ExperimentConfig {
    pub fn from_file(file: ConfigFile, default_trials: usize) -> Result<Self, CliError> {
        let scheme = file.scheme.ok_or_else(|| CliError::Config("--scheme is required".into()))?;
        let (m, n, k, relays, antennas) = match scheme {
            SchemeArg::XTheorem1 => (
                require(file.m, "m", scheme)?,
                require(file.n, "n", scheme)?,
                None,
                require(file.relays, "relays", scheme)?,
                require(file.antennas, "antennas", scheme)?,
            ),
            SchemeArg::IcTheorem3 => {
                let k = require(file.k, "k", scheme)?;
                (k, k, Some(k), require(file.relays, "relays", scheme)?, require(file.antennas, "antennas", scheme)?)
            }
            SchemeArg::PartialIa => {
                let k = match (file.k, file.m, file.n) {
                    (Some(k), _, _) => k,
                    (None, Some(m), Some(n)) if m == n => m,
                    _ => return Err(CliError::Config("--k is required for partial-ia".into())),
                };
                let relays = file.relays.unwrap_or(1);
                let antennas = file.antennas.unwrap_or(k.saturating_sub(1));
                if relays != 1 || antennas + 1 != k {
                    return Err(CliError::Config(format!(
                        "partial-ia needs one relay with K-1 = {} antennas",
                        k.saturating_sub(1)
                    )));
                }
                (k, k, Some(k), relays, antennas)
            }
        };
        let cfg = ExperimentConfig {
            scheme,
            m,
            n,
            k,
            relays,
            antennas,
            seed: file.seed.unwrap_or(0),
            trials: file.trials.unwrap_or(default_trials),
            snr_start_db: file.snr_start.unwrap_or(40.0),
            snr_stop_db: file.snr_stop.unwrap_or(80.0),
            snr_step_db: file.snr_step.unwrap_or(10.0),
            time_varying: file.time_varying.unwrap_or(true),
            joint_beamforming: file.joint_beamforming.unwrap_or(true),
            ic_precoding: file.ic_precoding.unwrap_or(PrecodingArg::LeastNorm),
            output_path: file.out,
            format: file.format.unwrap_or(Format::Csv),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Config("--trials must be at least 1".into()));
        }
        let finite = [self.snr_start_db, self.snr_stop_db, self.snr_step_db].iter().all(|v| v.is_finite());
        if !finite || self.snr_step_db <= 0.0 {
            return Err(CliError::Config("--snr-step must be a positive number".into()));
        }
        if self.snr_stop_db < self.snr_start_db {
            return Err(CliError::Config("--snr-stop must not be below --snr-start".into()));
        }
        self.topology()?;
        Ok(())
    }

    pub fn topology(&self) -> Result<NetworkTopology, CliError> {
        let topo = match self.scheme {
            SchemeArg::IcTheorem3 => NetworkTopology::interference(self.m, self.relays, self.antennas),
            _ => NetworkTopology::x_channel(self.m, self.n, self.relays, self.antennas),
        };
        topo.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn scheme_options(&self) -> SchemeOptions {
        SchemeOptions {
            time_varying: self.time_varying,
            joint_beamforming: self.joint_beamforming,
            ic_precoding: match self.ic_precoding {
                PrecodingArg::LeastNorm => IcPrecoding::LeastNorm,
                PrecodingArg::NullSpace => IcPrecoding::NullSpace,
            },
        }
    }

    /// Relays the scheme needs, when more than are available.
    pub fn missing_relays(&self) -> Option<usize> {
        let required = match self.scheme {
            SchemeArg::XTheorem1 => required_relays_x(self.m, self.n, self.antennas),
            SchemeArg::IcTheorem3 => required_relays_ic(self.m, self.antennas),
            SchemeArg::PartialIa => 1,
        };
        (required > self.relays).then_some(required)
    }

    /// `start, start + step, ...` up to and including `stop`.
    pub fn snr_grid(&self) -> Vec<f64> {
        let span = (self.snr_stop_db - self.snr_start_db) / self.snr_step_db;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.snr_start_db + i as f64 * self.snr_step_db).collect()
    }

    pub fn reference_dof(&self) -> (u64, u64) {
        let kind = match self.scheme {
            SchemeArg::IcTheorem3 => DofReference::Interference { users: self.m as u64 },
            _ => DofReference::XChannel { transmitters: self.m as u64, receivers: self.n as u64 },
        };
        let r = dof_reference(kind);
        (*r.numer(), *r.denom())
    }
}
