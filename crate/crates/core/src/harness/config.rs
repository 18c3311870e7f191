//! Experiment configuration (TOML).
//!
//! Gains, noise density and powers are given in dB units in the file and
//! converted to linear values on use. Arm indices are 0-based everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{compute_nu, db_to_linear, dbm_to_watts, GainModel, LinkBudget, Nu};
use crate::error::{Error, Result};
use crate::policy::PolicySpec;
use crate::rate::FrameTiming;

/// Environment variable that replaces the built-in default seed.
pub const SEED_ENV_VAR: &str = "BEAMALIGN_SEED";
pub const DEFAULT_SEED: u64 = 0x5EED_BEA4;
pub const DEFAULT_ITERATIONS: u64 = 100_000;

pub const FIG2_PRESET: &str = include_str!("../../../../configs/fig2.toml");
pub const FIG3_PRESET: &str = include_str!("../../../../configs/fig3.toml");

fn default_seed() -> u64 {
    std::env::var(SEED_ENV_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn default_iterations() -> u64 {
    DEFAULT_ITERATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prior {
    /// Only `"uniform"` is accepted.
    Named(String),
    Weights(Vec<f64>),
}

impl Default for Prior {
    fn default() -> Self {
        Prior::Named("uniform".into())
    }
}

impl Prior {
    pub fn resolve(&self, num_arms: usize) -> Result<Vec<f64>> {
        match self {
            Prior::Named(name) if name == "uniform" => Ok(vec![1.0 / num_arms as f64; num_arms]),
            Prior::Named(name) => Err(Error::Config(format!("unknown prior {name:?}"))),
            Prior::Weights(w) => {
                if w.len() != num_arms {
                    return Err(Error::Config(format!(
                        "prior has {} entries, expected {num_arms}",
                        w.len()
                    )));
                }
                if w.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
                    return Err(Error::Config("prior entries must be positive".into()));
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!("prior sums to {total}, not 1")));
                }
                Ok(w.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainsDb {
    pub main_lobe_db: f64,
    pub side_lobe_db: f64,
}

impl GainsDb {
    pub fn model(&self, snr_db: f64) -> Result<GainModel> {
        GainModel::from_db(self.main_lobe_db, self.side_lobe_db, snr_db)
    }

    pub fn nu(&self, snr_db: f64) -> Result<Nu> {
        compute_nu(&self.model(snr_db)?)
    }

    pub fn main_lobe_linear(&self) -> f64 {
        db_to_linear(self.main_lobe_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub carrier_frequency_hz: f64,
    pub distance_m: f64,
    pub path_loss_exponent: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
    pub ba_power_dbm: f64,
    pub max_data_power_dbm: f64,
    /// Fixed data power; when absent the power is optimized up to the maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_power_dbm: Option<f64>,
}

impl LinkConfig {
    pub fn budget(&self) -> Result<LinkBudget> {
        let link = LinkBudget {
            carrier_frequency_hz: self.carrier_frequency_hz,
            distance_m: self.distance_m,
            path_loss_exponent: self.path_loss_exponent,
            noise_psd_w_per_hz: dbm_to_watts(self.noise_psd_dbm_per_hz),
            bandwidth_hz: self.bandwidth_hz,
            ba_power_w: dbm_to_watts(self.ba_power_dbm),
            max_data_power_w: dbm_to_watts(self.max_data_power_dbm),
        };
        link.validate()?;
        Ok(link)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    /// Beam-alignment SNR in dB, at a single `L`.
    Snr,
    /// Beam-alignment slots `L`, at a single SNR.
    Overhead,
}

impl SweepVariable {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepVariable::Snr => "snr_db",
            SweepVariable::Overhead => "alignment_slots",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub snr_db: Vec<f64>,
    pub alignment_slots: Vec<usize>,
}

/// One point of a sweep: the pair actually simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub alignment_slots: usize,
}

impl SweepConfig {
    pub fn points(&self) -> Vec<SweepPoint> {
        match self.variable {
            SweepVariable::Snr => self
                .snr_db
                .iter()
                .map(|&snr_db| SweepPoint {
                    snr_db,
                    alignment_slots: self.alignment_slots[0],
                })
                .collect(),
            SweepVariable::Overhead => self
                .alignment_slots
                .iter()
                .map(|&alignment_slots| SweepPoint {
                    snr_db: self.snr_db[0],
                    alignment_slots,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub num_arms: usize,
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    pub policies: Vec<PolicySpec>,
    #[serde(default)]
    pub prior: Prior,
    pub frame: FrameTiming,
    pub gains: GainsDb,
    pub link: LinkConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// `fig2` (alignment probability vs SNR) or `fig3` (spectral efficiency vs overhead).
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "fig2" => Self::from_toml_str(FIG2_PRESET),
            "fig3" => Self::from_toml_str(FIG3_PRESET),
            other => Err(Error::Config(format!("unknown preset {other:?}"))),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_arms < 2 {
            return Err(Error::Config(format!(
                "num_arms must be >= 2, got {}",
                self.num_arms
            )));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        self.frame.validate()?;
        self.prior.resolve(self.num_arms)?;
        self.link.budget()?;
        if let Some(p) = self.link.data_power_dbm {
            if p > self.link.max_data_power_dbm {
                return Err(Error::Config(format!(
                    "data_power_dbm {p} exceeds max_data_power_dbm {}",
                    self.link.max_data_power_dbm
                )));
            }
        }
        let sweep = &self.sweep;
        let (swept, fixed, fixed_name) = match sweep.variable {
            SweepVariable::Snr => (
                sweep.snr_db.len(),
                sweep.alignment_slots.len(),
                "alignment_slots",
            ),
            SweepVariable::Overhead => (sweep.alignment_slots.len(), sweep.snr_db.len(), "snr_db"),
        };
        if swept == 0 {
            return Err(Error::Config("sweep has no points".into()));
        }
        if fixed != 1 {
            return Err(Error::Config(format!(
                "sweep over {:?} needs exactly one {fixed_name} value",
                sweep.variable
            )));
        }
        for point in sweep.points() {
            if point.alignment_slots >= self.frame.slots_per_frame {
                return Err(Error::Config(format!(
                    "alignment slots {} must be below slots_per_frame {}",
                    point.alignment_slots, self.frame.slots_per_frame
                )));
            }
            self.gains.nu(point.snr_db)?;
        }
        Ok(())
    }
}
