//! Experiment configuration: a single JSON document, or the equivalent
//! command-line flags layered on top of it.

use std::path::{Path, PathBuf};

use physi::DcConfig;
use serde::{Deserialize, Serialize};

/// Unit tag for the power budget. Explicit so a bare number can never be
/// read in the wrong unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerUnit {
    Db,
    Linear,
}

/// Power budget with its unit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSpec {
    pub value: f64,
    pub unit: PowerUnit,
}

impl PowerSpec {
    pub fn db(value: f64) -> Self {
        Self {
            value,
            unit: PowerUnit::Db,
        }
    }

    pub fn linear(value: f64) -> Self {
        Self {
            value,
            unit: PowerUnit::Linear,
        }
    }

    /// Budget in linear units regardless of how it was written.
    pub fn as_linear(&self) -> f64 {
        match self.unit {
            PowerUnit::Db => 10f64.powf(self.value / 10.0),
            PowerUnit::Linear => self.value,
        }
    }
}

/// Where the channel matrices come from.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSource {
    /// Drawn from the seeded generator; each trial offsets the seed.
    #[default]
    Generated,
    /// Read from a channel text file; every trial uses the same pair.
    File { path: PathBuf },
}

fn default_trials() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_grid_units() -> usize {
    12
}

/// Everything one experiment run needs. Serialized back into the manifest
/// verbatim, so artifacts carry their own provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nt: usize,
    pub nb: usize,
    pub ne: usize,
    pub power: PowerSpec,
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub solver: DcConfig,
    #[serde(default)]
    pub channels: ChannelSource,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Axis resolution of the covariance-grid reference; it is only built
    /// when every antenna count is at most two.
    #[serde(default = "default_grid_units")]
    pub grid_units: usize,
}

impl ExperimentConfig {
    pub fn new(nt: usize, nb: usize, ne: usize, power: PowerSpec, delta: f64) -> Self {
        Self {
            nt,
            nb,
            ne,
            power,
            delta,
            seed: 0,
            trials: default_trials(),
            solver: DcConfig::default(),
            channels: ChannelSource::default(),
            output_dir: default_output_dir(),
            grid_units: default_grid_units(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("nt", self.nt), ("nb", self.nb), ("ne", self.ne)] {
            if v < 1 {
                return Err(format!("antenna count {name} must be at least 1, got {v}"));
            }
        }
        let p = self.power.as_linear();
        if !(p > 0.0) || !p.is_finite() {
            return Err(format!("power budget must be positive and finite, got {p} linear"));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(format!("delta must be positive and finite, got {}", self.delta));
        }
        if self.trials < 1 {
            return Err("trials must be at least 1".into());
        }
        if self.grid_units < 1 {
            return Err("grid_units must be at least 1".into());
        }
        if let ChannelSource::File { path } = &self.channels {
            if path.as_os_str().is_empty() {
                return Err("channel file path must not be empty".into());
            }
        }
        self.solver.validate().map_err(|e| e.to_string())
    }

    /// Seed used for trial number `trial`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }

    /// Whether the covariance-grid reference is small enough to build.
    pub fn grid_dims_permit(&self) -> bool {
        self.nt <= 2 && self.nb <= 2 && self.ne <= 2
    }
}
