//! Run configuration, read from TOML.
//!
//! ```toml
//! grid_points = 2048
//! bandwidth = 0.05
//!
//! [scenario]
//! n = 20000
//! weights = [0.5, 0.0, 0.5]
//! ```
//!
//! Lookup order is an explicit `--config` path, then the file named by
//! `USE_CURATE_CONFIG`, then built-in defaults. Command-line flags override
//! whatever the file says.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::density::{DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
use crate::pipeline::PipelineSettings;
use crate::synthetic::MixtureSpec;
use crate::threshold::{ReferenceKind, ThresholdOptions, DEFAULT_STRUCTURE_ALPHA};
use crate::Error;

use super::formats::LOG_BASE;
use super::read_to_string;

pub const CONFIG_ENV: &str = "USE_CURATE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    #[default]
    HalfAwayFromZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid_points: usize,
    pub bandwidth: Option<f64>,
    pub reference: ReferenceKind,
    pub log_base: String,
    pub seed: Option<u64>,
    pub renormalize: bool,
    pub emit_density: bool,
    /// Keep everything when the fitted CDF stays inside the sampling noise
    /// band around the reference.
    pub structure_gate: bool,
    pub structure_alpha: f64,
    pub rounding: RoundingMode,
    /// Decimal places in the metrics CSV.
    pub decimals: usize,
    pub scenario: Option<MixtureSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            bandwidth: None,
            reference: ReferenceKind::default(),
            log_base: LOG_BASE.to_owned(),
            seed: None,
            renormalize: false,
            emit_density: false,
            structure_gate: true,
            structure_alpha: DEFAULT_STRUCTURE_ALPHA,
            rounding: RoundingMode::default(),
            decimals: 4,
            scenario: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, Error> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: origin.to_owned(),
            message: e.message().to_owned(),
        })?;
        cfg.validate().map_err(|message| Error::Config {
            path: origin.to_owned(),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Self::from_toml(&read_to_string(path)?, path)
    }

    /// Loads `explicit` if given, else the file named by the environment
    /// variable, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, Error> {
        let from_env = std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        match explicit.map(Path::to_path_buf).or(from_env) {
            Some(p) => Self::load(&p),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.grid_points < MIN_GRID_POINTS {
            return Err(format!(
                "grid_points must be at least {MIN_GRID_POINTS}, got {}",
                self.grid_points
            ));
        }
        if let Some(h) = self.bandwidth {
            if !(h.is_finite() && h > 0.0) {
                return Err(format!("bandwidth must be positive, got {h}"));
            }
        }
        if self.log_base != LOG_BASE {
            return Err(format!(
                "log_base must be {LOG_BASE:?}, got {:?}",
                self.log_base
            ));
        }
        if !(self.structure_alpha > 0.0 && self.structure_alpha < 1.0) {
            return Err(format!(
                "structure_alpha must lie in (0, 1), got {}",
                self.structure_alpha
            ));
        }
        if self.decimals > 12 {
            return Err(format!(
                "decimals must be at most 12, got {}",
                self.decimals
            ));
        }
        if let Some(spec) = &self.scenario {
            spec.validate().map_err(|e| format!("scenario: {e}"))?;
        }
        Ok(())
    }

    pub fn to_settings(&self) -> PipelineSettings {
        PipelineSettings {
            grid_points: self.grid_points,
            bandwidth: self.bandwidth,
            reference: self.reference,
            threshold: ThresholdOptions {
                structure_alpha: self.structure_gate.then_some(self.structure_alpha),
                ..ThresholdOptions::default()
            },
        }
    }

    /// Scenario with the configured seed applied.
    pub fn scenario_spec(&self) -> MixtureSpec {
        let mut spec = self.scenario.clone().unwrap_or_default();
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        let cfg = RunConfig::from_toml("", Path::new("x.toml")).unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn partial_scenario_fills_defaults() {
        let cfg =
            RunConfig::from_toml("seed = 11\n[scenario]\nn = 500\n", Path::new("x.toml")).unwrap();
        let spec = cfg.scenario_spec();
        assert_eq!(spec.n, 500);
        assert_eq!(spec.k, 100);
        assert_eq!(spec.seed, 11);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "grid_points = 10",
            "bandwidth = -1.0",
            "log_base = \"bits\"",
            "unknown = 1",
            "reference = \"gaussian\"",
            "[scenario]\nweights = [1.0, 1.0, 0.0]",
        ] {
            let err = RunConfig::from_toml(text, Path::new("x.toml")).unwrap_err();
            assert!(matches!(err, Error::Config { .. }), "{text}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn serializes_back() {
        let cfg = RunConfig {
            bandwidth: Some(0.1),
            scenario: Some(MixtureSpec::default()),
            ..RunConfig::default()
        };
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(
            RunConfig::from_toml(&text, Path::new("x.toml")).unwrap(),
            cfg
        );
    }

    #[test]
    fn gate_toggle() {
        let cfg = RunConfig {
            structure_gate: false,
            ..RunConfig::default()
        };
        assert_eq!(cfg.to_settings().threshold.structure_alpha, None);
    }
}
