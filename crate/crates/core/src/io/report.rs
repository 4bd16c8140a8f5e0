//! JSON reports. Every report carries `schema_version` and the effective
//! configuration it was produced with.

use serde::{Deserialize, Serialize};

use crate::filter::FilterQuality;
use crate::pipeline::{BandwidthSource, PipelineOutcome};
use crate::robustness::RobustnessReport;
use crate::synthetic::{MixtureSpec, ScenarioOutcome};
use crate::threshold::{discrepancy, Fallback, ThresholdDiagnostics};
use crate::Error;

use super::config::RunConfig;
use super::formats::LOG_BASE;
use super::write_atomic;

pub const SCHEMA_VERSION: u32 = 1;

/// Grid arrays for plotting, present only when requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityArrays {
    pub u: Vec<f64>,
    pub density: Vec<f64>,
    pub cdf: Vec<f64>,
    pub reference_density: Vec<f64>,
    pub reference_cdf: Vec<f64>,
    pub discrepancy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub log_base: String,
    pub n: usize,
    pub k: usize,
    pub bandwidth: f64,
    pub bandwidth_source: BandwidthSource,
    pub u_star: f64,
    pub crossing_found: bool,
    pub fallback: Fallback,
    pub refinement_iters: u32,
    pub diagnostics: Option<ThresholdDiagnostics>,
    pub kept: usize,
    pub discarded: usize,
    pub raw_mass: f64,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityArrays>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl PipelineReport {
    pub fn new(outcome: &PipelineOutcome, config: &RunConfig) -> Self {
        let est = &outcome.estimate;
        let density = config.emit_density.then(|| DensityArrays {
            u: est.grid().values(),
            density: est.density().to_vec(),
            cdf: est.cdf().to_vec(),
            reference_density: outcome.reference.density().to_vec(),
            reference_cdf: outcome.reference.cdf().to_vec(),
            discrepancy: discrepancy(est, &outcome.reference)
                .map(|p| p.delta().to_vec())
                .unwrap_or_default(),
        });
        let t = &outcome.threshold;
        Self {
            schema_version: SCHEMA_VERSION,
            log_base: LOG_BASE.to_owned(),
            n: est.n(),
            k: t.k,
            bandwidth: est.bandwidth(),
            bandwidth_source: outcome.bandwidth_source,
            u_star: t.u_star,
            crossing_found: t.crossing_found,
            fallback: t.fallback,
            refinement_iters: t.refinement_iters,
            diagnostics: t.diagnostics.clone(),
            kept: outcome.mask.kept_count(),
            discarded: outcome.mask.discarded_count(),
            raw_mass: est.raw_mass(),
            config: config.clone(),
            density,
            timing: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let report: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {}",
                report.schema_version
            ));
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetrics {
    pub series: String,
    pub points: usize,
    #[serde(flatten)]
    pub metrics: RobustnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub decimals: usize,
    pub series: Vec<SeriesMetrics>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub spec: MixtureSpec,
    /// Realized `(id, near, far)` fractions.
    pub component_fractions: [f64; 3],
    pub quality: FilterQuality,
    pub discard_fraction: f64,
    pub pipeline: PipelineReport,
}

impl SimulationReport {
    pub fn new(outcome: &ScenarioOutcome, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            spec: outcome.pool.spec.clone(),
            component_fractions: outcome.pool.component_fractions(),
            quality: outcome.quality,
            discard_fraction: outcome.discard_fraction(),
            pipeline: PipelineReport::new(&outcome.pipeline, config),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports contain only finite numbers");
    s.push('\n');
    s
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), Error> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}
