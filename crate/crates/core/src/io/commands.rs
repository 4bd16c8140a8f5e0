//! The five subcommands as library calls. Each writes its files atomically
//! and returns what it produced so callers can print a summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::entropy::{score_pool, EntropyScoreSet};
use crate::filter::{apply_threshold, FilterMask};
use crate::pipeline::run_pipeline;
use crate::robustness::RobustnessReport;
use crate::synthetic::run_scenario_with;
use crate::threshold::{ReferenceKind, UseThreshold};
use crate::Error;

use super::config::RunConfig;
use super::formats::{
    mask_csv, metrics_csv, read_probabilities, read_scores, read_series, scores_csv, write_mask,
    write_scores,
};
use super::report::{
    emit, to_json, MetricsReport, PipelineReport, SeriesMetrics, SimulationReport, Timing,
    SCHEMA_VERSION,
};
use super::{read_to_string, write_atomic};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid_points: Option<usize>,
    pub bandwidth: Option<f64>,
    pub reference: Option<ReferenceKind>,
    pub seed: Option<u64>,
    pub emit_density: bool,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig, Error> {
        if let Some(g) = self.grid_points {
            cfg.grid_points = g;
        }
        if self.bandwidth.is_some() {
            cfg.bandwidth = self.bandwidth;
        }
        if let Some(r) = self.reference {
            cfg.reference = r;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        cfg.emit_density |= self.emit_density;
        cfg.validate().map_err(Error::Invalid)?;
        Ok(cfg)
    }
}

/// Probabilities file to scores file (stdout when `output` is `None`).
pub fn score(
    input: &Path,
    output: Option<&Path>,
    cfg: &RunConfig,
) -> Result<EntropyScoreSet, Error> {
    let pool = read_probabilities(input, cfg.renormalize)?;
    let scores = score_pool(pool)?;
    match output {
        Some(p) => write_scores(p, &scores, None)?,
        None => emit(&scores_csv(&scores, None), None)?,
    }
    Ok(scores)
}

/// Fits the density and locates `u*`; the report goes to `output` or stdout.
pub fn threshold(
    scores_path: &Path,
    cfg: &RunConfig,
    output: Option<&Path>,
    timing: bool,
) -> Result<PipelineReport, Error> {
    let (scores, _) = read_scores(scores_path)?;
    let start = Instant::now();
    let outcome = run_pipeline(&scores, &cfg.to_settings())?;
    let mut report = PipelineReport::new(&outcome, cfg);
    if timing {
        report.timing = Some(Timing {
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    emit(&to_json(&report), output)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdSource {
    Report(PathBuf),
    Value(f64),
}

/// Applies a cut from a threshold report or an explicit value.
pub fn filter(
    scores_path: &Path,
    source: Option<&ThresholdSource>,
    output: Option<&Path>,
) -> Result<FilterMask, Error> {
    let (scores, _) = read_scores(scores_path)?;
    let threshold = match source.ok_or(Error::MissingThreshold)? {
        ThresholdSource::Value(u) => {
            if !u.is_finite() || *u < 0.0 {
                return Err(Error::Invalid(format!(
                    "u* must be a finite non-negative entropy, got {u}"
                )));
            }
            UseThreshold::explicit(*u, scores.k())
        }
        ThresholdSource::Report(path) => {
            let report = PipelineReport::from_json(&read_to_string(path)?).map_err(|message| {
                Error::Format {
                    path: path.clone(),
                    message,
                }
            })?;
            if report.n != scores.len() {
                return Err(Error::SampleCountMismatch {
                    report: report.n,
                    scores: scores.len(),
                });
            }
            UseThreshold::explicit(report.u_star, report.k)
        }
    };
    let mask = apply_threshold(&scores, &threshold)?;
    match output {
        Some(p) => write_mask(p, &mask, scores.k())?,
        None => emit(&mask_csv(&mask, scores.k()), None)?,
    }
    Ok(mask)
}

/// Robustness indicators per series. The CSV goes to `csv_out` or stdout; the
/// JSON report is written only when `json_out` is given.
pub fn metrics(
    series_path: &Path,
    cfg: &RunConfig,
    csv_out: Option<&Path>,
    json_out: Option<&Path>,
) -> Result<MetricsReport, Error> {
    let rows = read_series(series_path)?
        .into_iter()
        .map(|(name, s)| Ok((name, s.len(), RobustnessReport::compute(&s)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let table: Vec<_> = rows.iter().map(|(n, _, r)| (n.clone(), *r)).collect();
    emit(&metrics_csv(&table, cfg.decimals), csv_out)?;
    let report = MetricsReport {
        schema_version: SCHEMA_VERSION,
        decimals: cfg.decimals,
        series: rows
            .into_iter()
            .map(|(series, points, r)| SeriesMetrics {
                series,
                points,
                metrics: r.rounded(cfg.decimals as i32),
            })
            .collect(),
        config: cfg.clone(),
    };
    if let Some(p) = json_out {
        write_atomic(p, to_json(&report).as_bytes())?;
    }
    Ok(report)
}

pub const POOL_FILE: &str = "pool.csv";
pub const MASK_FILE: &str = "mask.csv";
pub const REPORT_FILE: &str = "report.json";

/// Samples the configured scenario and writes `pool.csv`, `mask.csv` and
/// `report.json` (with density arrays) into `out_dir`.
pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> Result<SimulationReport, Error> {
    let spec = cfg.scenario_spec();
    let outcome = run_scenario_with(&spec, &cfg.to_settings())?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let k = outcome.pool.scores.k();
    write_scores(
        &out_dir.join(POOL_FILE),
        &outcome.pool.scores,
        Some(&outcome.pool.truth),
    )?;
    write_mask(&out_dir.join(MASK_FILE), &outcome.pipeline.mask, k)?;
    let effective = RunConfig {
        emit_density: true,
        seed: Some(spec.seed),
        scenario: Some(spec),
        ..cfg.clone()
    };
    let report = SimulationReport::new(&outcome, &effective);
    write_atomic(&out_dir.join(REPORT_FILE), to_json(&report).as_bytes())?;
    Ok(report)
}
