//! Scores in, cut and mask out.

use crate::density::{
    fit_kde, silverman_bandwidth, DensityEstimate, DensityGrid, DEFAULT_GRID_POINTS,
};
use crate::entropy::EntropyScoreSet;
use crate::filter::{apply_threshold, FilterMask};
use crate::threshold::{
    find_threshold_with, make_reference, ReferenceCurve, ReferenceKind, ThresholdOptions,
    UseThreshold,
};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSettings {
    pub grid_points: usize,
    /// Explicit KDE bandwidth in nats; Silverman's rule when `None`.
    pub bandwidth: Option<f64>,
    pub reference: ReferenceKind,
    pub threshold: ThresholdOptions,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            bandwidth: None,
            reference: ReferenceKind::default(),
            threshold: ThresholdOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthSource {
    Silverman,
    Explicit,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub estimate: DensityEstimate,
    pub reference: ReferenceCurve,
    pub threshold: UseThreshold,
    pub mask: FilterMask,
    pub bandwidth_source: BandwidthSource,
}

pub fn run_pipeline(
    scores: &EntropyScoreSet,
    settings: &PipelineSettings,
) -> Result<PipelineOutcome, Error> {
    let (bandwidth, bandwidth_source) = match settings.bandwidth {
        Some(h) => (h, BandwidthSource::Explicit),
        None => (silverman_bandwidth(scores)?, BandwidthSource::Silverman),
    };
    let grid = DensityGrid::new(scores.k(), settings.grid_points)?;
    let estimate = fit_kde(scores, bandwidth, &grid)?;
    let reference = make_reference(settings.reference, &grid);
    let threshold = find_threshold_with(&estimate, &reference, &settings.threshold)?;
    let mask = apply_threshold(scores, &threshold)?;
    Ok(PipelineOutcome {
        estimate,
        reference,
        threshold,
        mask,
        bandwidth_source,
    })
}
