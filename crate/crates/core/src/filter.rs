//! Keep/discard masks from an entropy cut, contamination bookkeeping, and
//! filter quality against known labels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::EntropyScoreSet;
use crate::threshold::UseThreshold;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("scores have k = {scores} but the threshold was derived for k = {threshold}")]
    ClassCountMismatch { scores: usize, threshold: usize },
    #[error("contamination ratio needs at least one in-distribution sample")]
    NoIdSamples,
    #[error("mask has {mask} samples but {truth} labels were given")]
    LengthMismatch { mask: usize, truth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Keep,
    Discard,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Keep => "keep",
            Decision::Discard => "discard",
        }
    }
}

impl std::str::FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keep" => Ok(Decision::Keep),
            "discard" => Ok(Decision::Discard),
            other => Err(format!("unknown decision {other:?}")),
        }
    }
}

/// Ground-truth origin of a synthetic sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truth {
    Id,
    NearOod,
    FarOod,
}

impl Truth {
    pub fn as_str(self) -> &'static str {
        match self {
            Truth::Id => "id",
            Truth::NearOod => "near-ood",
            Truth::FarOod => "far-ood",
        }
    }

    pub fn is_ood(self) -> bool {
        self != Truth::Id
    }
}

impl std::str::FromStr for Truth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "id" => Ok(Truth::Id),
            "near-ood" => Ok(Truth::NearOod),
            "far-ood" => Ok(Truth::FarOod),
            other => Err(format!("unknown truth label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterMask {
    decisions: Vec<Decision>,
    sample_ids: Vec<String>,
    scores: Vec<f64>,
    u_star: f64,
    kept: usize,
}

impl FilterMask {
    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    pub fn kept_count(&self) -> usize {
        self.kept
    }

    pub fn discarded_count(&self) -> usize {
        self.decisions.len() - self.kept
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    /// Ids of the samples that survive the cut, in input order.
    pub fn kept_ids(&self) -> impl Iterator<Item = &str> {
        self.sample_ids
            .iter()
            .zip(&self.decisions)
            .filter(|(_, d)| **d == Decision::Keep)
            .map(|(id, _)| id.as_str())
    }
}

/// Discards every sample whose entropy strictly exceeds `u*`.
pub fn apply_threshold(
    scores: &EntropyScoreSet,
    threshold: &UseThreshold,
) -> Result<FilterMask, FilterError> {
    if scores.k() != threshold.k {
        return Err(FilterError::ClassCountMismatch {
            scores: scores.k(),
            threshold: threshold.k,
        });
    }
    Ok(mask_at(scores, threshold.u_star))
}

pub(crate) fn mask_at(scores: &EntropyScoreSet, u_star: f64) -> FilterMask {
    let decisions: Vec<Decision> = scores
        .scores()
        .iter()
        .map(|&u| {
            if u > u_star {
                Decision::Discard
            } else {
                Decision::Keep
            }
        })
        .collect();
    let kept = decisions.iter().filter(|d| **d == Decision::Keep).count();
    FilterMask {
        decisions,
        sample_ids: scores.sample_ids().to_vec(),
        scores: scores.scores().to_vec(),
        u_star,
        kept,
    }
}

/// Pool composition in terms of in-distribution and OOD counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub d_id: usize,
    pub d_ood: usize,
    pub r: f64,
}

impl ContaminationSpec {
    pub fn new(d_id: usize, d_ood: usize) -> Result<Self, FilterError> {
        Ok(Self {
            d_id,
            d_ood,
            r: contamination_ratio(d_id, d_ood)?,
        })
    }

    /// OOD count that brings `d_id` in-distribution samples to ratio `r`,
    /// rounded to the nearest integer.
    pub fn for_ratio(d_id: usize, r: f64) -> Result<Self, FilterError> {
        if d_id == 0 {
            return Err(FilterError::NoIdSamples);
        }
        let d_ood = (d_id as f64 * r / (1.0 - r)).round() as usize;
        Self::new(d_id, d_ood)
    }

    pub fn total(&self) -> usize {
        self.d_id + self.d_ood
    }
}

/// `d_ood / (d_id + d_ood)`.
pub fn contamination_ratio(d_id: usize, d_ood: usize) -> Result<f64, FilterError> {
    if d_id == 0 {
        return Err(FilterError::NoIdSamples);
    }
    Ok(d_ood as f64 / (d_id + d_ood) as f64)
}

/// Precision and recall of a mask, treating OOD samples as positives.
///
/// Ratios with a zero denominator are reported as 1.0. Per-class recall is
/// `None` when the pool has no sample of that class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterQuality {
    pub precision: f64,
    pub recall: f64,
    pub near_recall: Option<f64>,
    pub far_recall: Option<f64>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn filter_quality(mask: &FilterMask, truth: &[Truth]) -> Result<FilterQuality, FilterError> {
    if mask.len() != truth.len() {
        return Err(FilterError::LengthMismatch {
            mask: mask.len(),
            truth: truth.len(),
        });
    }
    let (mut tp, mut fp, mut fne) = (0, 0, 0);
    let mut near = (0usize, 0usize);
    let mut far = (0usize, 0usize);
    for (&d, &t) in mask.decisions().iter().zip(truth) {
        let discarded = d == Decision::Discard;
        match (discarded, t.is_ood()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fne += 1,
            (false, false) => {}
        }
        let bucket = match t {
            Truth::NearOod => &mut near,
            Truth::FarOod => &mut far,
            Truth::Id => continue,
        };
        bucket.1 += 1;
        if discarded {
            bucket.0 += 1;
        }
    }
    let class_recall = |(hit, total): (usize, usize)| (total > 0).then(|| ratio(hit, total));
    Ok(FilterQuality {
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fne),
        near_recall: class_recall(near),
        far_recall: class_recall(far),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fne,
    })
}
