//! Labeled synthetic entropy pools with the three characteristic shapes:
//! a low-entropy in-distribution bump, a flat near-OOD component and a
//! high-entropy far-OOD bump.
//!
//! Component means and spreads are fractions of `ln k`. The bumps are normals
//! truncated to `[0, ln k]` by rejection; the near component is uniform.
//! Sampling is sequential from a ChaCha8 stream seeded with `seed`, so a spec
//! always yields the same pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{max_entropy, EntropyScoreSet};
use crate::filter::{filter_quality, ContaminationSpec, FilterQuality, Truth};
use crate::pipeline::{run_pipeline, PipelineOutcome, PipelineSettings};
use crate::Error;

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntheticError {
    #[error("mixture weights must be non-negative and sum to 1, got {0:?}")]
    InvalidWeights([f64; 3]),
    #[error(
        "component means must satisfy 0 <= id_mean < far_mean <= 1, got {id_mean} and {far_mean}"
    )]
    InvalidMeans { id_mean: f64, far_mean: f64 },
    #[error("component spreads must be positive and finite, got {0}")]
    InvalidSpread(f64),
    #[error("pool needs at least one sample")]
    EmptyPool,
    #[error("class count must be at least 2, got {0}")]
    TooFewClasses(usize),
    #[error("{0:?} is not an OOD component")]
    NotOod(Truth),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixtureSpec {
    pub k: usize,
    pub n: usize,
    /// `(id, near, far)` mixing weights.
    pub weights: [f64; 3],
    pub id_mean: f64,
    pub id_sd: f64,
    pub far_mean: f64,
    pub far_sd: f64,
    pub seed: u64,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        Self {
            k: 100,
            n: 10_000,
            weights: [0.5, 0.0, 0.5],
            id_mean: 0.2,
            id_sd: 0.05,
            far_mean: 0.95,
            far_sd: 0.03,
            seed: DEFAULT_SEED,
        }
    }
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        if self.k < 2 {
            return Err(SyntheticError::TooFewClasses(self.k));
        }
        if self.n == 0 {
            return Err(SyntheticError::EmptyPool);
        }
        let w = self.weights;
        if w.iter().any(|x| !x.is_finite() || *x < 0.0)
            || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(SyntheticError::InvalidWeights(w));
        }
        if !(0.0 <= self.id_mean && self.id_mean < self.far_mean && self.far_mean <= 1.0) {
            return Err(SyntheticError::InvalidMeans {
                id_mean: self.id_mean,
                far_mean: self.far_mean,
            });
        }
        for sd in [self.id_sd, self.far_sd] {
            if !(sd.is_finite() && sd > 0.0) {
                return Err(SyntheticError::InvalidSpread(sd));
            }
        }
        Ok(())
    }

    /// Same components, recomposed as `d_id` in-distribution samples plus
    /// `d_ood` samples from `source`.
    pub fn contaminated(
        &self,
        contamination: ContaminationSpec,
        source: Truth,
    ) -> Result<Self, SyntheticError> {
        let n = contamination.total();
        let id = contamination.d_id as f64 / n as f64;
        let ood = contamination.d_ood as f64 / n as f64;
        let weights = match source {
            Truth::NearOod => [id, ood, 0.0],
            Truth::FarOod => [id, 0.0, ood],
            Truth::Id => return Err(SyntheticError::NotOod(source)),
        };
        Ok(Self {
            n,
            weights,
            ..self.clone()
        })
    }
}

/// Scores with their generating component.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPool {
    pub scores: EntropyScoreSet,
    pub truth: Vec<Truth>,
    pub spec: MixtureSpec,
}

impl LabeledPool {
    /// Fraction of samples drawn from each component, `(id, near, far)`.
    pub fn component_fractions(&self) -> [f64; 3] {
        let mut counts = [0usize; 3];
        for t in &self.truth {
            counts[*t as usize] += 1;
        }
        counts.map(|c| c as f64 / self.truth.len() as f64)
    }
}

fn truncated_normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64, hi: f64) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = mean + sd * z;
        if (0.0..=hi).contains(&v) {
            return v;
        }
    }
}

pub fn sample_pool(spec: &MixtureSpec) -> Result<LabeledPool, SyntheticError> {
    spec.validate()?;
    let hi = max_entropy(spec.k);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let [w_id, w_near, _] = spec.weights;
    let mut scores = Vec::with_capacity(spec.n);
    let mut truth = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let pick: f64 = rng.random();
        let (label, u) = if pick < w_id {
            (
                Truth::Id,
                truncated_normal(&mut rng, spec.id_mean * hi, spec.id_sd * hi, hi),
            )
        } else if pick < w_id + w_near {
            (Truth::NearOod, rng.random::<f64>() * hi)
        } else {
            (
                Truth::FarOod,
                truncated_normal(&mut rng, spec.far_mean * hi, spec.far_sd * hi, hi),
            )
        };
        scores.push(u);
        truth.push(label);
    }
    let ids = (0..spec.n).map(|i| format!("s{i:06}")).collect();
    let scores = EntropyScoreSet::new(ids, scores, spec.k).expect("samples lie in [0, ln k]");
    Ok(LabeledPool {
        scores,
        truth,
        spec: spec.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub pool: LabeledPool,
    pub pipeline: PipelineOutcome,
    pub quality: FilterQuality,
}

impl ScenarioOutcome {
    pub fn precision(&self) -> f64 {
        self.quality.precision
    }

    pub fn recall(&self) -> f64 {
        self.quality.recall
    }

    pub fn discard_fraction(&self) -> f64 {
        self.pipeline.mask.discarded_count() as f64 / self.pipeline.mask.len() as f64
    }
}

/// Samples a pool, runs the full pipeline on it with default settings, and
/// scores the resulting mask against the known labels.
pub fn run_scenario(
    spec: &MixtureSpec,
    bandwidth_override: Option<f64>,
) -> Result<ScenarioOutcome, Error> {
    let settings = PipelineSettings {
        bandwidth: bandwidth_override,
        ..PipelineSettings::default()
    };
    run_scenario_with(spec, &settings)
}

pub fn run_scenario_with(
    spec: &MixtureSpec,
    settings: &PipelineSettings,
) -> Result<ScenarioOutcome, Error> {
    let pool = sample_pool(spec)?;
    let pipeline = run_pipeline(&pool.scores, settings)?;
    let quality = filter_quality(&pipeline.mask, &pool.truth)?;
    Ok(ScenarioOutcome {
        pool,
        pipeline,
        quality,
    })
}
