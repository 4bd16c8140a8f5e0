//! Predictive distributions and their Shannon entropy scores.
//!
//! Entropies are in nats throughout, so a `k`-class distribution scores in
//! `[0, ln k]`.

use thiserror::Error;

/// Absolute tolerance on the probability sum of a validated distribution.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// Negative entries at or above this value are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-9;

/// Raw sums inside this window may be renormalized.
pub const RENORMALIZE_WINDOW: (f64, f64) = (0.99, 1.01);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("probability vector is empty")]
    Empty,
    #[error("non-finite probability {value} at class {index}")]
    NonFiniteInput { index: usize, value: f64 },
    #[error("negative probability {value} at class {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    SumOutOfRange { sum: f64 },
    #[error("a distribution needs at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("pool mixes class counts: expected {expected}, sample {index} has {found}")]
    MixedClassCounts {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("pool is empty")]
    EmptyPool,
    #[error("score set has {scores} scores but {ids} sample ids")]
    LengthMismatch { scores: usize, ids: usize },
    #[error("score {value} at position {index} is outside [0, ln {k}]")]
    ScoreOutOfRange { index: usize, value: f64, k: usize },
}

/// One sample's class-probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveDistribution {
    probs: Vec<f64>,
}

impl PredictiveDistribution {
    /// Validates `raw` as a probability vector.
    ///
    /// Entries in `[-1e-9, 0)` are clamped to zero. With `renormalize` set, a
    /// vector whose sum lies in `[0.99, 1.01]` is divided by that sum;
    /// otherwise the sum must already be within `1e-6` of one.
    pub fn new(raw: &[f64], renormalize: bool) -> Result<Self, EntropyError> {
        if raw.is_empty() {
            return Err(EntropyError::Empty);
        }
        if let Some((index, &value)) = raw.iter().enumerate().find(|(_, p)| !p.is_finite()) {
            return Err(EntropyError::NonFiniteInput { index, value });
        }
        if raw.len() < 2 {
            return Err(EntropyError::TooFewClasses(raw.len()));
        }
        let mut probs = Vec::with_capacity(raw.len());
        for (index, &p) in raw.iter().enumerate() {
            if p < NEGATIVE_CLAMP {
                return Err(EntropyError::NegativeProbability { index, value: p });
            }
            probs.push(p.max(0.0));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            let (lo, hi) = RENORMALIZE_WINDOW;
            if !renormalize || !(lo..=hi).contains(&sum) {
                return Err(EntropyError::SumOutOfRange { sum });
            }
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        probs.iter_mut().for_each(|p| *p = p.min(1.0));
        Ok(Self { probs })
    }

    /// Uniform distribution over `k` classes.
    pub fn uniform(k: usize) -> Result<Self, EntropyError> {
        if k < 2 {
            return Err(EntropyError::TooFewClasses(k));
        }
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
        })
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Shannon entropy in nats, with `0 ln 0 = 0`, clamped to `[0, ln k]`.
    pub fn entropy(&self) -> f64 {
        let h: f64 = -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>();
        // adding 0.0 turns the -0.0 of a one-hot row into 0.0
        h.clamp(0.0, max_entropy(self.k())) + 0.0
    }
}

/// Shannon entropy of a validated distribution, in nats.
pub fn entropy(d: &PredictiveDistribution) -> f64 {
    d.entropy()
}

/// `ln k`, the upper end of the entropy support.
pub fn max_entropy(k: usize) -> f64 {
    (k as f64).ln()
}

/// Entropy scores for a whole unlabeled pool, aligned with their sample ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyScoreSet {
    scores: Vec<f64>,
    sample_ids: Vec<String>,
    k: usize,
}

impl EntropyScoreSet {
    /// Builds a score set from precomputed entropies.
    pub fn new(sample_ids: Vec<String>, scores: Vec<f64>, k: usize) -> Result<Self, EntropyError> {
        if k < 2 {
            return Err(EntropyError::TooFewClasses(k));
        }
        if scores.len() != sample_ids.len() {
            return Err(EntropyError::LengthMismatch {
                scores: scores.len(),
                ids: sample_ids.len(),
            });
        }
        if scores.is_empty() {
            return Err(EntropyError::EmptyPool);
        }
        let hi = max_entropy(k);
        if let Some((index, &value)) = scores
            .iter()
            .enumerate()
            .find(|(_, u)| !u.is_finite() || **u < 0.0 || **u > hi)
        {
            return Err(EntropyError::ScoreOutOfRange { index, value, k });
        }
        Ok(Self {
            scores,
            sample_ids,
            k,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `ln k` for this pool's class count.
    pub fn support_max(&self) -> f64 {
        max_entropy(self.k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.sample_ids
            .iter()
            .map(String::as_str)
            .zip(self.scores.iter().copied())
    }
}

/// Scores every sample of `pool`, preserving order.
pub fn score_pool<I, S>(pool: I) -> Result<EntropyScoreSet, EntropyError>
where
    I: IntoIterator<Item = (S, PredictiveDistribution)>,
    S: Into<String>,
{
    let mut ids = Vec::new();
    let mut scores = Vec::new();
    let mut k = None;
    for (index, (id, dist)) in pool.into_iter().enumerate() {
        let expected = *k.get_or_insert(dist.k());
        if dist.k() != expected {
            return Err(EntropyError::MixedClassCounts {
                index,
                expected,
                found: dist.k(),
            });
        }
        ids.push(id.into());
        scores.push(dist.entropy());
    }
    match k {
        Some(k) => EntropyScoreSet::new(ids, scores, k),
        None => Err(EntropyError::EmptyPool),
    }
}
