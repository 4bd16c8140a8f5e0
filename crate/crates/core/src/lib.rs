//! Entropy-structure curation of unlabeled pools.
//!
//! Given per-sample class probabilities from a proxy classifier, this crate
//! scores each sample by its Shannon entropy, estimates the density of those
//! scores on `[0, ln k]`, and finds the entropy `u*` where the density first
//! falls through a flat structureless reference. Samples above `u*` are
//! dropped before semi-supervised training.
//!
//! It also computes robustness indicators (Avg, Rslope, GM, BAD, WAD, P) over
//! accuracy-vs-contamination series.
//!
//! ```
//! use use_curate::prelude::*;
//!
//! let pool = sample_pool(&MixtureSpec { n: 4000, ..MixtureSpec::default() })?;
//! let outcome = run_pipeline(&pool.scores, &PipelineSettings::default())?;
//! assert!(outcome.threshold.crossing_found);
//! # Ok::<(), use_curate::Error>(())
//! ```

pub mod density;
pub mod entropy;
mod error;
pub mod filter;
pub mod io;
pub mod pipeline;
pub mod robustness;
pub mod synthetic;
pub mod threshold;

pub use error::{exit, Error};

pub mod prelude {
    pub use crate::density::{
        eval_density, fit_kde, silverman_bandwidth, DensityEstimate, DensityGrid,
    };
    pub use crate::entropy::{entropy, score_pool, EntropyScoreSet, PredictiveDistribution};
    pub use crate::filter::{
        apply_threshold, contamination_ratio, filter_quality, ContaminationSpec, Decision,
        FilterMask, FilterQuality, Truth,
    };
    pub use crate::pipeline::{run_pipeline, PipelineOutcome, PipelineSettings};
    pub use crate::robustness::{AccuracySeries, RobustnessReport};
    pub use crate::synthetic::{run_scenario, sample_pool, LabeledPool, MixtureSpec};
    pub use crate::threshold::{
        discrepancy, find_threshold, make_reference, Fallback, ReferenceKind, UseThreshold,
    };
    pub use crate::Error;
}
