//! Locating u* on a synthetic pool and inspecting the crossing diagnostics.
//!
//!     cargo run --example find_threshold

use use_curate::prelude::*;
use use_curate::threshold::{find_threshold_with, ThresholdOptions};

fn main() -> Result<(), Error> {
    let pool = sample_pool(&MixtureSpec::default())?;
    let settings = PipelineSettings::default();
    let out = run_pipeline(&pool.scores, &settings)?;
    let t = &out.threshold;
    let hi = out.estimate.grid().hi();

    println!(
        "u* = {:.6} ({:.3} ln k), crossing found: {}",
        t.u_star,
        t.u_star / hi,
        t.crossing_found
    );
    if let Some(d) = &t.diagnostics {
        println!(
            "bisection: {} iterations, residual {:.2e}, slope {:.4}",
            t.refinement_iters,
            d.residual.unwrap_or(f64::NAN),
            d.slope.unwrap_or(f64::NAN)
        );
        println!(
            "sup |F - F0| = {:.4} at u = {:.4}; noise band {:.4}",
            d.sup_abs_discrepancy,
            d.argmax_discrepancy_u,
            d.noise_band.unwrap_or(0.0)
        );
    }

    let profile = discrepancy(&out.estimate, &out.reference)?;
    let (i, peak) = profile.argmax();
    println!(
        "largest discrepancy {peak:.4} at grid u = {:.4}",
        out.estimate.grid().u(i)
    );

    // a structureless pool keeps everything
    let flat = sample_pool(&MixtureSpec {
        weights: [0.0, 1.0, 0.0],
        ..MixtureSpec::default()
    })?;
    let flat_out = run_pipeline(&flat.scores, &settings)?;
    println!(
        "uniform pool: fallback {:?}, u* = {:.4}",
        flat_out.threshold.fallback, flat_out.threshold.u_star
    );

    // without the noise gate the search runs on raw KDE wiggles
    let ungated = ThresholdOptions {
        structure_alpha: None,
        ..ThresholdOptions::default()
    };
    let raw = find_threshold_with(&flat_out.estimate, &flat_out.reference, &ungated)?;
    println!(
        "uniform pool, gate off: crossing found {}, u* = {:.4}",
        raw.crossing_found, raw.u_star
    );
    Ok(())
}
