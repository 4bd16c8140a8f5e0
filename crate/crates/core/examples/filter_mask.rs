//! Applying a cut and scoring the mask against known labels.
//!
//!     cargo run --example filter_mask

use use_curate::prelude::*;

fn main() -> Result<(), Error> {
    let spec = MixtureSpec {
        weights: [0.5, 0.2, 0.3],
        ..MixtureSpec::default()
    };
    let pool = sample_pool(&spec)?;
    let out = run_pipeline(&pool.scores, &PipelineSettings::default())?;
    let mask = &out.mask;
    println!(
        "u* = {:.4}: kept {}, discarded {}",
        mask.u_star(),
        mask.kept_count(),
        mask.discarded_count()
    );

    let q = filter_quality(mask, &pool.truth)?;
    println!("precision {:.4}, recall {:.4}", q.precision, q.recall);
    println!(
        "near-OOD recall {:.4}, far-OOD recall {:.4}",
        q.near_recall.unwrap_or(f64::NAN),
        q.far_recall.unwrap_or(f64::NAN)
    );

    // a hand-picked cut for comparison
    let manual = UseThreshold::explicit(0.5 * pool.scores.support_max(), pool.scores.k());
    let q = filter_quality(&apply_threshold(&pool.scores, &manual)?, &pool.truth)?;
    println!(
        "cut at 0.5 ln k: precision {:.4}, recall {:.4}",
        q.precision, q.recall
    );

    let kept: Vec<&str> = mask.kept_ids().take(5).collect();
    println!("first kept ids: {kept:?}");
    Ok(())
}
