//! Entropy scores for a handful of softmax outputs.
//!
//!     cargo run --example score_pool

use use_curate::entropy::max_entropy;
use use_curate::io::formats::scores_csv;
use use_curate::prelude::*;

fn main() -> Result<(), Error> {
    let rows: [(&str, [f64; 4]); 4] = [
        ("confident", [1.0, 0.0, 0.0, 0.0]),
        ("leaning", [0.7, 0.2, 0.05, 0.05]),
        ("torn", [0.5, 0.5, 0.0, 0.0]),
        ("clueless", [0.25, 0.25, 0.25, 0.25]),
    ];
    let pool = rows
        .iter()
        .map(|(id, p)| Ok((*id, PredictiveDistribution::new(p, false)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let scores = score_pool(pool)?;

    println!("ln k = {:.6}", max_entropy(scores.k()));
    for (id, u) in scores.iter() {
        println!(
            "{id:>10}  {u:.6}  ({:.0}% of max)",
            100.0 * u / scores.support_max()
        );
    }

    // slightly off rows are only accepted with renormalization
    let sloppy = [0.5, 0.3, 0.1, 0.105];
    println!(
        "strict: {}",
        PredictiveDistribution::new(&sloppy, false).unwrap_err()
    );
    println!(
        "renormalized: {:.6}",
        PredictiveDistribution::new(&sloppy, true)?.entropy()
    );

    print!("\n{}", scores_csv(&scores, None));
    Ok(())
}
