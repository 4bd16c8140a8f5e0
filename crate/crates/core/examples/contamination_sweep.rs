//! How u* and filter quality move as the OOD share grows.
//!
//!     cargo run --release --example contamination_sweep

use use_curate::prelude::*;

fn main() -> Result<(), Error> {
    let base = MixtureSpec::default();
    let hi = use_curate::entropy::max_entropy(base.k);
    for source in [Truth::NearOod, Truth::FarOod] {
        println!("{}:", source.as_str());
        println!("     r    n_ood   u*/ln k  precision  recall");
        for r in [0.2, 0.4, 0.6, 0.8] {
            let c = ContaminationSpec::for_ratio(10_000, r)?;
            let out = run_scenario(&base.contaminated(c, source)?, None)?;
            println!(
                "  {r:.1}  {:7}  {:8.4}  {:9.4}  {:6.4}",
                c.d_ood,
                out.pipeline.threshold.u_star / hi,
                out.precision(),
                out.recall()
            );
        }
    }
    Ok(())
}
