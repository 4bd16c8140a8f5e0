//! Reflected KDE of a bimodal entropy pool, drawn as a text histogram.
//!
//!     cargo run --example kde_density

use use_curate::prelude::*;

fn main() -> Result<(), Error> {
    let pool = sample_pool(&MixtureSpec {
        n: 5000,
        ..MixtureSpec::default()
    })?;
    let h = silverman_bandwidth(&pool.scores)?;
    let grid = DensityGrid::new(pool.scores.k(), 512)?;
    let est = fit_kde(&pool.scores, h, &grid)?;

    println!(
        "n = {}, h = {h:.4}, trapezoid mass = {:.9}",
        est.n(),
        est.raw_mass()
    );
    let level = 1.0 / grid.hi();
    let peak = est.density().iter().cloned().fold(0.0, f64::max);
    for i in (0..grid.points()).step_by(16) {
        let p = est.density()[i];
        let bar = "#".repeat((60.0 * p / peak).round() as usize);
        let mark = if p >= level { '+' } else { ' ' };
        println!("{:6.3} {mark} {:7.4} {bar}", grid.u(i), p);
    }
    println!("('+' marks density above the flat reference 1/ln k = {level:.4})");

    // off-grid queries use the kernel sum directly
    for u in [0.0, 0.5, 2.3] {
        println!(
            "p({u}) = {:.6}, p'({u}) = {:.6}",
            est.kde().density(u),
            est.kde().derivative(u)
        );
    }
    Ok(())
}
