//! The file-based workflow behind the `use-curate` binary, run in a temp dir:
//! simulate, threshold, filter, metrics.
//!
//!     cargo run --example cli_workflow

use use_curate::io::commands::{self, ThresholdSource};
use use_curate::io::config::RunConfig;
use use_curate::prelude::*;

fn main() -> Result<(), Error> {
    let dir = tempfile::tempdir().map_err(|e| Error::Invalid(e.to_string()))?;
    let cfg = RunConfig::from_toml(
        "seed = 11\n[scenario]\nn = 4000\nweights = [0.6, 0.1, 0.3]\n",
        std::path::Path::new("inline.toml"),
    )?;

    let sim = commands::simulate(&cfg, dir.path())?;
    println!(
        "simulated {} samples, precision {:.4}",
        sim.spec.n, sim.quality.precision
    );

    let pool = dir.path().join(commands::POOL_FILE);
    let report_path = dir.path().join("threshold.json");
    let report = commands::threshold(&pool, &cfg, Some(&report_path), false)?;
    println!(
        "u* = {:.4}, bandwidth {:.4} ({:?})",
        report.u_star, report.bandwidth, report.bandwidth_source
    );

    let mask_path = dir.path().join("mask.csv");
    let mask = commands::filter(
        &pool,
        Some(&ThresholdSource::Report(report_path)),
        Some(&mask_path),
    )?;
    println!(
        "kept {}, discarded {}",
        mask.kept_count(),
        mask.discarded_count()
    );
    let text = std::fs::read_to_string(&mask_path).map_err(|e| Error::Invalid(e.to_string()))?;
    for line in text.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
