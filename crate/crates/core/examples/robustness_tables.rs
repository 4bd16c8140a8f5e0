//! Robustness indicators over accuracy-vs-contamination series.
//!
//!     cargo run --example robustness_tables [series.csv]
//!
//! Without an argument the bundled CIFAR-100 200-label table is used.

use std::path::PathBuf;

use use_curate::io::formats::{metrics_csv, read_series};
use use_curate::prelude::*;

fn main() -> Result<(), Error> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/golden/table2_accuracy.csv")
        });
    let rows = read_series(&path)?
        .into_iter()
        .map(|(name, s)| Ok((name, RobustnessReport::compute(&s)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    print!("{}", metrics_csv(&rows, 4));

    let flat = AccuracySeries::new([(0.0, 0.7), (0.2, 0.7), (0.4, 0.7)])?;
    println!("\nconstant series: {:?}", RobustnessReport::compute(&flat)?);
    Ok(())
}
