use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use use_curate::io::commands::{self, Overrides, ThresholdSource};
use use_curate::io::config::RunConfig;
use use_curate::threshold::ReferenceKind;
use use_curate::Error;

#[derive(Parser)]
#[command(
    name = "use-curate",
    version,
    about = "Entropy-structure curation of unlabeled pools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML config file; defaults to $USE_CURATE_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// KDE bandwidth in nats; Silverman's rule otherwise.
    #[arg(long, global = true)]
    bandwidth: Option<f64>,
    #[arg(long, global = true)]
    reference: Option<ReferenceKind>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Include density, CDF and reference arrays in reports.
    #[arg(long, global = true)]
    emit_density: bool,
    /// Output file; stdout when omitted.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy scores from a probabilities CSV.
    Score {
        input: PathBuf,
        /// Renormalize rows whose sum is slightly off.
        #[arg(long)]
        renormalize: bool,
    },
    /// Fit the score density and report the cut u*.
    Threshold {
        scores: PathBuf,
        /// Add wall-clock time to the report.
        #[arg(long)]
        timing: bool,
    },
    /// Keep/discard mask from a threshold report or an explicit u*.
    Filter {
        scores: PathBuf,
        #[arg(long, conflicts_with = "u_star")]
        report: Option<PathBuf>,
        #[arg(long)]
        u_star: Option<f64>,
    },
    /// Robustness indicators for `series,r,accuracy` rows.
    Metrics {
        series: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sample the configured synthetic scenario into a directory.
    Simulate {
        #[arg(long, default_value = "simulation")]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    let c = &cli.common;
    let overrides = Overrides {
        grid_points: c.grid_points,
        bandwidth: c.bandwidth,
        reference: c.reference,
        seed: c.seed,
        emit_density: c.emit_density,
    };
    let mut cfg = overrides.apply(RunConfig::resolve(c.config.as_deref())?)?;
    let out = c.output.as_deref();
    match cli.command {
        Command::Score { input, renormalize } => {
            cfg.renormalize |= renormalize;
            let scores = commands::score(&input, out, &cfg)?;
            eprintln!("scored {} samples (k = {})", scores.len(), scores.k());
        }
        Command::Threshold { scores, timing } => {
            let r = commands::threshold(&scores, &cfg, out, timing)?;
            eprintln!(
                "u* = {:.6} (crossing_found = {}, fallback = {:?}), kept {}, discarded {}",
                r.u_star, r.crossing_found, r.fallback, r.kept, r.discarded
            );
        }
        Command::Filter {
            scores,
            report,
            u_star,
        } => {
            let source = report
                .map(ThresholdSource::Report)
                .or(u_star.map(ThresholdSource::Value));
            let mask = commands::filter(&scores, source.as_ref(), out)?;
            eprintln!(
                "kept {}, discarded {}",
                mask.kept_count(),
                mask.discarded_count()
            );
        }
        Command::Metrics { series, json } => {
            let r = commands::metrics(&series, &cfg, out, json.as_deref())?;
            eprintln!("{} series", r.series.len());
        }
        Command::Simulate { out_dir } => {
            let r = commands::simulate(&cfg, &out_dir)?;
            eprintln!(
                "u* = {:.6}, precision {:.4}, recall {:.4}, discarded {:.4} -> {}",
                r.pipeline.u_star,
                r.quality.precision,
                r.quality.recall,
                r.discard_fraction,
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
