use std::path::PathBuf;

use thiserror::Error;

use crate::density::DensityError;
use crate::entropy::EntropyError;
use crate::filter::FilterError;
use crate::robustness::MetricsError;
use crate::synthetic::SyntheticError;
use crate::threshold::ThresholdError;

/// Process exit codes of the command-line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID_INPUT: i32 = 2;
    pub const DEGENERATE_DATA: i32 = 3;
    pub const IO_FAILURE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Synthetic(#[from] SyntheticError),
    #[error("{}:{line}: {source}", path.display())]
    Row {
        path: PathBuf,
        line: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: invalid config: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("no threshold given; pass a report file or an explicit u*")]
    MissingThreshold,
    #[error("threshold report covers {report} samples but the scores file has {scores}")]
    SampleCountMismatch { report: usize, scores: usize },
    #[error("duplicate sample id {0:?}")]
    DuplicateSampleId(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn at_row(self, path: impl Into<PathBuf>, line: u64) -> Self {
        Error::Row {
            path: path.into(),
            line,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for invalid input, 3 for data too degenerate to estimate a density,
    /// 4 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => exit::IO_FAILURE,
            Error::Row { source, .. } => source.exit_code(),
            Error::Density(
                DensityError::DegenerateScores
                | DensityError::TooFewSamples(_)
                | DensityError::MassNotConserved { .. },
            ) => exit::DEGENERATE_DATA,
            _ => exit::INVALID_INPUT,
        }
    }

    /// Extra advice printed after the message, if any.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            Error::Density(DensityError::DegenerateScores | DensityError::TooFewSamples(_)) => {
                Some("the bandwidth cannot be estimated from these scores; pass --bandwidth")
            }
            Error::Density(DensityError::MassNotConserved { .. }) => {
                Some("increase --bandwidth or --grid-points")
            }
            _ => None,
        }
    }
}
