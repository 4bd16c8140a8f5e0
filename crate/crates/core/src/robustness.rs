//! Robustness indicators over an accuracy-vs-contamination series.
//!
//! | metric | definition |
//! |--------|------------|
//! | `avg`    | mean accuracy |
//! | `rslope` | least-squares slope of accuracy on `r` |
//! | `gm`     | `sum_i |a_i - mean(a)|` |
//! | `bad`    | largest adjacent slope `(a_{i+1} - a_i) / (r_{i+1} - r_i)` |
//! | `wad`    | smallest adjacent slope |
//! | `p_ad`   | share of adjacent steps with `a_{i+1} >= a_i` |

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("series needs at least 2 points, got {0}")]
    TooShort(usize),
    #[error("contamination ratios must be strictly increasing (r = {prev} then {next})")]
    NonIncreasingRatio { prev: f64, next: f64 },
    #[error("contamination ratio {0} outside [0, 1)")]
    RatioOutOfRange(f64),
    #[error("accuracy {0} outside [0, 1]")]
    AccuracyOutOfRange(f64),
    #[error("all contamination ratios coincide")]
    DegenerateAbscissa,
}

/// `(r, accuracy)` pairs, strictly increasing in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySeries {
    r: Vec<f64>,
    acc: Vec<f64>,
}

impl AccuracySeries {
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, MetricsError> {
        let (r, acc): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if r.len() < 2 {
            return Err(MetricsError::TooShort(r.len()));
        }
        if let Some(&x) = r.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(MetricsError::RatioOutOfRange(x));
        }
        if let Some(&a) = acc.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(MetricsError::AccuracyOutOfRange(a));
        }
        if let Some(w) = r.windows(2).find(|w| w[1] <= w[0]) {
            return Err(MetricsError::NonIncreasingRatio {
                prev: w[0],
                next: w[1],
            });
        }
        Ok(Self { r, acc })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.r
    }

    pub fn accuracies(&self) -> &[f64] {
        &self.acc
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn adjacent_slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.r
            .windows(2)
            .zip(self.acc.windows(2))
            .map(|(r, a)| (a[1] - a[0]) / (r[1] - r[0]))
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn avg(s: &AccuracySeries) -> f64 {
    mean(&s.acc)
}

pub fn rslope(s: &AccuracySeries) -> Result<f64, MetricsError> {
    let (rbar, abar) = (mean(&s.r), mean(&s.acc));
    let (sxy, sxx) =
        s.r.iter()
            .zip(&s.acc)
            .fold((0.0, 0.0), |(sxy, sxx), (r, a)| {
                (sxy + (r - rbar) * (a - abar), sxx + (r - rbar).powi(2))
            });
    if sxx == 0.0 {
        return Err(MetricsError::DegenerateAbscissa);
    }
    Ok(sxy / sxx)
}

pub fn gm(s: &AccuracySeries) -> f64 {
    let abar = mean(&s.acc);
    s.acc.iter().map(|a| (a - abar).abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjacentDrops {
    pub bad: f64,
    pub wad: f64,
    pub p_ad: f64,
}

pub fn adjacent_drops(s: &AccuracySeries) -> AdjacentDrops {
    let (bad, wad) = s
        .adjacent_slopes()
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), d| {
            (hi.max(d), lo.min(d))
        });
    let steps = s.len() - 1;
    let non_decreasing = s.acc.windows(2).filter(|a| a[1] - a[0] >= 0.0).count();
    AdjacentDrops {
        bad,
        wad,
        p_ad: non_decreasing as f64 / steps as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub avg: f64,
    pub rslope: f64,
    pub gm: f64,
    pub bad: f64,
    pub wad: f64,
    pub p_ad: f64,
}

impl RobustnessReport {
    pub fn compute(s: &AccuracySeries) -> Result<Self, MetricsError> {
        let drops = adjacent_drops(s);
        Ok(Self {
            avg: avg(s),
            rslope: rslope(s)?,
            gm: gm(s),
            bad: drops.bad,
            wad: drops.wad,
            p_ad: drops.p_ad,
        })
    }

    /// Values in table column order: Avg, Rslope, GM, BAD, WAD, P.
    pub fn columns(&self) -> [f64; 6] {
        [
            self.avg,
            self.rslope,
            self.gm,
            self.bad,
            self.wad,
            self.p_ad,
        ]
    }

    pub const COLUMN_NAMES: [&'static str; 6] = ["avg", "rslope", "gm", "bad", "wad", "p_ad"];

    /// All six values rounded to `decimals` places, half away from zero.
    pub fn rounded(&self, decimals: i32) -> Self {
        let f = |x| round_half_away(x, decimals);
        Self {
            avg: f(self.avg),
            rslope: f(self.rslope),
            gm: f(self.gm),
            bad: f(self.bad),
            wad: f(self.wad),
            p_ad: f(self.p_ad),
        }
    }
}

/// Rounds half away from zero at `decimals` places.
pub fn round_half_away(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let y = (x * scale).round() / scale;
    if y == 0.0 {
        0.0
    } else {
        y
    }
}
