//! Boundary-reflected Gaussian KDE of entropy scores on `[0, ln k]`.
//!
//! Every score `u_i` contributes three kernels, centered at `u_i`, `-u_i` and
//! `2 ln k - u_i`. The mirrored copies return the mass a plain kernel would
//! leak past either end of the support, so the estimate integrates to one on
//! `[0, ln k]` and has zero slope at `u = 0`.
//!
//! The density and its analytic derivative are tabulated on a uniform grid;
//! the CDF is the cumulative trapezoid of the tabulated density, rescaled so
//! the last entry is exactly one.

use rayon::prelude::*;
use thiserror::Error;

use crate::entropy::{max_entropy, EntropyScoreSet};

pub const DEFAULT_GRID_POINTS: usize = 1024;
pub const MIN_GRID_POINTS: usize = 64;

/// Allowed deviation of the trapezoid mass from one before rescaling.
pub const MASS_TOLERANCE: f64 = 1e-3;

/// Kernels further than this many bandwidths away are skipped; `phi(10)` is
/// about `7.7e-23`.
const KERNEL_CUTOFF: f64 = 10.0;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("grid needs at least {MIN_GRID_POINTS} points, got {0}")]
    GridTooCoarse(usize),
    #[error("class count must be at least 2, got {0}")]
    TooFewClasses(usize),
    #[error("bandwidth selection needs at least 2 scores, got {0}")]
    TooFewSamples(usize),
    #[error("all scores are identical; pass an explicit bandwidth")]
    DegenerateScores,
    #[error("bandwidth must be positive and finite, got {0}")]
    BandwidthNonPositive(f64),
    #[error("score {value} at position {index} lies outside [0, {hi}]")]
    ScoreOutOfSupport { index: usize, value: f64, hi: f64 },
    #[error("query {u} lies outside [0, {hi}]")]
    OutOfSupport { u: f64, hi: f64 },
    #[error("grid is for k = {grid} but the scores have k = {scores}")]
    ClassCountMismatch { grid: usize, scores: usize },
    #[error(
        "density integrates to {mass} on the grid; bandwidth is too small for the grid spacing"
    )]
    MassNotConserved { mass: f64 },
}

/// Uniform grid spanning the entropy support `[0, ln k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    k: usize,
    hi: f64,
    points: usize,
}

impl DensityGrid {
    pub fn new(k: usize, points: usize) -> Result<Self, DensityError> {
        if k < 2 {
            return Err(DensityError::TooFewClasses(k));
        }
        if points < MIN_GRID_POINTS {
            return Err(DensityError::GridTooCoarse(points));
        }
        Ok(Self {
            k,
            hi: max_entropy(k),
            points,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lo(&self) -> f64 {
        0.0
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.hi / (self.points - 1) as f64
    }

    /// Grid abscissa `i`; the last point is exactly `ln k`.
    pub fn u(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.hi
        } else {
            self.hi * i as f64 / (self.points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.u(i)).collect()
    }

    fn check(&self, u: f64) -> Result<(), DensityError> {
        if (0.0..=self.hi).contains(&u) {
            Ok(())
        } else {
            Err(DensityError::OutOfSupport { u, hi: self.hi })
        }
    }
}

/// The reflected kernel sum itself, evaluable at any point of the support.
#[derive(Debug, Clone)]
pub struct ReflectedGaussianKde {
    // all 3n kernel centers, sorted
    centers: Vec<f64>,
    bandwidth: f64,
    n: usize,
}

impl ReflectedGaussianKde {
    pub fn new(scores: &[f64], support_max: f64, bandwidth: f64) -> Result<Self, DensityError> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(DensityError::BandwidthNonPositive(bandwidth));
        }
        if let Some((index, &value)) = scores
            .iter()
            .enumerate()
            .find(|(_, u)| !(0.0..=support_max).contains(*u))
        {
            return Err(DensityError::ScoreOutOfSupport {
                index,
                value,
                hi: support_max,
            });
        }
        let mut centers = Vec::with_capacity(3 * scores.len());
        for &u in scores {
            centers.extend([u, -u, 2.0 * support_max - u]);
        }
        centers.sort_by(f64::total_cmp);
        Ok(Self {
            centers,
            bandwidth,
            n: scores.len(),
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn window(&self, u: f64) -> &[f64] {
        let reach = KERNEL_CUTOFF * self.bandwidth;
        let start = self.centers.partition_point(|&c| c < u - reach);
        let end = self.centers.partition_point(|&c| c <= u + reach);
        &self.centers[start..end]
    }

    pub fn density(&self, u: f64) -> f64 {
        let h = self.bandwidth;
        let sum: f64 = self
            .window(u)
            .iter()
            .map(|&c| {
                let z = (u - c) / h;
                (-0.5 * z * z).exp()
            })
            .sum();
        sum * FRAC_1_SQRT_2PI / (self.n as f64 * h)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let h = self.bandwidth;
        let sum: f64 = self
            .window(u)
            .iter()
            .map(|&c| {
                let z = (u - c) / h;
                -z * (-0.5 * z * z).exp()
            })
            .sum();
        sum * FRAC_1_SQRT_2PI / (self.n as f64 * h * h)
    }

    /// Density and derivative in one pass over the kernel window.
    pub fn density_and_derivative(&self, u: f64) -> (f64, f64) {
        let h = self.bandwidth;
        let (s0, s1) = self.window(u).iter().fold((0.0, 0.0), |(s0, s1), &c| {
            let z = (u - c) / h;
            let k = (-0.5 * z * z).exp();
            (s0 + k, s1 - z * k)
        });
        let scale = FRAC_1_SQRT_2PI / (self.n as f64 * h);
        (s0 * scale, s1 * scale / h)
    }
}

/// Tabulated density, slope and CDF of one pool's entropy scores.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    grid: DensityGrid,
    density: Vec<f64>,
    density_deriv: Vec<f64>,
    cdf: Vec<f64>,
    raw_mass: f64,
    kde: ReflectedGaussianKde,
}

impl DensityEstimate {
    pub fn grid(&self) -> &DensityGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn density_deriv(&self) -> &[f64] {
        &self.density_deriv
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Trapezoid integral of the density before the CDF was rescaled.
    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    pub fn bandwidth(&self) -> f64 {
        self.kde.bandwidth
    }

    pub fn n(&self) -> usize {
        self.kde.n
    }

    pub fn kde(&self) -> &ReflectedGaussianKde {
        &self.kde
    }

    /// Linear interpolation of the tabulated density.
    pub fn eval(&self, u: f64) -> Result<f64, DensityError> {
        self.grid.check(u)?;
        let step = self.grid.spacing();
        let last = self.grid.points - 1;
        let i = ((u / step).floor() as usize).min(last);
        if i == last || u == self.grid.u(i) {
            return Ok(self.density[i]);
        }
        let (u0, u1) = (self.grid.u(i), self.grid.u(i + 1));
        let t = (u - u0) / (u1 - u0);
        Ok(self.density[i] + t * (self.density[i + 1] - self.density[i]))
    }
}

/// Linear interpolation of `est`'s tabulated density at `u`.
pub fn eval_density(est: &DensityEstimate, u: f64) -> Result<f64, DensityError> {
    est.eval(u)
}

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^(-1/5)`, floored at
/// `1e-4 ln k`.
///
/// The IQR uses linearly interpolated quantiles. When more than half the
/// scores tie and the IQR collapses to zero, the standard deviation is used
/// alone.
pub fn silverman_bandwidth(scores: &EntropyScoreSet) -> Result<f64, DensityError> {
    let xs = scores.scores();
    let n = xs.len();
    if n < 2 {
        return Err(DensityError::TooFewSamples(n));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 || xs.iter().all(|&u| u == xs[0]) {
        return Err(DensityError::DegenerateScores);
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * (n as f64).powf(-0.2);
    Ok(h.max(1e-4 * scores.support_max()))
}

/// Type-7 (linear interpolation) quantile of already sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Fits the reflected KDE with the given bandwidth and tabulates it on `grid`.
pub fn fit_kde(
    scores: &EntropyScoreSet,
    bandwidth: f64,
    grid: &DensityGrid,
) -> Result<DensityEstimate, DensityError> {
    if grid.k() != scores.k() {
        return Err(DensityError::ClassCountMismatch {
            grid: grid.k(),
            scores: scores.k(),
        });
    }
    let kde = ReflectedGaussianKde::new(scores.scores(), grid.hi(), bandwidth)?;
    let (density, density_deriv): (Vec<f64>, Vec<f64>) = (0..grid.points())
        .into_par_iter()
        .map(|i| kde.density_and_derivative(grid.u(i)))
        .unzip();

    let mut cdf = Vec::with_capacity(grid.points());
    let mut acc = 0.0;
    cdf.push(0.0);
    for i in 1..grid.points() {
        acc += 0.5 * (density[i - 1] + density[i]) * (grid.u(i) - grid.u(i - 1));
        cdf.push(acc);
    }
    let raw_mass = acc;
    if !((1.0 - MASS_TOLERANCE)..=(1.0 + MASS_TOLERANCE)).contains(&raw_mass) {
        return Err(DensityError::MassNotConserved { mass: raw_mass });
    }
    cdf.iter_mut().for_each(|f| *f /= raw_mass);
    *cdf.last_mut().expect("grid has points") = 1.0;

    Ok(DensityEstimate {
        grid: grid.clone(),
        density,
        density_deriv,
        cdf,
        raw_mass,
        kde,
    })
}
