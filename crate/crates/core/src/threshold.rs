//! Reference curves, CDF discrepancy and the entropy cut `u*`.
//!
//! With `g(u) = p(u) - F0'(u)`, the cut is the leftmost point where `g`
//! passes from non-negative to negative while the density is not rising.
//! Grid intervals are scanned left to right; the first bracketing interval is
//! refined by bisection on the exact kernel sum, and the crossing is accepted
//! only if the analytic slope there is `<= 1e-9`.
//!
//! A pool whose smoothed CDF never leaves the sampling-noise band around the
//! reference (Dvoretzky-Kiefer-Wolfowitz radius at level `alpha`) carries no
//! detectable structure. Its density still wiggles around `F0'` and produces
//! spurious crossings, so such pools are reported as structureless and fall
//! back to keeping everything. Set `structure_alpha` to `None` to disable the
//! gate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{DensityEstimate, DensityGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error("unsupported reference curve: {0}")]
    UnsupportedKind(String),
    #[error("density grid (k = {est_k}, {est_points} points) does not match reference grid (k = {ref_k}, {ref_points} points)")]
    GridMismatch {
        est_k: usize,
        est_points: usize,
        ref_k: usize,
        ref_points: usize,
    },
    #[error("structure gate level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Flat density over `[0, ln k]`: `F0(u) = u / ln k`.
    #[default]
    UniformEntropyAxis,
}

impl std::str::FromStr for ReferenceKind {
    type Err = ThresholdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform-entropy-axis" | "uniform" => Ok(Self::UniformEntropyAxis),
            other => Err(ThresholdError::UnsupportedKind(other.to_owned())),
        }
    }
}

impl std::fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::UniformEntropyAxis => f.write_str("uniform-entropy-axis"),
        }
    }
}

/// A structureless reference CDF tabulated on a density grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurve {
    kind: ReferenceKind,
    grid: DensityGrid,
    cdf: Vec<f64>,
    density: Vec<f64>,
}

impl ReferenceCurve {
    pub fn kind(&self) -> ReferenceKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.grid.k()
    }

    pub fn grid(&self) -> &DensityGrid {
        &self.grid
    }

    /// `F0` at each grid point.
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// `F0'` at each grid point.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// `F0'` at an arbitrary point of the support.
    pub fn density_at(&self, _u: f64) -> f64 {
        match self.kind {
            ReferenceKind::UniformEntropyAxis => 1.0 / self.grid.hi(),
        }
    }

    pub fn cdf_at(&self, u: f64) -> f64 {
        match self.kind {
            ReferenceKind::UniformEntropyAxis => (u / self.grid.hi()).clamp(0.0, 1.0),
        }
    }
}

/// Tabulates the reference curve `kind` on `grid`.
pub fn make_reference(kind: ReferenceKind, grid: &DensityGrid) -> ReferenceCurve {
    let hi = grid.hi();
    let (cdf, density) = match kind {
        ReferenceKind::UniformEntropyAxis => {
            let mut cdf: Vec<f64> = grid.values().iter().map(|u| u / hi).collect();
            *cdf.last_mut().expect("grid has points") = 1.0;
            (cdf, vec![1.0 / hi; grid.points()])
        }
    };
    ReferenceCurve {
        kind,
        grid: grid.clone(),
        cdf,
        density,
    }
}

/// `Delta(u) = F(u) - F0(u)` and its derivative on the shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyProfile {
    grid: DensityGrid,
    delta: Vec<f64>,
    delta_deriv: Vec<f64>,
}

impl DiscrepancyProfile {
    pub fn grid(&self) -> &DensityGrid {
        &self.grid
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn delta_deriv(&self) -> &[f64] {
        &self.delta_deriv
    }

    /// Largest `|Delta|` over the grid.
    pub fn sup_abs(&self) -> f64 {
        self.delta.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Grid index and value of the largest `Delta`.
    pub fn argmax(&self) -> (usize, f64) {
        self.delta
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, d)| {
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            })
    }
}

fn check_grids(est: &DensityEstimate, reference: &ReferenceCurve) -> Result<(), ThresholdError> {
    let (a, b) = (est.grid(), reference.grid());
    if a != b {
        return Err(ThresholdError::GridMismatch {
            est_k: a.k(),
            est_points: a.points(),
            ref_k: b.k(),
            ref_points: b.points(),
        });
    }
    Ok(())
}

pub fn discrepancy(
    est: &DensityEstimate,
    reference: &ReferenceCurve,
) -> Result<DiscrepancyProfile, ThresholdError> {
    check_grids(est, reference)?;
    let delta = est
        .cdf()
        .iter()
        .zip(reference.cdf())
        .map(|(f, f0)| f - f0)
        .collect();
    let delta_deriv = est
        .density()
        .iter()
        .zip(reference.density())
        .map(|(p, p0)| p - p0)
        .collect();
    Ok(DiscrepancyProfile {
        grid: est.grid().clone(),
        delta,
        delta_deriv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    None,
    KeepAll,
}

/// Tuning knobs of the crossing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    /// Bisection stops once `|g| <` this.
    pub residual_tol: f64,
    pub max_iters: u32,
    /// A refined crossing is accepted when the density slope is `<=` this.
    pub slope_tol: f64,
    /// Level of the structurelessness gate; `None` disables it.
    pub structure_alpha: Option<f64>,
}

pub const DEFAULT_STRUCTURE_ALPHA: f64 = 1e-3;

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            max_iters: 100,
            slope_tol: 1e-9,
            structure_alpha: Some(DEFAULT_STRUCTURE_ALPHA),
        }
    }
}

/// DKW band radius `sqrt(ln(2 / alpha) / (2 n))`.
pub fn noise_band(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Where and how the cut was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDiagnostics {
    /// Left grid index of the accepted bracketing interval.
    pub bracket: Option<usize>,
    /// `g(u*)` after refinement.
    pub residual: Option<f64>,
    /// Analytic density slope at `u*`.
    pub slope: Option<f64>,
    /// Bracketing intervals rejected by the slope test before acceptance.
    pub rejected_brackets: Vec<usize>,
    pub sup_abs_discrepancy: f64,
    pub argmax_discrepancy_u: f64,
    pub max_discrepancy: f64,
    pub noise_band: Option<f64>,
    pub structureless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UseThreshold {
    pub u_star: f64,
    pub k: usize,
    pub crossing_found: bool,
    pub fallback: Fallback,
    pub refinement_iters: u32,
    /// Absent for cuts supplied by hand.
    pub diagnostics: Option<ThresholdDiagnostics>,
}

impl UseThreshold {
    /// Cut at an explicit value, as when read from the command line.
    pub fn explicit(u_star: f64, k: usize) -> Self {
        Self {
            u_star,
            k,
            crossing_found: false,
            fallback: Fallback::None,
            refinement_iters: 0,
            diagnostics: None,
        }
    }
}

struct Refined {
    u: f64,
    residual: f64,
    iters: u32,
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, opts: &ThresholdOptions) -> Refined {
    // invariant: g(lo) >= 0 > g(hi)
    let mut best = Refined {
        u: hi,
        residual: g(hi),
        iters: 0,
    };
    for iter in 1..=opts.max_iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        best = Refined {
            u: mid,
            residual: gm,
            iters: iter,
        };
        if gm.abs() < opts.residual_tol {
            break;
        }
        if gm >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}

/// Locates the cut with default options.
pub fn find_threshold(
    est: &DensityEstimate,
    reference: &ReferenceCurve,
) -> Result<UseThreshold, ThresholdError> {
    find_threshold_with(est, reference, &ThresholdOptions::default())
}

pub fn find_threshold_with(
    est: &DensityEstimate,
    reference: &ReferenceCurve,
    opts: &ThresholdOptions,
) -> Result<UseThreshold, ThresholdError> {
    let profile = discrepancy(est, reference)?;
    let grid = est.grid();
    let (arg, max_delta) = profile.argmax();
    let sup = profile.sup_abs();

    let band = match opts.structure_alpha {
        Some(alpha) if !(alpha > 0.0 && alpha < 1.0) => {
            return Err(ThresholdError::InvalidAlpha(alpha))
        }
        Some(alpha) => Some(noise_band(est.n(), alpha)),
        None => None,
    };
    let structureless = band.is_some_and(|b| sup <= b);

    let mut diagnostics = ThresholdDiagnostics {
        bracket: None,
        residual: None,
        slope: None,
        rejected_brackets: Vec::new(),
        sup_abs_discrepancy: sup,
        argmax_discrepancy_u: grid.u(arg),
        max_discrepancy: max_delta,
        noise_band: band,
        structureless,
    };
    let keep_all = |diagnostics: ThresholdDiagnostics, iters: u32| UseThreshold {
        u_star: grid.hi(),
        k: grid.k(),
        crossing_found: false,
        fallback: Fallback::KeepAll,
        refinement_iters: iters,
        diagnostics: Some(diagnostics),
    };
    if structureless {
        return Ok(keep_all(diagnostics, 0));
    }

    let kde = est.kde();
    let g = |u: f64| kde.density(u) - reference.density_at(u);
    let gaps = profile.delta_deriv();
    let mut total_iters = 0;
    for i in 0..gaps.len() - 1 {
        if !(gaps[i] >= 0.0 && gaps[i + 1] < 0.0) {
            continue;
        }
        let refined = bisect(g, grid.u(i), grid.u(i + 1), opts);
        total_iters += refined.iters;
        let slope = kde.derivative(refined.u);
        if slope <= opts.slope_tol {
            diagnostics.bracket = Some(i);
            diagnostics.residual = Some(refined.residual);
            diagnostics.slope = Some(slope);
            return Ok(UseThreshold {
                u_star: refined.u,
                k: grid.k(),
                crossing_found: true,
                fallback: Fallback::None,
                refinement_iters: refined.iters,
                diagnostics: Some(diagnostics),
            });
        }
        diagnostics.rejected_brackets.push(i);
    }
    Ok(keep_all(diagnostics, total_iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::fit_kde;
    use crate::entropy::EntropyScoreSet;

    fn estimate(scores: &[f64], k: usize, h: f64, points: usize) -> DensityEstimate {
        let ids = (0..scores.len()).map(|i| i.to_string()).collect();
        let set = EntropyScoreSet::new(ids, scores.to_vec(), k).unwrap();
        fit_kde(&set, h, &DensityGrid::new(k, points).unwrap()).unwrap()
    }

    #[test]
    fn reference_values() {
        let grid = DensityGrid::new(100, 1025).unwrap();
        let r = make_reference(ReferenceKind::UniformEntropyAxis, &grid);
        assert_eq!(*r.cdf().last().unwrap(), 1.0);
        assert!((r.cdf()[512] - 0.5).abs() < 1e-15);
        assert!((r.cdf_at(100f64.ln() / 2.0) - 0.5).abs() < 1e-15);

        let grid = DensityGrid::new(2, 64).unwrap();
        let r = make_reference(ReferenceKind::UniformEntropyAxis, &grid);
        assert!(r
            .density()
            .iter()
            .all(|&d| (d - 1.0 / std::f64::consts::LN_2).abs() < 1e-12));
    }

    #[test]
    fn unknown_reference_kind() {
        assert_eq!(
            "gaussian".parse::<ReferenceKind>(),
            Err(ThresholdError::UnsupportedKind("gaussian".into()))
        );
        assert_eq!(
            "uniform-entropy-axis".parse::<ReferenceKind>(),
            Ok(ReferenceKind::UniformEntropyAxis)
        );
    }

    #[test]
    fn discrepancy_endpoints_vanish() {
        let hi = 10f64.ln();
        let scores: Vec<f64> = (0..50).map(|i| hi * (i as f64 / 50.0).powi(3)).collect();
        let est = estimate(&scores, 10, 0.1, 512);
        let r = make_reference(ReferenceKind::UniformEntropyAxis, est.grid());
        let d = discrepancy(&est, &r).unwrap();
        assert_eq!(d.delta()[0], 0.0);
        assert!(d.delta().last().unwrap().abs() < 1e-6);
    }

    #[test]
    fn discrepancy_of_reference_against_itself() {
        // uniform scores with a wide kernel reproduce F0 closely
        let hi = 10f64.ln();
        let scores: Vec<f64> = (0..2000).map(|i| hi * (i as f64 + 0.5) / 2000.0).collect();
        let est = estimate(&scores, 10, 0.05, 512);
        let r = make_reference(ReferenceKind::UniformEntropyAxis, est.grid());
        let d = discrepancy(&est, &r).unwrap();
        assert!(d.sup_abs() < 1e-3);
    }

    #[test]
    fn grid_mismatch() {
        let est = estimate(&[0.3, 0.5, 0.9], 10, 0.2, 128);
        let other = DensityGrid::new(10, 256).unwrap();
        let r = make_reference(ReferenceKind::UniformEntropyAxis, &other);
        assert!(matches!(
            discrepancy(&est, &r),
            Err(ThresholdError::GridMismatch { .. })
        ));
    }

    #[test]
    fn single_bump_crossing_on_right_shoulder() {
        let hi = 100f64.ln();
        let scores: Vec<f64> = (0..400)
            .map(|i| hi * (0.1 + 0.02 * ((i as f64 + 0.5) / 400.0 - 0.5)))
            .collect();
        let est = estimate(&scores, 100, 0.02 * hi, 1024);
        let r = make_reference(ReferenceKind::UniformEntropyAxis, est.grid());
        let t = find_threshold_with(
            &est,
            &r,
            &ThresholdOptions {
                structure_alpha: None,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(t.crossing_found);
        assert!(t.u_star > 0.1 * hi);
        assert!(t.diagnostics.as_ref().unwrap().residual.unwrap().abs() < 1e-8);
        assert!(t.diagnostics.as_ref().unwrap().slope.unwrap() < 0.0);
    }

    #[test]
    fn pure_high_entropy_pool_keeps_all() {
        // density starts below the reference and rises monotonically to ln k
        let hi = 10f64.ln();
        let scores: Vec<f64> = (0..300)
            .map(|i| hi * (0.9 + 0.1 * i as f64 / 300.0))
            .collect();
        let est = estimate(&scores, 10, 0.05, 256);
        let r = make_reference(ReferenceKind::UniformEntropyAxis, est.grid());
        let opts = ThresholdOptions {
            structure_alpha: None,
            ..Default::default()
        };
        let t = find_threshold_with(&est, &r, &opts).unwrap();
        assert!(!t.crossing_found);
        assert_eq!(t.fallback, Fallback::KeepAll);
        assert_eq!(t.u_star, hi);
        assert!(!t.diagnostics.as_ref().unwrap().structureless);
    }

    #[test]
    fn bisection_respects_tolerance() {
        let opts = ThresholdOptions::default();
        let r = bisect(|u| 0.3 - u, 0.0, 1.0, &opts);
        assert!(r.residual.abs() < 1e-8);
        assert!((r.u - 0.3).abs() < 1e-8);
    }

    #[test]
    fn invalid_alpha() {
        let est = estimate(&[0.3, 0.5, 0.9], 10, 0.2, 128);
        let r = make_reference(ReferenceKind::UniformEntropyAxis, est.grid());
        let opts = ThresholdOptions {
            structure_alpha: Some(1.5),
            ..Default::default()
        };
        assert_eq!(
            find_threshold_with(&est, &r, &opts),
            Err(ThresholdError::InvalidAlpha(1.5))
        );
    }
}
