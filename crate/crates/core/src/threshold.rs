//! Spectral window near the bottom of the fiber spectrum and threshold approximations.

use crate::cell::DirectionData;
use crate::error::{Error, Result};
use crate::fiber::{FiberModel, FiberOperator};
use crate::fit::{loglog_slope, SlopeFit};
use crate::linalg::{min_eigenvalue, norm, spectral_norm, CMat};
use crate::operator::PeriodicOperator;

/// Admissible `delta` and `t0` built from the ellipticity and coefficient bounds.
///
/// The constant in the subordination bound carries an unspecified factor depending only
/// on `d` and `p`; it is exposed as `c_dp`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdWindow {
    pub delta: f64,
    pub t0: f64,
    pub c0: f64,
    pub c1: f64,
    /// `alpha0 ||g^{-1}||^{-1} (2 r0)^{2p}`, a lower bound for the gap above zero at `k = 0`.
    pub gap_lower_bound: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub norm_g: f64,
    pub norm_g_inv: f64,
    pub r0: f64,
    pub c_dp: f64,
}

impl ThresholdWindow {
    pub fn new(op: &PeriodicOperator, c_dp: f64) -> Result<Self> {
        if !(c_dp > 0.0) {
            return Err(Error::InvalidArgument(format!("window factor {c_dp} must be positive")));
        }
        let p = op.order() as i32;
        let cert = op.coefficient().certificate();
        let (alpha0, alpha1) = (op.symbol().alpha0(), op.symbol().alpha1());
        let (norm_g, norm_g_inv) = (cert.norm_g(), cert.norm_g_inv());
        let r0 = op.lattice().inradius();
        let gap_lower_bound = alpha0 / norm_g_inv * (2.0 * r0).powi(2 * p);
        let delta = (gap_lower_bound / 36.0).min(0.25);
        let c0 = c_dp * (alpha1 / alpha0 * norm_g * norm_g_inv).sqrt() * (1.0 + 1.0 / r0).powi(p - 1);
        let c1 = (f64::from(p - 1) * c0).max((alpha1 * norm_g).sqrt());
        let t0 = delta.sqrt() / c1;
        Ok(ThresholdWindow { delta, t0, c0, c1, gap_lower_bound, alpha0, alpha1, norm_g, norm_g_inv, r0, c_dp })
    }
}

/// Spectral projection onto eigenvalues in `[0, delta]`, checked to have rank `n`
/// with `(delta, 3 delta)` free of spectrum.
pub fn threshold_projection(fiber: &FiberOperator, n: usize, window: &ThresholdWindow) -> Result<(CMat, usize)> {
    let t = norm(fiber.k());
    if t > window.t0 * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("|k| = {t} exceeds t0 = {}", window.t0)));
    }
    let spec = fiber.spectrum();
    let rank = spec.values.iter().filter(|&&l| l <= window.delta).count();
    let inside_gap = spec.values.iter().any(|&l| l > window.delta && l < 3.0 * window.delta);
    if rank != n || inside_gap {
        return Err(Error::RankMismatch { expected: n, found: rank });
    }
    let phi = spec.vectors.columns(0, rank);
    Ok((&phi * phi.adjoint(), rank))
}

/// One rung of a threshold ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub t: f64,
    /// `||F(t) - P||`.
    pub projection_error: f64,
    /// `||A(k) F(t) - t^{2p} S P - t^{2p+1} G P||`.
    pub residual: f64,
    /// Same without the `G` term.
    pub residual_without_correction: f64,
    /// Smallest cluster eigenvalue over `t^{2p}`.
    pub eigenvalue_ratio: f64,
}

/// Threshold ladder along one direction with log-log slopes.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub theta: Vec<f64>,
    pub rows: Vec<ThresholdRow>,
    pub projection_slope: Option<SlopeFit>,
    pub residual_slope: Option<SlopeFit>,
    pub residual_without_correction_slope: Option<SlopeFit>,
    /// Smallest eigenvalue of `S(theta)`.
    pub germ_min_eigenvalue: f64,
}

impl ThresholdReport {
    /// Relative gap between the last eigenvalue ratio and the smallest germ eigenvalue.
    pub fn eigenvalue_mismatch(&self) -> f64 {
        let last = self.rows.last().map_or(f64::NAN, |r| r.eigenvalue_ratio);
        (last - self.germ_min_eigenvalue).abs() / self.germ_min_eigenvalue
    }
}

/// Geometric ladder `t0, t0 r, ..., t0 r^{rungs - 1}`.
pub fn geometric_ladder(t0: f64, ratio: f64, rungs: usize) -> Vec<f64> {
    (0..rungs).map(|j| t0 * ratio.powi(j as i32)).collect()
}

/// Runs the threshold ladder at `k = t theta`, fitting slopes over the last `tail` rungs.
pub fn threshold_residual(
    model: &FiberModel,
    window: &ThresholdWindow,
    direction: &DirectionData,
    ladder: &[f64],
    tail: usize,
) -> Result<ThresholdReport> {
    let op = model.operator();
    let n = op.n();
    let p2 = 2 * op.order() as i32;
    let zero = model.frequencies().zero_index();
    let size = model.size();
    let mut p = CMat::zeros(size, size);
    p.view_mut((zero * n, zero * n), (n, n)).fill_with_identity();
    let mut rows = Vec::with_capacity(ladder.len());
    for &t in ladder {
        let k: Vec<f64> = direction.theta.iter().map(|x| t * x).collect();
        let fiber = model.fiber(&k);
        let (f, rank) = threshold_projection(&fiber, n, window)?;
        let spec = fiber.spectrum();
        let phi = spec.vectors.columns(0, rank);
        let mut scaled = phi.into_owned();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= num_complex::Complex64::from(spec.values[j]);
        }
        let af = scaled * phi.adjoint();
        let mut approx = CMat::zeros(size, size);
        approx
            .view_mut((zero * n, zero * n), (n, n))
            .copy_from(&direction.germ.scale(t.powi(p2)));
        let without = spectral_norm(&(&af - &approx));
        let mut v = approx.view_mut((zero * n, zero * n), (n, n));
        v += direction.correction.scale(t.powi(p2 + 1));
        let with = spectral_norm(&(&af - &approx));
        rows.push(ThresholdRow {
            t,
            projection_error: spectral_norm(&(&f - &p)),
            residual: with,
            residual_without_correction: without,
            eigenvalue_ratio: spec.values[0] / t.powi(p2),
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let col = |f: fn(&ThresholdRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Ok(ThresholdReport {
        theta: direction.theta.clone(),
        projection_slope: loglog_slope(&ts, &col(|r| r.projection_error), tail, 0.0),
        residual_slope: loglog_slope(&ts, &col(|r| r.residual), tail, 0.0),
        residual_without_correction_slope: loglog_slope(&ts, &col(|r| r.residual_without_correction), tail, 0.0),
        germ_min_eigenvalue: min_eigenvalue(&direction.germ),
        rows,
    })
}
