//! Supremum of the smoothed error norm over a set of quasimomenta.

use rayon::prelude::*;

use crate::fiber::{smoothed_error, FiberModel};

/// One `(tau, eps, s)` evaluation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorQuery {
    pub tau: f64,
    pub eps: f64,
    pub s: f64,
}

/// Maximum over the sampled points and where it was attained.
#[derive(Debug, Clone, PartialEq)]
pub struct SupError {
    pub value: f64,
    pub index: usize,
    pub k: Vec<f64>,
}

/// Evaluates every query at every point and returns the per-query maximum.
///
/// Each point assembles and diagonalizes its fibers once for all queries. Points are
/// processed in parallel and reduced in input order, so ties resolve to the earliest
/// point and the result does not depend on the thread count.
pub fn sup_errors(model: &FiberModel, points: &[Vec<f64>], queries: &[ErrorQuery]) -> Vec<SupError> {
    let order = model.operator().order();
    let values: Vec<Vec<f64>> = points
        .par_iter()
        .map(|k| {
            let a = model.fiber(k);
            let a0 = model.effective(k);
            queries
                .iter()
                .map(|q| smoothed_error(&a, &a0, &model.smoothing(k, q.eps, q.s), q.tau, q.eps, order))
                .collect()
        })
        .collect();
    (0..queries.len())
        .map(|qi| {
            let mut best = SupError { value: f64::NEG_INFINITY, index: 0, k: Vec::new() };
            for (pi, row) in values.iter().enumerate() {
                if row[qi] > best.value {
                    best.value = row[qi];
                    best.index = pi;
                }
            }
            if !points.is_empty() {
                best.k = points[best.index].clone();
            } else {
                best.value = 0.0;
            }
            best
        })
        .collect()
}
