//! Log-log slope fits for convergence ladders.

/// Result of a least-squares fit of `log y = slope * log x + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
    /// All values were below the exactness floor; no fit was attempted.
    pub exact: bool,
}

/// Fits the slope over the last `tail` points (all points when `tail` is 0 or too large).
///
/// Values at or below `floor` are treated as exact zeros and dropped. When every value
/// is dropped the fit is skipped and flagged `exact`. Returns `None` when fewer than two
/// usable points remain otherwise.
pub fn loglog_slope(x: &[f64], y: &[f64], tail: usize, floor: f64) -> Option<SlopeFit> {
    assert_eq!(x.len(), y.len());
    let start = if tail == 0 || tail >= x.len() { 0 } else { x.len() - tail };
    let (xs, ys) = (&x[start..], &y[start..]);
    if ys.iter().all(|v| v.abs() <= floor) {
        return Some(SlopeFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            residual: 0.0,
            points: ys.len(),
            exact: true,
        });
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(a, b)| **a > 0.0 && **b > floor)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Some(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: pts.len(),
        exact: false,
    })
}
