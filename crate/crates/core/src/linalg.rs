//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Frobenius norm of `M - M*`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// Ascending eigenvalues and matching orthonormal eigenvectors of a Hermitian matrix.
///
/// The input is hermitized first, so tiny asymmetries from roundoff are harmless.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// `V diag(f(λ)) V*` for Hermitian data given as eigenpairs.
pub fn spectral_function(values: &[f64], vectors: &CMat, f: impl Fn(f64) -> Complex64) -> CMat {
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= f(values[j]);
    }
    scaled * vectors.adjoint()
}

/// Largest singular value by power iteration on `M* M`.
///
/// Iterates until the Rayleigh quotient changes by less than `1e-10` relative, or
/// `10 * size` steps. The start vector is fixed, so results are deterministic.
pub fn spectral_norm(m: &CMat) -> f64 {
    let cols = m.ncols();
    if cols == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let fro = m.norm();
    if fro == 0.0 {
        return 0.0;
    }
    // A start vector with no special alignment to the standard basis.
    let mut v = CVec::from_fn(cols, |i, _| {
        let t = i as f64 + 1.0;
        Complex64::new(1.0 + 0.5 * (0.7 * t).sin(), 0.3 * (1.3 * t).cos())
    });
    v /= Complex64::from(v.norm());
    let cap = 10 * m.nrows().max(cols).max(10);
    let mut sigma2 = 0.0_f64;
    for _ in 0..cap {
        let w = m * &v;
        let u = m.ad_mul(&w);
        let next = w.norm_squared();
        let un = u.norm();
        if un == 0.0 {
            return next.sqrt();
        }
        v = u / Complex64::from(un);
        if (next - sigma2).abs() <= 1e-10 * next {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    sigma2.sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
