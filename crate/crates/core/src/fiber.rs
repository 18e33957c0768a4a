//! Bloch fiber operators, their exponentials and the smoothed error norm.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::cell::EffectiveData;
use crate::error::{Error, Result};
use crate::lattice::FrequencySet;
use crate::linalg::{hermitian_eigen, hermitian_part, spectral_function, spectral_norm, CMat};
use crate::operator::PeriodicOperator;
use crate::threshold::ThresholdWindow;

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Spectrum {
    /// `V diag(exp(-i time lambda)) V*`.
    pub fn exponential(&self, time: f64) -> CMat {
        spectral_function(&self.values, &self.vectors, |l| Complex64::from_polar(1.0, -time * l))
    }
}

/// Everything needed to assemble fibers of one operator on one plane-wave set.
#[derive(Debug, Clone)]
pub struct FiberModel {
    op: PeriodicOperator,
    freq: FrequencySet,
    couplings: Vec<(usize, usize, CMat)>,
    g0: CMat,
}

impl FiberModel {
    pub fn new(op: &PeriodicOperator, freq: &FrequencySet, eff: &EffectiveData) -> Self {
        FiberModel { op: op.clone(), freq: freq.clone(), couplings: op.couplings(freq), g0: eff.g0().clone() }
    }

    pub fn operator(&self) -> &PeriodicOperator {
        &self.op
    }

    pub fn frequencies(&self) -> &FrequencySet {
        &self.freq
    }

    pub fn g0(&self) -> &CMat {
        &self.g0
    }

    /// Matrix size `n * |freq|`.
    pub fn size(&self) -> usize {
        self.op.n() * self.freq.len()
    }

    /// `A(k)`: blocks `b(b + k)* ghat(b - b') b(b' + k)`.
    pub fn fiber(&self, k: &[f64]) -> FiberOperator {
        let n = self.op.n();
        let syms = self.op.shifted_symbols(&self.freq, k);
        let size = self.size();
        let mut mat = CMat::zeros(size, size);
        for (i, j, ghat) in &self.couplings {
            let block = syms[*i].ad_mul(&(ghat * &syms[*j]));
            let mut v = mat.view_mut((i * n, j * n), (n, n));
            v += block;
        }
        FiberOperator { k: k.to_vec(), n, matrix: hermitian_part(&mat), spectrum: OnceLock::new() }
    }

    /// `A0(k)`: diagonal blocks `b(b + k)* g0 b(b + k)`.
    pub fn effective(&self, k: &[f64]) -> EffectiveFiber {
        let blocks: Vec<CMat> = self
            .op
            .shifted_symbols(&self.freq, k)
            .iter()
            .map(|s| hermitian_part(&s.ad_mul(&(&self.g0 * s))))
            .collect();
        let spectra = blocks
            .iter()
            .map(|b| {
                let (values, vectors) = hermitian_eigen(b);
                Spectrum { values, vectors }
            })
            .collect();
        EffectiveFiber { k: k.to_vec(), n: self.op.n(), blocks, spectra }
    }

    /// Diagonal of `R0(k, eps)^{s/2}`, repeated `n` times per frequency.
    pub fn smoothing(&self, k: &[f64], eps: f64, s: f64) -> SmoothingOperator {
        SmoothingOperator::new(&self.freq, self.op.n(), k, eps, s)
    }

    /// `|| (exp(-i tau eps^{-2p} A(k)) - exp(-i tau eps^{-2p} A0(k))) R0(k, eps)^{s/2} ||`.
    pub fn smoothed_error_norm(&self, k: &[f64], tau: f64, eps: f64, s: f64) -> f64 {
        let a = self.fiber(k);
        let a0 = self.effective(k);
        smoothed_error(&a, &a0, &self.smoothing(k, eps, s), tau, eps, self.op.order())
    }
}

/// The error norm for precomputed fibers, with time `tau eps^{-2p}`.
pub fn smoothed_error(
    a: &FiberOperator,
    a0: &EffectiveFiber,
    smoothing: &SmoothingOperator,
    tau: f64,
    eps: f64,
    order: u32,
) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    let time = tau * eps.powi(-2 * order as i32);
    propagator_difference_norm(a, a0, time, &smoothing.diagonal)
}

/// `|| (exp(-i time A) - exp(-i time A0)) W ||` for a diagonal weight `W`.
///
/// Multiplying by the unitary `V*` from the exact spectrum on the left keeps the norm and
/// leaves `diag(phase) V* W - V* E0 W`, which is cheap because `E0` is block diagonal.
pub fn propagator_difference_norm(a: &FiberOperator, a0: &EffectiveFiber, time: f64, weights: &[f64]) -> f64 {
    let spec = a.spectrum();
    let vstar = spec.vectors.adjoint();
    let n = a0.n;
    let mut diff = CMat::zeros(vstar.nrows(), vstar.ncols());
    for (j, s) in a0.spectra.iter().enumerate() {
        let block = vstar.columns(j * n, n) * s.exponential(time);
        diff.columns_mut(j * n, n).copy_from(&block);
    }
    for (l, &value) in spec.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -time * value);
        for c in 0..diff.ncols() {
            diff[(l, c)] = phase * vstar[(l, c)] - diff[(l, c)];
        }
    }
    for (j, mut col) in diff.column_iter_mut().enumerate() {
        col *= Complex64::from(weights[j]);
    }
    spectral_norm(&diff)
}

/// Truncated Galerkin matrix of `A(k)` with a lazily computed spectrum.
#[derive(Debug)]
pub struct FiberOperator {
    k: Vec<f64>,
    n: usize,
    matrix: CMat,
    spectrum: OnceLock<Spectrum>,
}

impl FiberOperator {
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Eigendecomposition, with the lowest `n` pairs refined by a Rayleigh-Ritz step.
    ///
    /// The dense solver only resolves eigenvalues to about `1e-16 ||A||`, which makes
    /// long-time phases of the small eigenvalues meaningless. Projecting `A` onto the
    /// computed low eigenvectors recovers them to working relative precision.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let (mut values, mut vectors) = hermitian_eigen(&self.matrix);
            let n = self.n.min(values.len());
            if n > 0 {
                let phi = vectors.columns(0, n).into_owned();
                let h = phi.ad_mul(&(&self.matrix * &phi));
                let (mu, y) = hermitian_eigen(&h);
                let rotated = phi * y;
                vectors.columns_mut(0, n).copy_from(&rotated);
                values[..n].copy_from_slice(&mu);
            }
            Spectrum { values, vectors }
        })
    }

    pub fn exponential(&self, time: f64) -> CMat {
        self.spectrum().exponential(time)
    }

    /// Checks the gap structure at `k = 0`: `n` eigenvalues below `delta` and the next
    /// one at least `0.9` of the lower bound for the gap.
    pub fn verify_threshold_structure(&self, window: &ThresholdWindow) -> Result<()> {
        let v = &self.spectrum().values;
        let below = v.iter().filter(|&&l| l <= window.delta).count();
        if below != self.n {
            return Err(Error::TruncationTooSmall(format!(
                "{below} eigenvalues below delta = {:e}, expected {}",
                window.delta, self.n
            )));
        }
        if let Some(&next) = v.get(self.n) {
            if next < 0.9 * window.gap_lower_bound {
                return Err(Error::TruncationTooSmall(format!(
                    "spectral gap {next:e} below 0.9 x {:e}",
                    window.gap_lower_bound
                )));
            }
        }
        Ok(())
    }
}

/// Block-diagonal Galerkin matrix of `A0(k)`, diagonalized block by block.
#[derive(Debug, Clone)]
pub struct EffectiveFiber {
    k: Vec<f64>,
    n: usize,
    blocks: Vec<CMat>,
    spectra: Vec<Spectrum>,
}

impl EffectiveFiber {
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// `n x n` block per frequency.
    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// The full block-diagonal matrix.
    pub fn matrix(&self) -> CMat {
        let size = self.n * self.blocks.len();
        let mut m = CMat::zeros(size, size);
        for (i, b) in self.blocks.iter().enumerate() {
            m.view_mut((i * self.n, i * self.n), (self.n, self.n)).copy_from(b);
        }
        m
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.spectra.iter().flat_map(|s| s.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn exponential(&self, time: f64) -> CMat {
        let size = self.n * self.blocks.len();
        let mut m = CMat::zeros(size, size);
        for (i, s) in self.spectra.iter().enumerate() {
            m.view_mut((i * self.n, i * self.n), (self.n, self.n)).copy_from(&s.exponential(time));
        }
        m
    }
}

/// Diagonal of `R0(k, eps)^{s/2} = (eps^2 / (|b + k|^2 + eps^2))^{s/2}`.
#[derive(Debug, Clone)]
pub struct SmoothingOperator {
    pub diagonal: Vec<f64>,
}

impl SmoothingOperator {
    pub fn new(freq: &FrequencySet, n: usize, k: &[f64], eps: f64, s: f64) -> Self {
        let e2 = eps * eps;
        let diagonal = freq
            .vectors()
            .iter()
            .flat_map(|b| {
                let q: f64 = b.iter().zip(k).map(|(x, y)| (x + y).powi(2)).sum();
                std::iter::repeat_n((e2 / (q + e2)).powf(0.5 * s), n)
            })
            .collect();
        SmoothingOperator { diagonal }
    }
}
