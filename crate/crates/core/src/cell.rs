//! Cell problem, effective matrix, germ and first-order correction.

use nalgebra::Cholesky;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::FrequencySet;
use crate::linalg::{hermitian_defect, hermitian_part, min_eigenvalue, norm, spectral_norm, CMat};
use crate::operator::PeriodicOperator;

/// Tolerance on the relative residual of the cell system.
pub const CELL_RESIDUAL_TOL: f64 = 1e-9;

/// Galerkin solution of `b(D)* g (b(D) Lambda + 1_m) = 0` with zero mean.
#[derive(Debug, Clone)]
pub struct CellSolution {
    freq: FrequencySet,
    /// `n x m` Fourier coefficient per frequency; zero at the zero frequency.
    lambda: Vec<CMat>,
    residual: f64,
}

impl CellSolution {
    pub fn frequencies(&self) -> &FrequencySet {
        &self.freq
    }

    pub fn lambda(&self) -> &[CMat] {
        &self.lambda
    }

    /// Relative residual of the Galerkin equations.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Whether every coefficient of `Lambda` vanishes to within `tol`.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.lambda.iter().all(|l| l.norm() <= tol)
    }
}

/// Solves the cell problem on the given plane-wave set.
///
/// The cutoff must exceed twice the largest frequency of `g` so that the couplings
/// feeding `g0` are not clipped.
pub fn solve_cell_problem(op: &PeriodicOperator, freq: &FrequencySet) -> Result<CellSolution> {
    let (n, m) = (op.n(), op.m());
    let g = op.coefficient();
    let kg = g.max_frequency_norm();
    if kg > 0.0 && freq.cutoff() <= 2.0 * kg {
        return Err(Error::TruncationTooSmall(format!(
            "cell cutoff {} must exceed twice the largest coefficient frequency {kg}",
            freq.cutoff()
        )));
    }
    let zero = freq.zero_index();
    let nf = freq.len();
    let mut lambda = vec![CMat::zeros(n, m); nf];
    // unknowns: nonzero frequencies in set order
    let slots: Vec<usize> = (0..nf).filter(|&i| i != zero).collect();
    let mut slot_of = vec![usize::MAX; nf];
    for (s, &i) in slots.iter().enumerate() {
        slot_of[i] = s;
    }
    if slots.is_empty() {
        return Ok(CellSolution { freq: freq.clone(), lambda, residual: 0.0 });
    }
    let syms = op.shifted_symbols(freq, &vec![0.0; op.dim()]);
    let size = n * slots.len();
    let mut mat = CMat::zeros(size, size);
    let mut rhs = CMat::zeros(size, m);
    for (i, j, ghat) in op.couplings(freq) {
        if i == zero {
            continue;
        }
        let r = slot_of[i] * n;
        if j == zero {
            // source: -b(c)* ghat(c)
            let src = -syms[i].ad_mul(&ghat);
            rhs.view_mut((r, 0), (n, m)).copy_from(&src);
        } else {
            let block = syms[i].ad_mul(&(&ghat * &syms[j]));
            let c = slot_of[j] * n;
            let mut v = mat.view_mut((r, c), (n, n));
            v += block;
        }
    }
    let scale = mat.norm().max(f64::MIN_POSITIVE);
    let defect = hermitian_defect(&mat);
    if defect > 1e-12 * scale {
        return Err(Error::SingularCellSystem(format!("Galerkin matrix not Hermitian (defect {defect:e})")));
    }
    let rhs_norm = rhs.norm();
    if rhs_norm == 0.0 {
        return Ok(CellSolution { freq: freq.clone(), lambda, residual: 0.0 });
    }
    let mat = hermitian_part(&mat);
    let chol = Cholesky::new(mat.clone())
        .ok_or_else(|| Error::SingularCellSystem("Cholesky factorization failed on the zero-mean subspace".into()))?;
    let sol = chol.solve(&rhs);
    let residual = (&mat * &sol - &rhs).norm() / rhs_norm;
    if !(residual <= CELL_RESIDUAL_TOL) {
        return Err(Error::SingularCellSystem(format!("relative residual {residual:e} above tolerance")));
    }
    for (s, &i) in slots.iter().enumerate() {
        lambda[i] = sol.view((s * n, 0), (n, m)).into_owned();
    }
    Ok(CellSolution { freq: freq.clone(), lambda, residual })
}

/// Effective matrix together with the Voigt and Reuss bounds.
#[derive(Debug, Clone)]
pub struct EffectiveData {
    /// Fourier coefficients of `g~ = g (b(D) Lambda + 1_m)`, one per frequency.
    tilde: Vec<CMat>,
    g0: CMat,
    voigt: CMat,
    reuss: CMat,
    zero: usize,
}

impl EffectiveData {
    pub fn g0(&self) -> &CMat {
        &self.g0
    }

    /// Arithmetic mean of `g`.
    pub fn voigt(&self) -> &CMat {
        &self.voigt
    }

    /// Harmonic mean of `g`.
    pub fn reuss(&self) -> &CMat {
        &self.reuss
    }

    pub fn tilde(&self) -> &[CMat] {
        &self.tilde
    }

    /// Largest norm of a nonzero-frequency coefficient of `g~`.
    pub fn tilde_oscillation(&self) -> f64 {
        self.tilde
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.zero)
            .map(|(_, t)| t.norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalues of `voigt - g0` and `g0 - reuss`.
    pub fn bracketing_gaps(&self) -> (f64, f64) {
        (min_eigenvalue(&(&self.voigt - &self.g0)), min_eigenvalue(&(&self.g0 - &self.reuss)))
    }
}

/// Grid used for the Reuss mean.
pub fn reuss_resolution(dim: usize) -> usize {
    if dim == 1 {
        256
    } else {
        64
    }
}

/// Forms `g~`, `g0` and the bounds, and checks `reuss <= g0 <= voigt`.
pub fn effective_matrix(op: &PeriodicOperator, cell: &CellSolution) -> Result<EffectiveData> {
    let m = op.m();
    let freq = &cell.freq;
    let syms = op.shifted_symbols(freq, &vec![0.0; op.dim()]);
    let zero = freq.zero_index();
    // W(b) = b(b) Lambda(b) + delta_{b,0} 1_m
    let w: Vec<CMat> = (0..freq.len())
        .map(|i| {
            let mut wi = &syms[i] * &cell.lambda[i];
            if i == zero {
                wi += CMat::identity(m, m);
            }
            wi
        })
        .collect();
    let mut tilde = vec![CMat::zeros(m, m); freq.len()];
    for (i, j, ghat) in op.couplings(freq) {
        tilde[i] += &ghat * &w[j];
    }
    let g0 = hermitian_part(&tilde[zero]);
    let voigt = op.coefficient().mean();
    let reuss = op.coefficient().harmonic_mean(reuss_resolution(op.dim()))?;
    let eff = EffectiveData { tilde, g0, voigt, reuss, zero };
    let (upper_gap, lower_gap) = eff.bracketing_gaps();
    let tol = 1e-9 * spectral_norm(&eff.voigt);
    if upper_gap < -tol || lower_gap < -tol {
        return Err(Error::BracketingViolation { upper_gap, lower_gap });
    }
    Ok(eff)
}

fn check_unit(theta: &[f64]) -> Result<()> {
    let r = norm(theta);
    if (r - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("direction has norm {r}, expected 1")));
    }
    Ok(())
}

/// The germ `S(theta) = b(theta)* g0 b(theta)`.
pub fn germ(op: &PeriodicOperator, eff: &EffectiveData, theta: &[f64]) -> Result<CMat> {
    check_unit(theta)?;
    let b = op.symbol().eval(theta);
    let s = hermitian_part(&b.ad_mul(&(&eff.g0 * &b)));
    let lo = min_eigenvalue(&s);
    if !(lo > 0.0) {
        return Err(Error::DegenerateGerm { min_eigenvalue: lo });
    }
    Ok(s)
}

/// `(g1(theta), G(theta))` with `G = b(theta)* g1 b(theta)`.
///
/// `g1` is the mean of `g~* B1 Lambda + (B1 Lambda)* g~`, where `B1(theta; D)` is the
/// part of `b(D + t theta)` linear in `t`.
pub fn first_order_matrix(
    op: &PeriodicOperator,
    cell: &CellSolution,
    eff: &EffectiveData,
    theta: &[f64],
) -> Result<(CMat, CMat)> {
    check_unit(theta)?;
    let m = op.m();
    let mut g1 = CMat::zeros(m, m);
    for (i, b) in cell.freq.vectors().iter().enumerate() {
        let l = &cell.lambda[i];
        if l.norm() == 0.0 {
            continue;
        }
        let x = op.symbol().expansion_coefficient(theta, b, 1) * l;
        let t = &eff.tilde[i];
        g1 += t.ad_mul(&x) + x.ad_mul(t);
    }
    let g1 = hermitian_part(&g1);
    let bt = op.symbol().eval(theta);
    let big_g = hermitian_part(&bt.ad_mul(&(&g1 * &bt)));
    Ok((g1, big_g))
}

/// Germ and first-order data for one direction.
#[derive(Debug, Clone)]
pub struct DirectionData {
    pub theta: Vec<f64>,
    pub germ: CMat,
    pub g1: CMat,
    pub correction: CMat,
}

impl DirectionData {
    /// `||G(theta)|| / ||S(theta)||`.
    pub fn correction_ratio(&self) -> f64 {
        spectral_norm(&self.correction) / spectral_norm(&self.germ)
    }
}

/// Evaluates [`DirectionData`] for each direction in parallel; output order follows input.
pub fn direction_data(
    op: &PeriodicOperator,
    cell: &CellSolution,
    eff: &EffectiveData,
    thetas: &[Vec<f64>],
) -> Result<Vec<DirectionData>> {
    thetas
        .par_iter()
        .map(|theta| {
            let s = germ(op, eff, theta)?;
            let (g1, big_g) = first_order_matrix(op, cell, eff, theta)?;
            Ok(DirectionData { theta: theta.clone(), germ: s, g1, correction: big_g })
        })
        .collect()
}

/// Structural facts about the effective data that force `G = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialCases {
    /// `b(D)* g_k = 0` for every column `g_k` of `g`.
    pub divergence_free_columns: bool,
    /// `m = n`.
    pub square_symbol: bool,
    /// `g0` equals the Reuss mean.
    pub g0_is_reuss: bool,
    /// `g0` equals the Voigt mean.
    pub g0_is_voigt: bool,
    /// `g~` has only a zero-frequency term.
    pub tilde_constant: bool,
    /// `n = 1` with real `g` and real symbol coefficients.
    pub real_scalar: bool,
    /// `Lambda` vanishes.
    pub lambda_zero: bool,
    /// Relative distances `|g0 - voigt| / |voigt|` and `|g0 - reuss| / |voigt|`.
    pub voigt_distance: f64,
    pub reuss_distance: f64,
    /// The consequences implied by the detected cases all hold.
    pub consistent: bool,
}

impl SpecialCases {
    /// Whether some standing hypothesis forces the first-order correction to vanish.
    pub fn correction_vanishes(&self) -> bool {
        self.divergence_free_columns || self.g0_is_reuss || self.real_scalar
    }
}

/// Detection tolerance for the relative equalities in [`SpecialCases`].
pub const SPECIAL_CASE_TOL: f64 = 1e-8;

pub fn detect_special_cases(op: &PeriodicOperator, cell: &CellSolution, eff: &EffectiveData) -> SpecialCases {
    let tol = SPECIAL_CASE_TOL;
    let g = op.coefficient();
    let scale = spectral_norm(eff.voigt()).max(f64::MIN_POSITIVE);
    let lat = g.lattice();
    let divergence_free_columns = g.terms().iter().all(|(c, ghat)| {
        let v = lat.dual_vector(c);
        op.symbol().eval(&v).ad_mul(ghat).norm() <= tol * scale * norm(&v).powi(op.order() as i32).max(1.0)
    });
    let voigt_distance = spectral_norm(&(eff.g0() - eff.voigt())) / scale;
    let reuss_distance = spectral_norm(&(eff.g0() - eff.reuss())) / scale;
    let g0_is_voigt = voigt_distance <= tol;
    let g0_is_reuss = reuss_distance <= tol;
    let tilde_constant = eff.tilde_oscillation() <= tol * scale;
    let lambda_zero = cell.is_zero(tol);
    let square_symbol = op.m() == op.n();
    let real_scalar = op.is_real_scalar();
    let mut consistent = true;
    if divergence_free_columns {
        consistent &= g0_is_voigt && lambda_zero;
    }
    if square_symbol {
        consistent &= g0_is_reuss;
    }
    if g0_is_reuss {
        consistent &= tilde_constant;
    }
    SpecialCases {
        divergence_free_columns,
        square_symbol,
        g0_is_reuss,
        g0_is_voigt,
        tilde_constant,
        real_scalar,
        lambda_zero,
        voigt_distance,
        reuss_distance,
        consistent,
    }
}

/// Convenience: solve the cell problem and form the effective data in one go.
pub fn homogenize(op: &PeriodicOperator, freq: &FrequencySet) -> Result<(CellSolution, EffectiveData)> {
    let cell = solve_cell_problem(op, freq)?;
    let eff = effective_matrix(op, &cell)?;
    Ok((cell, eff))
}

