//! Homogeneous matrix symbols `b(xi) = sum_{|beta| = p} b_beta xi^beta`.

use crate::error::{Error, Result};
use crate::lattice::unit_directions;
use crate::linalg::{hermitian_eigenvalues, CMat};

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `C_self^gamma = prod_i binom(self_i, gamma_i)`, zero unless `gamma <= self`.
    pub fn binomial(&self, gamma: &MultiIndex) -> f64 {
        if !gamma.le(self) {
            return 0.0;
        }
        self.0.iter().zip(&gamma.0).map(|(&b, &g)| binom(b, g)).product()
    }

    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product()
    }

    /// All `gamma <= self` with `|self| - |gamma| = drop`.
    pub fn lower_of_order(&self, drop: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.0.len()];
        fn rec(b: &[u32], i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if i == b.len() {
                if left == 0 {
                    out.push(MultiIndex(cur.clone()));
                }
                return;
            }
            for take in 0..=b[i].min(left) {
                cur[i] = b[i] - take;
                rec(b, i + 1, left - take, cur, out);
            }
        }
        if drop <= self.order() {
            rec(&self.0, 0, drop, &mut cur, &mut out);
        }
        out
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// A homogeneous `m x n` matrix symbol of order `p` in `d` variables.
#[derive(Debug, Clone)]
pub struct SymbolB {
    dim: usize,
    order: u32,
    rows: usize,
    cols: usize,
    terms: Vec<(MultiIndex, CMat)>,
    alpha0: f64,
    alpha1: f64,
}

/// Default number of directions sampled for the ellipticity constants.
pub fn default_direction_samples(dim: usize) -> usize {
    match dim {
        1 => 16,
        2 => 720,
        _ => 2048,
    }
}

impl SymbolB {
    /// Validates the terms and certifies `alpha0 I <= b(theta)* b(theta) <= alpha1 I`.
    pub fn new(dim: usize, order: u32, rows: usize, cols: usize, terms: Vec<(MultiIndex, CMat)>) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidSymbol(format!("order {order} must be at least 2")));
        }
        if cols == 0 || rows < cols {
            return Err(Error::InvalidSymbol(format!("need m >= n >= 1, got m = {rows}, n = {cols}")));
        }
        for (beta, mat) in &terms {
            if beta.dim() != dim {
                return Err(Error::Dimension(format!("multi-index {:?} has wrong length", beta.exponents())));
            }
            if beta.order() != order {
                return Err(Error::InvalidSymbol(format!(
                    "multi-index {:?} has order {} instead of {order}",
                    beta.exponents(),
                    beta.order()
                )));
            }
            if mat.shape() != (rows, cols) {
                return Err(Error::Dimension(format!("symbol coefficient has shape {:?}", mat.shape())));
            }
        }
        let mut sym = SymbolB { dim, order, rows, cols, terms, alpha0: 0.0, alpha1: 0.0 };
        let (a0, a1) = sym.ellipticity_constants(default_direction_samples(dim))?;
        sym.alpha0 = a0;
        sym.alpha1 = a1;
        Ok(sym)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The order `p`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// `m`, the number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `n`, the number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn terms(&self) -> &[(MultiIndex, CMat)] {
        &self.terms
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(_, m)| m.iter().all(|z| z.im == 0.0))
    }

    pub fn eval(&self, xi: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.rows, self.cols);
        for (beta, mat) in &self.terms {
            out += mat.scale(beta.monomial(xi));
        }
        out
    }

    /// Coefficient of `t^j` in `b(xi + t theta)`.
    ///
    /// `j = 0` is `b(xi)`, `j = 1` the first-order directional part and `j = p` is `b(theta)`.
    pub fn expansion_coefficient(&self, theta: &[f64], xi: &[f64], j: u32) -> CMat {
        let mut out = CMat::zeros(self.rows, self.cols);
        if j > self.order {
            return out;
        }
        for (beta, mat) in &self.terms {
            let mut c = 0.0;
            for gamma in beta.lower_of_order(j) {
                let rest: Vec<u32> = beta.exponents().iter().zip(gamma.exponents()).map(|(b, g)| b - g).collect();
                c += beta.binomial(&gamma) * gamma.monomial(xi) * MultiIndex(rest).monomial(theta);
            }
            if c != 0.0 {
                out += mat.scale(c);
            }
        }
        out
    }

    /// Samples `b(theta)* b(theta)` over unit directions and returns `(alpha0, alpha1)`.
    pub fn ellipticity_constants(&self, samples: usize) -> Result<(f64, f64)> {
        if samples < 16 * self.dim {
            return Err(Error::InvalidArgument(format!("need at least {} direction samples", 16 * self.dim)));
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for theta in unit_directions(self.dim, samples) {
            let b = self.eval(&theta);
            let ev = hermitian_eigenvalues(&b.ad_mul(&b));
            lo = lo.min(ev[0]);
            hi = hi.max(ev[ev.len() - 1]);
        }
        if !(hi > 0.0) || lo <= 1e-10 * hi {
            return Err(Error::RankDeficientSymbol { alpha0: lo, alpha1: hi });
        }
        Ok((lo, hi))
    }
}
