use crate::coefficient::PeriodicCoefficient;
use crate::error::{Error, Result};
use crate::lattice::{FrequencySet, Lattice};
use crate::linalg::CMat;
use crate::symbol::SymbolB;

/// The operator `b(D)* g(x) b(D)` described by a symbol and a periodic coefficient.
#[derive(Debug, Clone)]
pub struct PeriodicOperator {
    symbol: SymbolB,
    coefficient: PeriodicCoefficient,
}

impl PeriodicOperator {
    pub fn new(symbol: SymbolB, coefficient: PeriodicCoefficient) -> Result<Self> {
        if symbol.dim() != coefficient.lattice().dim() {
            return Err(Error::Dimension(format!(
                "symbol is {}-dimensional but the lattice is {}-dimensional",
                symbol.dim(),
                coefficient.lattice().dim()
            )));
        }
        if symbol.rows() != coefficient.size() {
            return Err(Error::Dimension(format!(
                "symbol has {} rows but g is {}x{}",
                symbol.rows(),
                coefficient.size(),
                coefficient.size()
            )));
        }
        Ok(PeriodicOperator { symbol, coefficient })
    }

    pub fn symbol(&self) -> &SymbolB {
        &self.symbol
    }

    pub fn coefficient(&self) -> &PeriodicCoefficient {
        &self.coefficient
    }

    pub fn lattice(&self) -> &Lattice {
        self.coefficient.lattice()
    }

    pub fn dim(&self) -> usize {
        self.symbol.dim()
    }

    /// The order `p` of the symbol; the operator has order `2p`.
    pub fn order(&self) -> u32 {
        self.symbol.order()
    }

    pub fn n(&self) -> usize {
        self.symbol.cols()
    }

    pub fn m(&self) -> usize {
        self.symbol.rows()
    }

    /// Nonzero Fourier couplings `(i, j, ghat(b_i - b_j))` inside a frequency set.
    pub fn couplings(&self, freq: &FrequencySet) -> Vec<(usize, usize, CMat)> {
        let mut out = Vec::new();
        for (i, ci) in freq.coords().iter().enumerate() {
            for (c, ghat) in self.coefficient.terms() {
                if ghat.norm() == 0.0 {
                    continue;
                }
                // b_i - b_j = c  =>  b_j = b_i - c
                let cj: Vec<i64> = ci.iter().zip(c).map(|(a, b)| a - b).collect();
                if let Some(j) = freq.position(&cj) {
                    out.push((i, j, ghat.clone()));
                }
            }
        }
        out
    }

    /// `b(b + k)` for every frequency `b` in the set.
    pub fn shifted_symbols(&self, freq: &FrequencySet, k: &[f64]) -> Vec<CMat> {
        freq.vectors()
            .iter()
            .map(|b| {
                let xi: Vec<f64> = b.iter().zip(k).map(|(x, y)| x + y).collect();
                self.symbol.eval(&xi)
            })
            .collect()
    }

    /// Whether `n = 1` and both `g` and the symbol coefficients are real.
    pub fn is_real_scalar(&self) -> bool {
        self.n() == 1 && self.symbol.is_real() && self.coefficient.is_real()
    }
}
