//! TOML experiment configuration and construction of the operator it describes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use homspec_core::{CMat, Lattice, MultiIndex, PeriodicCoefficient, PeriodicOperator, SymbolB};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};

/// A complex number written as `[re, im]`.
pub type ComplexEntry = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads when `--threads` is not given; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
    /// Fill in `wall_ms`; off by default so that output files are reproducible.
    #[serde(default)]
    pub record_timing: bool,
    pub lattice: LatticeSpec,
    pub symbol: SymbolSpec,
    pub coefficient: CoefficientSpec,
    pub truncation: TruncationSpec,
    #[serde(default)]
    pub brillouin: BrillouinSpec,
    #[serde(default)]
    pub ladder: LadderSpec,
    #[serde(default)]
    pub rates: RatesSpec,
    #[serde(default)]
    pub interp: InterpSpec,
    #[serde(default)]
    pub germ: GermSpec,
    #[serde(default)]
    pub threshold: ThresholdSpec,
    pub evolve: Option<EvolveSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// Primal basis vectors as rows.
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub order: u32,
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub terms: Vec<SymbolTerm>,
    /// Draw every coefficient matrix of order `p` from the config seed instead.
    #[serde(default)]
    pub random: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolTerm {
    /// Multi-index of the monomial `xi^index`.
    pub index: Vec<u32>,
    /// Row-major entries of the `rows x cols` matrix.
    pub entries: Vec<ComplexEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub size: usize,
    #[serde(default)]
    pub terms: Vec<CoefficientTerm>,
    /// Add `g^(-c) = g^(c)*` for every listed `c` whose partner is missing.
    #[serde(default)]
    pub complete_conjugates: bool,
    pub random: Option<RandomCoefficient>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientTerm {
    /// Integer coordinates of the dual-lattice frequency.
    pub coords: Vec<i64>,
    /// Row-major entries of the `size x size` matrix.
    pub entries: Vec<ComplexEntry>,
}

/// `g^(0) = I` plus random modes with `|c_i| <= max_coordinate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCoefficient {
    #[serde(default = "one_i64")]
    pub max_coordinate: i64,
    /// Bound on `sum_c ||g^(c)||` over all nonzero modes; below 1 keeps `g` positive.
    pub amplitude: f64,
    /// Use real symmetric matrices with even modes, so `g` is real.
    #[serde(default)]
    pub real: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffUnit {
    /// Radii are multiples of `2 pi`.
    #[serde(rename = "2pi")]
    TwoPi,
    Absolute,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    /// Cutoff radius of the cell problem.
    pub cell: f64,
    /// Cutoff radius of the fibers; defaults to `cell`.
    pub fiber: Option<f64>,
    #[serde(default = "two_pi_unit")]
    pub unit: CutoffUnit,
}

impl TruncationSpec {
    fn scale(&self) -> f64 {
        match self.unit {
            CutoffUnit::TwoPi => 2.0 * PI,
            CutoffUnit::Absolute => 1.0,
        }
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell * self.scale()
    }

    pub fn fiber_radius(&self) -> f64 {
        self.fiber.unwrap_or(self.cell) * self.scale()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrillouinSpec {
    /// Points per dual basis direction of the uniform sup grid.
    pub resolution: usize,
    /// Radial rungs of the refinement toward `k = 0`.
    pub radial: usize,
    /// Directions of the refinement (ignored for `d = 1`).
    pub angular: usize,
}

impl Default for BrillouinSpec {
    fn default() -> Self {
        BrillouinSpec { resolution: 64, radial: 100, angular: 16 }
    }
}

/// Geometric ladder `start, start * ratio, ...`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderSpec {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec { start: 0.2, ratio: 0.5, count: 6 }
    }
}

impl LadderSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.start * self.ratio.powi(j as i32)).collect()
    }

    fn check(&self, what: &str) -> Result<()> {
        if self.count < 1 || !(self.start > 0.0) || !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(ExperimentError::ConfigInvalid(format!(
                "{what}: need count >= 1, start > 0 and 0 < ratio < 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesSpec {
    pub taus: Vec<f64>,
    /// Sobolev exponents; empty means `2p + 1` and `2p + 2`.
    #[serde(default)]
    pub s: Vec<f64>,
    /// Rungs used by the slope fits.
    pub tail: usize,
}

impl Default for RatesSpec {
    fn default() -> Self {
        RatesSpec { taus: vec![1.0, 8.0], s: Vec::new(), tail: 5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpSpec {
    /// Exponents `s`; empty means `0, 1, ..., 2p + 2`.
    #[serde(default)]
    pub s: Vec<f64>,
    pub tau: f64,
}

impl Default for InterpSpec {
    fn default() -> Self {
        InterpSpec { s: Vec::new(), tau: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GermSpec {
    pub directions: usize,
}

impl Default for GermSpec {
    fn default() -> Self {
        GermSpec { directions: 64 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSpec {
    pub directions: usize,
    pub ratio: f64,
    pub rungs: usize,
    pub tail: usize,
    /// Factor depending on `d` and `p` in the window constant.
    pub window_factor: f64,
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec { directions: 8, ratio: 0.5, rungs: 6, tail: 4, window_factor: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSpec {
    pub taus: Vec<f64>,
    pub ladder: LadderSpec,
    pub band_limit: f64,
    pub xi_step: f64,
    pub time_steps: usize,
    /// Sobolev exponent of the data norm in the bound.
    pub sobolev: f64,
    pub initial: DataSpec,
    pub source: Option<SourceSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSpec {
    /// `exp(-sigma^2 |xi|^2 / 2) v`.
    Gaussian { sigma: f64, direction: Vec<ComplexEntry> },
    /// `(1 + |xi|^2)^{-power/2} v`.
    Power { power: f64, direction: Vec<ComplexEntry> },
}

impl DataSpec {
    pub fn direction(&self) -> Vec<Complex64> {
        let d = match self {
            DataSpec::Gaussian { direction, .. } | DataSpec::Power { direction, .. } => direction,
        };
        d.iter().map(|e| Complex64::new(e[0], e[1])).collect()
    }

    /// An integrable spectral density: Gaussian data is smooth, power data is rough.
    pub fn is_smooth(&self) -> bool {
        matches!(self, DataSpec::Gaussian { .. })
    }
}

/// Separable source `exp(-i omega t) chi(x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub omega: f64,
    pub profile: DataSpec,
}

fn one_i64() -> i64 {
    1
}

fn two_pi_unit() -> CutoffUnit {
    CutoffUnit::TwoPi
}

fn matrix(rows: usize, cols: usize, entries: &[ComplexEntry], what: &str) -> Result<CMat> {
    if entries.len() != rows * cols {
        return Err(ExperimentError::ConfigInvalid(format!(
            "{what}: expected {} entries, found {}",
            rows * cols,
            entries.len()
        )));
    }
    let values: Vec<Complex64> = entries.iter().map(|e| Complex64::new(e[0], e[1])).collect();
    Ok(CMat::from_row_slice(rows, cols, &values))
}

fn multi_indices(dim: usize, order: u32) -> Vec<Vec<u32>> {
    if dim == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(dim - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, real: bool) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
        Complex64::new(rng.random_range(-1.0..1.0), im)
    })
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.lattice.basis.len()
    }

    fn check(&self) -> Result<()> {
        let invalid = |m: String| Err(ExperimentError::ConfigInvalid(m));
        let d = self.dim();
        if !(1..=3).contains(&d) || self.lattice.basis.iter().any(|r| r.len() != d) {
            return invalid(format!("lattice basis must be d x d with 1 <= d <= 3, got {d} rows"));
        }
        if self.id.is_empty() || self.id.contains(['/', '\\', ',']) {
            return invalid(format!("config id {:?} must be nonempty without '/', '\\\\' or ','", self.id));
        }
        if !(self.truncation.cell >= 0.0) || self.truncation.fiber.is_some_and(|f| !(f >= 0.0)) {
            return invalid("truncation radii must be nonnegative".into());
        }
        let b = &self.brillouin;
        if b.resolution < 1 || b.angular < 1 {
            return invalid("brillouin resolution and angular count must be >= 1".into());
        }
        self.ladder.check("ladder")?;
        if self.rates.taus.is_empty() || self.rates.taus.iter().any(|t| !t.is_finite()) {
            return invalid("rates.taus must be nonempty and finite".into());
        }
        if self.rates.tail < 2 {
            return invalid("rates.tail must be >= 2".into());
        }
        if !self.interp.tau.is_finite() || self.interp.s.iter().chain(&self.rates.s).any(|s| !(*s >= 0.0)) {
            return invalid("s exponents must be nonnegative and tau finite".into());
        }
        if self.germ.directions < 1 {
            return invalid("germ.directions must be >= 1".into());
        }
        let t = &self.threshold;
        if t.directions < 1 || t.rungs < 2 || t.tail < 2 || !(t.ratio > 0.0 && t.ratio < 1.0) {
            return invalid("threshold needs directions >= 1, rungs >= 2, tail >= 2, 0 < ratio < 1".into());
        }
        if let Some(e) = &self.evolve {
            e.ladder.check("evolve.ladder")?;
            if e.taus.is_empty() || e.taus.iter().any(|t| !t.is_finite()) {
                return invalid("evolve.taus must be nonempty and finite".into());
            }
            if e.time_steps < 1 || !(e.xi_step > 0.0) || !(e.band_limit > 0.0) || !(e.sobolev >= 0.0) {
                return invalid("evolve needs time_steps >= 1, xi_step > 0, band_limit > 0, sobolev >= 0".into());
            }
            let n = self.symbol.cols;
            if e.initial.direction().len() != n || e.source.as_ref().is_some_and(|s| s.profile.direction().len() != n) {
                return invalid(format!("evolve data directions must have {n} entries"));
            }
        }
        if self.symbol.random == !self.symbol.terms.is_empty() {
            return invalid("symbol needs either terms or random = true".into());
        }
        if self.coefficient.random.is_some() == !self.coefficient.terms.is_empty() {
            return invalid("coefficient needs either terms or a random table".into());
        }
        Ok(())
    }

    pub fn build_lattice(&self) -> Result<Lattice> {
        Ok(Lattice::new(self.lattice.basis.clone())?)
    }

    pub fn build_symbol(&self, rng: &mut ChaCha8Rng) -> Result<SymbolB> {
        let s = &self.symbol;
        let d = self.dim();
        let terms = if s.random {
            multi_indices(d, s.order)
                .into_iter()
                .map(|e| (MultiIndex::new(e), random_matrix(rng, s.rows, s.cols, false)))
                .collect()
        } else {
            let mut out = Vec::with_capacity(s.terms.len());
            for t in &s.terms {
                out.push((MultiIndex::new(t.index.clone()), matrix(s.rows, s.cols, &t.entries, "symbol term")?));
            }
            out
        };
        Ok(SymbolB::new(d, s.order, s.rows, s.cols, terms)?)
    }

    pub fn build_coefficient(&self, lattice: Lattice, rng: &mut ChaCha8Rng) -> Result<PeriodicCoefficient> {
        let c = &self.coefficient;
        let m = c.size;
        let mut terms: BTreeMap<Vec<i64>, CMat> = BTreeMap::new();
        if let Some(r) = &c.random {
            if !(r.amplitude >= 0.0) || r.max_coordinate < 1 {
                return Err(ExperimentError::ConfigInvalid("random coefficient needs amplitude >= 0, max_coordinate >= 1".into()));
            }
            let d = lattice.dim();
            let span = 2 * r.max_coordinate + 1;
            // one representative of each pair {c, -c}: first nonzero coordinate positive
            let modes: Vec<Vec<i64>> = (0..span.pow(d as u32))
                .map(|mut idx| {
                    (0..d)
                        .map(|_| {
                            let v = idx % span - r.max_coordinate;
                            idx /= span;
                            v
                        })
                        .collect::<Vec<i64>>()
                })
                .filter(|v| v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0))
                .collect();
            let per_mode = r.amplitude / (2 * modes.len().max(1)) as f64;
            terms.insert(vec![0; d], CMat::identity(m, m));
            for mode in modes {
                let mut a = random_matrix(rng, m, m, r.real);
                if r.real {
                    a = (&a + a.transpose()).scale(0.5);
                }
                let norm = a.norm();
                if norm > 0.0 {
                    a = a.scale(per_mode / norm);
                }
                let neg: Vec<i64> = mode.iter().map(|x| -x).collect();
                terms.insert(neg, a.adjoint());
                terms.insert(mode, a);
            }
        } else {
            for t in &c.terms {
                let value = matrix(m, m, &t.entries, "coefficient term")?;
                if terms.insert(t.coords.clone(), value).is_some() {
                    return Err(ExperimentError::ConfigInvalid(format!("duplicate coefficient frequency {:?}", t.coords)));
                }
            }
            if c.complete_conjugates {
                let missing: Vec<(Vec<i64>, CMat)> = terms
                    .iter()
                    .map(|(k, v)| (k.iter().map(|x| -x).collect::<Vec<i64>>(), v.adjoint()))
                    .filter(|(k, _)| !terms.contains_key(k))
                    .collect();
                terms.extend(missing);
            }
        }
        Ok(PeriodicCoefficient::new(lattice, m, terms.into_iter().collect())?)
    }

    /// Lattice, symbol and coefficient, with random parts drawn from `seed`.
    pub fn build_operator(&self) -> Result<PeriodicOperator> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let lattice = self.build_lattice()?;
        let symbol = self.build_symbol(&mut rng)?;
        let coefficient = self.build_coefficient(lattice, &mut rng)?;
        Ok(PeriodicOperator::new(symbol, coefficient)?)
    }

    /// Sobolev exponents of the rate experiment.
    pub fn rate_exponents(&self) -> Vec<f64> {
        if self.rates.s.is_empty() {
            let p = f64::from(self.symbol.order);
            vec![2.0 * p + 1.0, 2.0 * p + 2.0]
        } else {
            self.rates.s.clone()
        }
    }

    pub fn interp_exponents(&self) -> Vec<f64> {
        if self.interp.s.is_empty() {
            (0..=2 * self.symbol.order + 2).map(f64::from).collect()
        } else {
            self.interp.s.clone()
        }
    }
}
