//! Periodic Hermitian matrix coefficients given as finite Fourier series.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{dot, hermitian_eigen, hermitian_eigenvalues, hermitian_part, norm, CMat};

/// Sampled positivity bounds of `g(x)` over a uniform cell grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityCertificate {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub resolution: usize,
}

impl PositivityCertificate {
    /// Grid estimate of `||g||_inf`.
    pub fn norm_g(&self) -> f64 {
        self.max_eigenvalue
    }

    /// Grid estimate of `||g^{-1}||_inf`.
    pub fn norm_g_inv(&self) -> f64 {
        1.0 / self.min_eigenvalue
    }
}

/// `g(x) = sum_c ghat(c) e^{i <c, x>}` over finitely many dual vectors `c`.
#[derive(Debug, Clone)]
pub struct PeriodicCoefficient {
    lattice: Lattice,
    size: usize,
    terms: Vec<(Vec<i64>, CMat)>,
    certificate: PositivityCertificate,
}

/// Validation grid used at construction.
pub fn default_validation_resolution(dim: usize) -> usize {
    match dim {
        1 => 256,
        2 => 64,
        _ => 24,
    }
}

impl PeriodicCoefficient {
    /// Builds `g` from Fourier terms keyed by integer dual coordinates.
    ///
    /// Every term must come with its partner `ghat(-c) = ghat(c)*`. Positivity is
    /// checked on the default validation grid.
    pub fn new(lattice: Lattice, size: usize, mut terms: Vec<(Vec<i64>, CMat)>) -> Result<Self> {
        let d = lattice.dim();
        if size == 0 {
            return Err(Error::InvalidCoefficient("matrix size must be positive".into()));
        }
        for (c, m) in &terms {
            if c.len() != d {
                return Err(Error::Dimension(format!("frequency {c:?} has wrong length")));
            }
            if m.shape() != (size, size) {
                return Err(Error::Dimension(format!("coefficient term at {c:?} has shape {:?}", m.shape())));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidCoefficient(format!("non-finite entry at {c:?}")));
            }
        }
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidCoefficient("duplicate frequency".into()));
        }
        let scale = terms.iter().map(|(_, m)| m.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for (c, m) in &terms {
            let neg: Vec<i64> = c.iter().map(|x| -x).collect();
            let partner = terms
                .binary_search_by(|t| t.0.cmp(&neg))
                .map_err(|_| Error::InvalidCoefficient(format!("frequency {c:?} has no partner {neg:?}")))?;
            if (&terms[partner].1 - m.adjoint()).norm() > 1e-14 * scale {
                return Err(Error::InvalidCoefficient(format!("ghat({neg:?}) differs from ghat({c:?})*")));
            }
        }
        let mut g = PeriodicCoefficient {
            lattice,
            size,
            terms,
            certificate: PositivityCertificate { min_eigenvalue: 0.0, max_eigenvalue: 0.0, resolution: 0 },
        };
        g.certificate = g.validate(default_validation_resolution(d))?;
        Ok(g)
    }

    /// The constant coefficient `g = value`.
    pub fn constant(lattice: Lattice, value: CMat) -> Result<Self> {
        let d = lattice.dim();
        Self::new(lattice, value.nrows(), vec![(vec![0; d], value)])
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `m`, the matrix size.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn terms(&self) -> &[(Vec<i64>, CMat)] {
        &self.terms
    }

    pub fn certificate(&self) -> &PositivityCertificate {
        &self.certificate
    }

    /// `ghat(c)`, zero when `c` is not a stored frequency.
    pub fn fourier(&self, coords: &[i64]) -> CMat {
        match self.terms.binary_search_by(|t| t.0.as_slice().cmp(coords)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => CMat::zeros(self.size, self.size),
        }
    }

    /// The Voigt mean `ghat(0)`.
    pub fn mean(&self) -> CMat {
        hermitian_part(&self.fourier(&vec![0; self.lattice.dim()]))
    }

    /// Largest `|c|` among stored frequencies with nonzero coefficient.
    pub fn max_frequency_norm(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(_, m)| m.norm() > 0.0)
            .map(|(c, _)| norm(&self.lattice.dual_vector(c)))
            .fold(0.0, f64::max)
    }

    /// Largest absolute integer coordinate among nonzero terms.
    pub fn max_coordinate(&self) -> i64 {
        self.terms
            .iter()
            .filter(|(_, m)| m.norm() > 0.0)
            .flat_map(|(c, _)| c.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Whether only the zero frequency carries a nonzero term.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(c, m)| c.iter().all(|&x| x == 0) || m.norm() == 0.0)
    }

    /// Whether `g(x)` has real entries, i.e. `ghat(-c)` is the entrywise conjugate of `ghat(c)`.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(c, m)| {
            let neg: Vec<i64> = c.iter().map(|x| -x).collect();
            (self.fourier(&neg) - m.map(|z| z.conj())).norm() <= 1e-14 * m.norm().max(1.0)
        })
    }

    /// `g(x)`, hermitized.
    pub fn eval(&self, x: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.size, self.size);
        for (c, m) in &self.terms {
            let phase = dot(&self.lattice.dual_vector(c), x);
            out += m * Complex64::from_polar(1.0, phase);
        }
        hermitian_part(&out)
    }

    fn cell_grid(&self, resolution: usize) -> Vec<Vec<f64>> {
        let d = self.lattice.dim();
        let total = resolution.pow(d as u32);
        (0..total)
            .map(|flat| {
                let mut rem = flat;
                let mut frac = vec![0.0; d];
                for f in frac.iter_mut().rev() {
                    *f = (rem % resolution) as f64 / resolution as f64;
                    rem /= resolution;
                }
                self.lattice.primal_vector(&frac)
            })
            .collect()
    }

    /// Checks positivity of `g(x)` on the grid `x = sum (j_i / res) a_i`.
    pub fn validate(&self, resolution: usize) -> Result<PositivityCertificate> {
        if resolution < 8 {
            return Err(Error::InvalidArgument("validation grid needs at least 8 points per dimension".into()));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut at = Vec::new();
        for x in self.cell_grid(resolution) {
            let ev = hermitian_eigenvalues(&self.eval(&x));
            if ev[0] < lo {
                lo = ev[0];
                at = x.clone();
            }
            hi = hi.max(ev[ev.len() - 1]);
        }
        if !(lo > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: lo, at });
        }
        Ok(PositivityCertificate { min_eigenvalue: lo, max_eigenvalue: hi, resolution })
    }

    /// Reuss mean `(mean of g^{-1})^{-1}` by grid quadrature with `resolution` points per dimension.
    pub fn harmonic_mean(&self, resolution: usize) -> Result<CMat> {
        if resolution < 8 {
            return Err(Error::InvalidArgument("quadrature grid needs at least 8 points per dimension".into()));
        }
        let pts = self.cell_grid(resolution);
        let count = pts.len() as f64;
        let mut acc = CMat::zeros(self.size, self.size);
        for x in pts {
            let (vals, vecs) = hermitian_eigen(&self.eval(&x));
            if !(vals[0] > 0.0) {
                return Err(Error::NotPositiveDefinite { min_eigenvalue: vals[0], at: x });
            }
            acc += crate::linalg::spectral_function(&vals, &vecs, |l| Complex64::from(1.0 / l));
        }
        acc /= Complex64::from(count);
        let (vals, vecs) = hermitian_eigen(&acc);
        Ok(hermitian_part(&crate::linalg::spectral_function(&vals, &vecs, |l| Complex64::from(1.0 / l))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(c: f64) -> CMat {
        CMat::from_element(1, 1, Complex64::new(c, 0.0))
    }

    fn cosine(a: f64) -> Result<PeriodicCoefficient> {
        let lat = Lattice::cubic(1).unwrap();
        PeriodicCoefficient::new(lat, 1, vec![(vec![-1], scalar(a / 2.0)), (vec![0], scalar(1.0)), (vec![1], scalar(a / 2.0))])
    }

    #[test]
    fn cosine_values() {
        let g = cosine(0.5).unwrap();
        assert!((g.eval(&[0.0])[(0, 0)].re - 1.5).abs() < 1e-14);
        assert!((g.eval(&[0.5])[(0, 0)].re - 0.5).abs() < 1e-14);
        let c = g.validate(8).unwrap();
        assert!((c.min_eigenvalue - 0.5).abs() < 1e-14);
        assert!((c.max_eigenvalue - 1.5).abs() < 1e-14);
        assert!(g.is_real());
    }

    #[test]
    fn not_positive() {
        assert!(matches!(cosine(1.5), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn complex_terms_real_function() {
        let lat = Lattice::cubic(1).unwrap();
        let z = Complex64::new(0.25, -0.1);
        let g = PeriodicCoefficient::new(
            lat,
            1,
            vec![
                (vec![1], CMat::from_element(1, 1, z)),
                (vec![-1], CMat::from_element(1, 1, z.conj())),
                (vec![0], scalar(1.0)),
            ],
        )
        .unwrap();
        assert!((g.eval(&[0.25])[(0, 0)].re - 1.2).abs() < 1e-14);
    }

    #[test]
    fn missing_partner() {
        let lat = Lattice::cubic(1).unwrap();
        let r = PeriodicCoefficient::new(lat, 1, vec![(vec![0], scalar(1.0)), (vec![1], scalar(0.1))]);
        assert!(matches!(r, Err(Error::InvalidCoefficient(_))));
    }

    #[test]
    fn harmonic_mean_of_cosine() {
        let g = cosine(0.5).unwrap();
        let h = g.harmonic_mean(64).unwrap();
        assert!((h[(0, 0)].re - 0.75f64.sqrt()).abs() < 1e-12);
    }
}
