//! Primal and dual lattices, Brillouin-zone sampling and plane-wave truncation.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// A lattice in `R^d` together with its dual `{b : <b, a> in 2 pi Z}`.
#[derive(Debug, Clone)]
pub struct Lattice {
    dim: usize,
    primal: Vec<Vec<f64>>,
    dual: Vec<Vec<f64>>,
    cell_volume: f64,
    dual_cell_volume: f64,
    inradius: f64,
    /// Nonzero dual vectors within `2 * sum |b_i|`, used for zone reduction.
    near_duals: Vec<Vec<f64>>,
}

impl Lattice {
    /// Builds a lattice from primal basis vectors given as rows.
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let dim = basis.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(format!("lattice dimension {dim} not in 1..=3")));
        }
        if basis.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension("basis vectors must have length d".into()));
        }
        if basis.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite basis entry".into()));
        }
        let a = DMatrix::from_fn(dim, dim, |i, j| basis[i][j]);
        let det = a.determinant();
        let scale = basis.iter().map(|v| norm(v)).fold(0.0, f64::max);
        let threshold = 1e-12 * scale.powi(dim as i32);
        if !(det.abs() >= threshold) || scale == 0.0 {
            return Err(Error::DegenerateBasis { det, threshold });
        }
        let inv = a.clone().try_inverse().ok_or(Error::DegenerateBasis { det, threshold })?;
        // rows of B are b_i, B = 2 pi A^{-T}
        let b = inv.transpose() * (2.0 * PI);
        let dual: Vec<Vec<f64>> = (0..dim).map(|i| b.row(i).iter().copied().collect()).collect();
        let cell_volume = det.abs();
        let dual_cell_volume = b.determinant().abs();

        let mut lat = Lattice {
            dim,
            primal: basis,
            dual,
            cell_volume,
            dual_cell_volume,
            inradius: 0.0,
            near_duals: Vec::new(),
        };
        let longest = lat.dual.iter().map(|v| norm(v)).fold(0.0, f64::max);
        let shortest = lat
            .enumerate_duals(3.0 * longest)
            .into_iter()
            .filter(|(c, _)| c.iter().any(|&x| x != 0))
            .map(|(_, v)| norm(&v))
            .fold(f64::INFINITY, f64::min);
        lat.inradius = 0.5 * shortest;
        let reach = 2.0 * lat.dual.iter().map(|v| norm(v)).sum::<f64>();
        lat.near_duals = lat
            .enumerate_duals(reach)
            .into_iter()
            .filter(|(c, _)| c.iter().any(|&x| x != 0))
            .map(|(_, v)| v)
            .collect();
        Ok(lat)
    }

    /// The unit lattice `Z^d`.
    pub fn cubic(dim: usize) -> Result<Self> {
        Self::new((0..dim).map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn primal(&self) -> &[Vec<f64>] {
        &self.primal
    }

    pub fn dual(&self) -> &[Vec<f64>] {
        &self.dual
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn dual_cell_volume(&self) -> f64 {
        self.dual_cell_volume
    }

    /// Radius of the largest ball centred at 0 inside the Brillouin zone.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// `sum c_i b_i`.
    pub fn dual_vector(&self, coords: &[i64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for (c, b) in coords.iter().zip(&self.dual) {
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += *c as f64 * bi;
            }
        }
        v
    }

    /// `sum x_i a_i`.
    pub fn primal_vector(&self, coords: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for (c, a) in coords.iter().zip(&self.primal) {
            for (vi, ai) in v.iter_mut().zip(a) {
                *vi += c * ai;
            }
        }
        v
    }

    /// All dual vectors with `|b| <= radius`, in lexicographic order of coordinates.
    fn enumerate_duals(&self, radius: f64) -> Vec<(Vec<i64>, Vec<f64>)> {
        // coordinate i of b equals <b, a_i> / 2 pi, so |c_i| <= radius |a_i| / 2 pi
        let bounds: Vec<i64> = self
            .primal
            .iter()
            .map(|a| (radius * norm(a) / (2.0 * PI) + 1e-9).floor() as i64)
            .collect();
        let tol = 1e-12 * radius.max(1.0);
        let mut out = Vec::new();
        let mut c: Vec<i64> = bounds.iter().map(|b| -b).collect();
        loop {
            let v = self.dual_vector(&c);
            if norm(&v) <= radius + tol {
                out.push((c.clone(), v));
            }
            // odometer increment, last coordinate fastest
            let mut i = self.dim;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if c[i] < bounds[i] {
                    c[i] += 1;
                    for (cj, bj) in c.iter_mut().zip(&bounds).skip(i + 1) {
                        *cj = -bj;
                    }
                    break;
                }
            }
        }
    }

    /// Plane-wave frequency set `{b : |b| <= cutoff}`.
    pub fn truncate(&self, cutoff: f64) -> Result<FrequencySet> {
        if !(cutoff >= 0.0) || !cutoff.is_finite() {
            return Err(Error::EmptyTruncation { cutoff });
        }
        let list = self.enumerate_duals(cutoff);
        let mut coords = Vec::with_capacity(list.len());
        let mut vectors = Vec::with_capacity(list.len());
        let mut index = HashMap::with_capacity(list.len());
        for (i, (c, v)) in list.into_iter().enumerate() {
            index.insert(c.clone(), i);
            coords.push(c);
            vectors.push(v);
        }
        let zero = index[&vec![0i64; self.dim]];
        Ok(FrequencySet { cutoff, coords, vectors, index, zero })
    }

    /// Whether `k` lies in the closed Brillouin zone.
    pub fn in_brillouin(&self, k: &[f64]) -> bool {
        let nk = norm(k);
        self.near_duals.iter().all(|b| nk <= dist(k, b) + 1e-12)
    }

    /// Translates `k` by the dual vector nearest to it, repeating until no
    /// nearby dual vector is closer.
    pub fn reduce_to_zone(&self, k: &[f64]) -> Vec<f64> {
        let mut k = k.to_vec();
        loop {
            let mut best = norm(&k);
            let mut shift: Option<&Vec<f64>> = None;
            for b in &self.near_duals {
                let d = dist(&k, b);
                if d < best - 1e-14 * best.max(1.0) {
                    best = d;
                    shift = Some(b);
                }
            }
            match shift {
                Some(b) => k.iter_mut().zip(b).for_each(|(x, y)| *x -= y),
                None => return k,
            }
        }
    }

    /// Uniform midpoint grid on the fundamental dual cell, mapped into the zone.
    ///
    /// Points sit at fractional coordinates `(j + 1/2) / resolution`, so `k = 0` is
    /// never sampled. Quadrature mode attaches the equal weights `|dual cell| / M^d`.
    pub fn sample_brillouin(&self, resolution: usize, mode: SampleMode) -> Result<BrillouinGrid> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("Brillouin resolution must be at least 1".into()));
        }
        let total = resolution.pow(self.dim as u32);
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut k = vec![0.0; self.dim];
            for i in (0..self.dim).rev() {
                let j = rem % resolution;
                rem /= resolution;
                let f = (j as f64 + 0.5) / resolution as f64;
                for (kx, bx) in k.iter_mut().zip(&self.dual[i]) {
                    *kx += f * bx;
                }
            }
            points.push(self.reduce_to_zone(&k));
        }
        let weights = match mode {
            SampleMode::SupGrid => None,
            SampleMode::Quadrature => Some(vec![self.dual_cell_volume / total as f64; total]),
        };
        Ok(BrillouinGrid { points, weights, avoids_origin: true })
    }

    /// Points of the resolution-`M` midpoint grid that fall in the ball `|k| <= radius`,
    /// with the same weights as the full grid. Requires `radius <= r0`.
    pub fn quadrature_points_within(&self, resolution: usize, radius: f64) -> Result<BrillouinGrid> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be at least 1".into()));
        }
        if !(radius > 0.0 && radius <= self.inradius) {
            return Err(Error::InvalidArgument(format!(
                "ball radius {radius} must lie in (0, r0 = {}]",
                self.inradius
            )));
        }
        let m = resolution as f64;
        let bounds: Vec<i64> = self
            .primal
            .iter()
            .map(|a| (m * radius * norm(a) / (2.0 * PI)).ceil() as i64 + 1)
            .collect();
        let weight = self.dual_cell_volume / m.powi(self.dim as i32);
        let mut points = Vec::new();
        let mut j: Vec<i64> = bounds.iter().map(|b| -b).collect();
        'outer: loop {
            let f: Vec<f64> = j.iter().map(|&x| (x as f64 + 0.5) / m).collect();
            let mut k = vec![0.0; self.dim];
            for (fi, b) in f.iter().zip(&self.dual) {
                for (kx, bx) in k.iter_mut().zip(b) {
                    *kx += fi * bx;
                }
            }
            if norm(&k) <= radius {
                points.push(k);
            }
            let mut i = self.dim;
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                if j[i] < bounds[i] {
                    j[i] += 1;
                    for (jj, bj) in j.iter_mut().zip(&bounds).skip(i + 1) {
                        *jj = -bj;
                    }
                    break;
                }
            }
        }
        let weights = Some(vec![weight; points.len()]);
        Ok(BrillouinGrid { points, weights, avoids_origin: true })
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Sampling mode for [`Lattice::sample_brillouin`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    SupGrid,
    Quadrature,
}

/// Truncated set of dual-lattice frequencies, ordered lexicographically by coordinates.
#[derive(Debug, Clone)]
pub struct FrequencySet {
    cutoff: f64,
    coords: Vec<Vec<i64>>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<Vec<i64>, usize>,
    zero: usize,
}

impl FrequencySet {
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[Vec<i64>] {
        &self.coords
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Position of the frequency with the given integer coordinates.
    pub fn position(&self, coords: &[i64]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    /// Position of the zero frequency.
    pub fn zero_index(&self) -> usize {
        self.zero
    }
}

/// Sample points in the closed Brillouin zone, optionally with quadrature weights.
#[derive(Debug, Clone)]
pub struct BrillouinGrid {
    pub points: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    pub avoids_origin: bool,
}

impl BrillouinGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Appends points `t * theta` for `t` geometric in `[t_min, t_max]` and the given directions.
    pub fn with_radial_refinement(mut self, t_min: f64, t_max: f64, radial: usize, directions: &[Vec<f64>]) -> Self {
        if radial == 0 || directions.is_empty() || !(t_min > 0.0 && t_max >= t_min) {
            return self;
        }
        let ratio = if radial > 1 { (t_max / t_min).powf(1.0 / (radial - 1) as f64) } else { 1.0 };
        for i in 0..radial {
            let t = t_min * ratio.powi(i as i32);
            for th in directions {
                self.points.push(th.iter().map(|x| t * x).collect());
            }
        }
        self.weights = None;
        self
    }
}

/// Deterministic unit directions in `R^d`.
///
/// `d = 1` gives `{+1, -1}`, `d = 2` gives equally spaced angles starting at 0 and
/// `d = 3` gives a Fibonacci sphere.
pub fn unit_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(1))
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / count.max(1) as f64;
                vec![phi.cos(), phi.sin()]
            })
            .collect(),
        _ => {
            let n = count.max(2);
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * j as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
    }
}

/// Duality defect `max |<b_i, a_j> - 2 pi delta_ij|`.
pub fn duality_defect(lat: &Lattice) -> f64 {
    let mut worst = 0.0_f64;
    for (i, b) in lat.dual().iter().enumerate() {
        for (j, a) in lat.primal().iter().enumerate() {
            let target = if i == j { 2.0 * PI } else { 0.0 };
            worst = worst.max((dot(b, a) - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_line() {
        let lat = Lattice::cubic(1).unwrap();
        assert!((lat.dual()[0][0] - 2.0 * PI).abs() < 1e-14);
        assert!((lat.inradius() - PI).abs() < 1e-14);
        assert!((lat.dual_cell_volume() - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn truncation_counts() {
        let lat = Lattice::cubic(1).unwrap();
        let f = lat.truncate(2.0 * PI + 0.1).unwrap();
        assert_eq!(f.coords(), &[vec![-1], vec![0], vec![1]]);
        assert_eq!(lat.truncate(0.0).unwrap().len(), 1);
        assert!(matches!(lat.truncate(-1.0), Err(Error::EmptyTruncation { .. })));
        let sq = Lattice::cubic(2).unwrap();
        assert_eq!(sq.truncate(2.0 * PI * 1.5).unwrap().len(), 9);
    }

    #[test]
    fn degenerate_basis() {
        let r = Lattice::new(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(r, Err(Error::DegenerateBasis { .. })));
    }

    #[test]
    fn quadrature_weights() {
        let lat = Lattice::cubic(1).unwrap();
        let g = lat.sample_brillouin(4, SampleMode::Quadrature).unwrap();
        assert_eq!(g.len(), 4);
        for w in g.weights.as_ref().unwrap() {
            assert!((w - PI / 2.0).abs() < 1e-14);
        }
        let one = lat.sample_brillouin(1, SampleMode::SupGrid).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one.points[0][0].abs() > 0.0);
    }

    #[test]
    fn ball_points_are_symmetric() {
        let lat = Lattice::cubic(2).unwrap();
        let g = lat.quadrature_points_within(200, 0.3).unwrap();
        let sx: f64 = g.points.iter().map(|p| p[0]).sum();
        assert!(sx.abs() < 1e-10);
        let area: f64 = g.weights.unwrap().iter().sum();
        assert!((area - PI * 0.09).abs() < 0.02 * PI * 0.09);
    }
}
