#![allow(dead_code)]

use homspec_core::{CMat, Lattice, MultiIndex, PeriodicCoefficient, PeriodicOperator, SymbolB};
use num_complex::Complex64;
use std::f64::consts::PI;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn scalar(x: f64) -> CMat {
    CMat::from_element(1, 1, c(x, 0.0))
}

/// `b(xi) = xi^p` on the unit line.
pub fn power_symbol(p: u32) -> SymbolB {
    SymbolB::new(1, p, 1, 1, vec![(MultiIndex::new(vec![p]), scalar(1.0))]).unwrap()
}

/// `g = 1 + a cos(2 pi x)` with `b = xi^2`.
pub fn cosine_operator(a: f64) -> PeriodicOperator {
    let lat = Lattice::cubic(1).unwrap();
    let g = PeriodicCoefficient::new(lat, 1, vec![(vec![-1], scalar(a / 2.0)), (vec![0], scalar(1.0)), (vec![1], scalar(a / 2.0))])
        .unwrap();
    PeriodicOperator::new(power_symbol(2), g).unwrap()
}

pub fn constant_operator(value: f64, p: u32) -> PeriodicOperator {
    let lat = Lattice::cubic(1).unwrap();
    let g = PeriodicCoefficient::constant(lat, scalar(value)).unwrap();
    PeriodicOperator::new(power_symbol(p), g).unwrap()
}

/// `b(xi) = (xi^2, xi^2)^T`, `g = diag(1 + 0.5 cos, 1 + 0.3 sin)` on the unit line.
pub fn stacked_diagonal_d1() -> PeriodicOperator {
    let lat = Lattice::cubic(1).unwrap();
    let sym = SymbolB::new(1, 2, 2, 1, vec![(MultiIndex::new(vec![2]), CMat::from_element(2, 1, c(1.0, 0.0)))]).unwrap();
    let d = |a: Complex64, b: Complex64| CMat::from_row_slice(2, 2, &[a, c(0.0, 0.0), c(0.0, 0.0), b]);
    let g = PeriodicCoefficient::new(
        lat,
        2,
        vec![
            (vec![-1], d(c(0.25, 0.0), c(0.0, 0.15))),
            (vec![0], d(c(1.0, 0.0), c(1.0, 0.0))),
            (vec![1], d(c(0.25, 0.0), c(0.0, -0.15))),
        ],
    )
    .unwrap();
    PeriodicOperator::new(sym, g).unwrap()
}

/// Complex Hermitian `2 x 2` coefficient on the square lattice with `b = (xi1^2, xi2^2)^T`.
pub fn generic_d2() -> PeriodicOperator {
    let lat = Lattice::cubic(2).unwrap();
    let m = |e: [(f64, f64); 4]| CMat::from_row_slice(2, 2, &e.map(|(a, b)| c(a, b)));
    let half = vec![
        (vec![1, 0], m([(-0.043, -0.185), (0.023, 0.162), (-0.046, -0.088), (-0.07, 0.135)])),
        (vec![0, 1], m([(0.125, -0.092), (0.022, 0.021), (-0.046, 0.0), (0.011, 0.043)])),
        (vec![1, 1], m([(0.076, -0.063), (0.139, -0.072), (-0.031, -0.049), (0.083, -0.079)])),
        (vec![1, -1], m([(0.078, 0.022), (0.074, -0.046), (0.102, -0.092), (-0.002, 0.036)])),
    ];
    let mut terms = vec![(vec![0, 0], CMat::identity(2, 2))];
    for (k, v) in half {
        terms.push((k.iter().map(|x| -x).collect(), v.adjoint()));
        terms.push((k, v));
    }
    let g = PeriodicCoefficient::new(lat, 2, terms).unwrap();
    let col = |a: f64, b: f64| CMat::from_column_slice(2, 1, &[c(a, 0.0), c(b, 0.0)]);
    let sym = SymbolB::new(
        2,
        2,
        2,
        1,
        vec![(MultiIndex::new(vec![2, 0]), col(1.0, 0.0)), (MultiIndex::new(vec![0, 2]), col(0.0, 1.0))],
    )
    .unwrap();
    PeriodicOperator::new(sym, g).unwrap()
}

pub fn two_pi(x: f64) -> f64 {
    2.0 * PI * x
}
