mod common;

use common::*;
use homspec_core::cell::{germ, homogenize};
use homspec_core::linalg::{hermitian_eigenvalues, CMat};
use homspec_core::{FiberModel, ThresholdWindow};

fn model(op: &homspec_core::PeriodicOperator, cutoff: f64) -> FiberModel {
    let freq = op.lattice().truncate(cutoff).unwrap();
    let (_, eff) = homogenize(op, &freq).unwrap();
    FiberModel::new(op, &freq, &eff)
}

#[test]
fn constant_scalar_fiber_is_diagonal() {
    let op = constant_operator(1.7, 3);
    let m = model(&op, two_pi(4.5));
    let k = [0.4];
    let a = m.fiber(&k);
    let mut expected: Vec<f64> = m.frequencies().vectors().iter().map(|b| 1.7 * (b[0] + k[0]).powi(6)).collect();
    expected.sort_by(f64::total_cmp);
    for (x, y) in a.spectrum().values.iter().zip(&expected) {
        assert!((x - y).abs() <= 1e-12 * y.max(1.0));
    }
    assert!((a.matrix() - m.effective(&k).matrix()).norm() == 0.0);
    assert!(m.smoothed_error_norm(&k, 3.0, 0.05, 7.0) < 1e-10);
}

#[test]
fn gap_at_origin() {
    for op in [cosine_operator(0.5), generic_d2(), stacked_diagonal_d1()] {
        let cutoff = if op.dim() == 1 { two_pi(6.5) } else { two_pi(3.2) };
        let m = model(&op, cutoff);
        let window = ThresholdWindow::new(&op, 1.0).unwrap();
        let a = m.fiber(&vec![0.0; op.dim()]);
        a.verify_threshold_structure(&window).unwrap();
        let v = &a.spectrum().values;
        assert!(v[..op.n()].iter().all(|l| l.abs() < 1e-10));
        assert!(v[op.n()] >= 0.9 * window.gap_lower_bound);
        assert!(window.delta <= 0.25 && window.t0 <= 0.5);
    }
}

#[test]
fn fiber_eigenvalues_converge_in_cutoff() {
    let op = cosine_operator(0.5);
    let k = [0.1 * two_pi(1.0)];
    let coarse = model(&op, two_pi(10.5)).fiber(&k);
    let fine = model(&op, two_pi(21.5)).fiber(&k);
    for j in 0..4 {
        let (a, b) = (coarse.spectrum().values[j], fine.spectrum().values[j]);
        assert!((a - b).abs() < 1e-8 * b.abs(), "eigenvalue {j}: {a} vs {b}");
    }
}

#[test]
fn effective_zero_block_is_scaled_germ() {
    let op = generic_d2();
    let freq = op.lattice().truncate(two_pi(3.2)).unwrap();
    let (_, eff) = homogenize(&op, &freq).unwrap();
    let m = FiberModel::new(&op, &freq, &eff);
    let k = [0.12, -0.31];
    let t = f64::hypot(k[0], k[1]);
    let s = germ(&op, &eff, &[k[0] / t, k[1] / t]).unwrap();
    let a0 = m.effective(&k);
    let block = &a0.blocks()[freq.zero_index()];
    assert!((block - s.scale(t.powi(4))).norm() < 1e-12 * block.norm());
    let h = hermitian_eigenvalues(&a0.matrix());
    assert!(h[0] >= 0.0);
}

#[test]
fn scalar_effective_blocks() {
    let op = cosine_operator(0.5);
    let m = model(&op, two_pi(10.5));
    let k = [0.3];
    let a0 = m.effective(&k);
    for (b, block) in m.frequencies().vectors().iter().zip(a0.blocks()) {
        let want = (b[0] + k[0]).powi(4) * 0.75f64.sqrt();
        assert!((block[(0, 0)].re - want).abs() <= 1e-10 * want.max(1.0));
    }
}

#[test]
fn exponentials_are_unitary_with_group_law() {
    let op = generic_d2();
    let m = model(&op, two_pi(3.2));
    let a = m.fiber(&[0.7, -0.2]);
    let id = CMat::identity(m.size(), m.size());
    assert!((a.exponential(0.0) - &id).norm() < 1e-12);
    let (t1, t2) = (0.0137, -0.0041);
    let e1 = a.exponential(t1);
    assert!((e1.adjoint() * &e1 - &id).norm() < 1e-10);
    let lhs = &e1 * a.exponential(t2);
    assert!((lhs - a.exponential(t1 + t2)).norm() < 1e-9);
    let a0 = m.effective(&[0.7, -0.2]);
    let e0 = a0.exponential(t1);
    assert!((e0.adjoint() * &e0 - &id).norm() < 1e-10);
}

#[test]
fn error_norm_basic_bounds() {
    let op = cosine_operator(0.5);
    let m = model(&op, two_pi(6.5));
    assert_eq!(m.smoothed_error_norm(&[0.2], 0.0, 0.1, 5.0), 0.0);
    let v = m.smoothed_error_norm(&[0.2], 1.0, 0.1, 0.0);
    assert!(v > 0.0 && v <= 2.0 + 1e-12);
}

#[test]
fn smoothing_weights() {
    let op = cosine_operator(0.5);
    let m = model(&op, two_pi(6.5));
    let r0 = op.lattice().inradius();
    let zero = m.frequencies().zero_index();
    for (k, eps) in [(0.3, 0.1), (-1.2, 0.02), (2.9, 0.5)] {
        let w = m.smoothing(&[k], eps, 1.0).diagonal;
        assert!(w.iter().all(|&x| x > 0.0 && x <= 1.0));
        assert!((w[zero] - eps / (k * k + eps * eps).sqrt()).abs() < 1e-15);
        let off = w.iter().enumerate().filter(|(i, _)| *i != zero).map(|(_, x)| *x).fold(0.0, f64::max);
        assert!(off <= eps / r0 + 1e-15);
        let w3 = m.smoothing(&[k], eps, 3.0).diagonal;
        assert!(w.iter().zip(&w3).all(|(a, b)| b <= a));
        // monotone in |b + k|
        let mut pairs: Vec<(f64, f64)> =
            m.frequencies().vectors().iter().zip(&w).map(|(b, x)| ((b[0] + k).abs(), *x)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|p| p[1].1 <= p[0].1));
    }
}
