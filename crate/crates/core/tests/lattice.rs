use homspec_core::{Lattice, SampleMode};
use std::f64::consts::PI;

#[test]
fn square_lattice() {
    let lat = Lattice::cubic(2).unwrap();
    assert_eq!(lat.dual(), &[vec![2.0 * PI, 0.0], vec![0.0, 2.0 * PI]]);
    assert!((lat.inradius() - PI).abs() < 1e-14);
    let g = lat.sample_brillouin(3, SampleMode::Quadrature).unwrap();
    assert_eq!(g.len(), 9);
    let total: f64 = g.weights.unwrap().iter().sum();
    assert!((total - 4.0 * PI * PI).abs() < 1e-10 * total);
}

#[test]
fn hexagonal_lattice() {
    let lat = Lattice::new(vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]).unwrap();
    assert!((lat.cell_volume() - 3f64.sqrt() / 2.0).abs() < 1e-14);
    let product = lat.cell_volume() * lat.dual_cell_volume();
    assert!((product - 4.0 * PI * PI).abs() < 1e-12 * product);
    // shortest dual vectors have length 4 pi / sqrt 3
    assert!((lat.inradius() - 2.0 * PI / 3f64.sqrt()).abs() < 1e-12);
    let grid = lat.sample_brillouin(12, SampleMode::SupGrid).unwrap();
    assert!(grid.avoids_origin);
    assert!(grid.points.iter().all(|k| lat.in_brillouin(k)));
}

#[test]
fn quadrature_integrates_over_zone() {
    let lat = Lattice::new(vec![vec![1.0, 0.2, 0.0], vec![0.0, 1.3, 0.1], vec![0.3, 0.0, 0.8]]).unwrap();
    let g = lat.sample_brillouin(5, SampleMode::Quadrature).unwrap();
    let total: f64 = g.weights.as_ref().unwrap().iter().sum();
    assert!((total - lat.dual_cell_volume()).abs() < 1e-10 * total);
    assert!(g.points.iter().all(|k| lat.in_brillouin(k)));
}

#[test]
fn truncation_matches_brute_force() {
    let lat = Lattice::new(vec![vec![1.0, 0.0], vec![0.4, 0.9]]).unwrap();
    let cutoff = 2.0 * PI * 2.3;
    let f = lat.truncate(cutoff).unwrap();
    let mut count = 0;
    for i in -20i64..=20 {
        for j in -20i64..=20 {
            let b = lat.dual_vector(&[i, j]);
            if (b[0] * b[0] + b[1] * b[1]).sqrt() <= cutoff {
                count += 1;
                assert!(f.position(&[i, j]).is_some());
            }
        }
    }
    assert_eq!(count, f.len());
    let mut sorted = f.coords().to_vec();
    sorted.sort();
    assert_eq!(sorted, f.coords());
}
