//! Seeded random inputs shared by the self-check and the property tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::clark::{circular_distance, CircleMeasure};
use crate::linalg::{CMatrix, C64};

/// Circular standard normal `(a + ib)/√2`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// `A A*` with `A` an `n x rank` complex Gaussian matrix.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let a = complex_matrix(rng, n, rank);
    let g = &a * a.adjoint();
    (&g + g.adjoint()).unscale(2.0)
}

/// Probability weights bounded below by `1 / (10 m)`.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..10.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// `m` points of `[0,1)` pairwise at circular distance at least `min_sep`.
pub fn random_atoms<R: Rng + ?Sized>(rng: &mut R, m: usize, min_sep: f64) -> Vec<f64> {
    assert!(m as f64 * min_sep < 0.5, "separation {min_sep} too large for {m} atoms");
    let mut atoms: Vec<f64> = Vec::with_capacity(m);
    while atoms.len() < m {
        let x: f64 = rng.random_range(0.0..1.0);
        if atoms.iter().all(|&a| circular_distance(a, x) >= min_sep) {
            atoms.push(x);
        }
    }
    atoms
}

/// `m` points of `[0,1)^k`, pairwise at sup-distance at least `min_sep`.
pub fn random_torus_atoms<R: Rng + ?Sized>(rng: &mut R, m: usize, k: usize, min_sep: f64) -> Vec<Vec<f64>> {
    let mut atoms: Vec<Vec<f64>> = Vec::with_capacity(m);
    while atoms.len() < m {
        let x: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let far =
            |a: &Vec<f64>| a.iter().zip(&x).map(|(&s, &t)| circular_distance(s, t)).fold(0.0, f64::max) >= min_sep;
        if atoms.iter().all(far) {
            atoms.push(x);
        }
    }
    atoms
}

/// Up to `max_atoms` atoms separated by `0.02`, weights as in [`random_weights`].
pub fn random_circle_measure<R: Rng + ?Sized>(rng: &mut R, max_atoms: usize) -> CircleMeasure {
    let m = rng.random_range(1..=max_atoms);
    let atoms = random_atoms(rng, m, 0.02);
    CircleMeasure::new(atoms, random_weights(rng, m)).expect("generated measure is valid")
}

/// Uniform in the disk of the given radius.
pub fn random_disk_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random_range(0.0f64..1.0).sqrt();
    C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

pub fn random_disk_points<R: Rng + ?Sized>(rng: &mut R, count: usize, radius: f64) -> Vec<C64> {
    (0..count).map(|_| random_disk_point(rng, radius)).collect()
}
