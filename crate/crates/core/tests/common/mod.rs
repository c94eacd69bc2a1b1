#![allow(dead_code)]

use mcwave_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `B Bᵀ` with `B` of shape `n × rank`.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> Matrix {
    let b = gaussian_matrix(rng, n, rank);
    b.matmul(&b.transpose()).unwrap()
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> Matrix {
    let a = gaussian_matrix(rng, n, n);
    a.add(&a.transpose()).unwrap().scale(0.5)
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
