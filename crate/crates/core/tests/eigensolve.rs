mod common;

use common::*;
use mcwave_core::eigensolve::default_clamp_floor;
use mcwave_core::{sym_eig, sym_eig_oracle, sym_eig_raw, Error, Matrix};
use proptest::prelude::*;

#[test]
fn production_and_jacobi_agree_on_random_psd() {
    let mut r = rng(11);
    for trial in 0..100 {
        let n = 1 + trial % 64;
        let rank = 1 + (trial * 7) % n;
        let a = random_psd(&mut r, n, rank);
        let fast = sym_eig(&a, default_clamp_floor(&a)).unwrap();
        let slow = sym_eig_oracle(&a).unwrap();
        let scale = a.max_abs().max(1.0);
        for (x, y) in fast.values.iter().zip(&slow.values) {
            assert!((x - y).abs() <= 1e-9 * scale, "n={n}: {x} vs {y}");
        }
    }
}

#[test]
fn hand_computed_two_by_two() {
    let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    for e in [sym_eig(&a, 0.0).unwrap(), sym_eig_oracle(&a).unwrap()] {
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v = e.vector(0);
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((v[0] - v[1]).abs() < 1e-14);
    }
}

#[test]
fn eight_by_eight_symmetric_reconstructs() {
    let mut r = rng(3);
    let a = random_symmetric(&mut r, 8);
    let e = sym_eig_raw(&a).unwrap();
    assert!(e.reconstruct().sub(&a).unwrap().max_abs() <= 1e-10);
    assert!(e.orthonormality_defect() <= 1e-10);
}

#[test]
fn indefinite_input_is_rejected_beyond_floor() {
    let a = Matrix::from_diagonal(&[1.0, -0.5]);
    assert!(matches!(
        sym_eig(&a, 1e-12),
        Err(Error::NotPositiveSemidefinite { .. })
    ));
}

#[test]
fn oracle_size_limit() {
    let a = Matrix::identity(65);
    assert!(matches!(sym_eig_oracle(&a), Err(Error::TooLarge { .. })));
}

#[test]
fn degenerate_spectrum_projectors_match() {
    // Only invariant subspaces are meaningful under repeated eigenvalues.
    let mut r = rng(5);
    let q = sym_eig_raw(&random_symmetric(&mut r, 6)).unwrap().vectors;
    let d = Matrix::from_diagonal(&[4.0, 4.0, 4.0, 1.0, 1.0, 0.0]);
    let a = q.matmul(&d).unwrap().matmul(&q.transpose()).unwrap();
    let fast = sym_eig(&a, default_clamp_floor(&a)).unwrap();
    let slow = sym_eig_oracle(&a).unwrap();
    let proj =
        |e: &mcwave_core::EigenSystem| e.spectral_matrix(|l| if l > 2.0 { 1.0 } else { 0.0 });
    assert!(proj(&fast).sub(&proj(&slow)).unwrap().max_abs() < 1e-10);
}

fn psd_strategy() -> impl Strategy<Value = Matrix> {
    (1usize..=24, 1usize..=24, any::<u64>()).prop_map(|(n, rank, seed)| {
        let mut r = rng(seed);
        random_psd(&mut r, n, rank.min(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_equals_eigenvalue_sum(a in psd_strategy()) {
        let e = sym_eig(&a, default_clamp_floor(&a)).unwrap();
        let s: f64 = e.values.iter().sum();
        prop_assert!((s - a.trace()).abs() <= 1e-10 * a.trace().abs().max(1.0));
    }

    #[test]
    fn orthonormal_and_reconstructing(a in psd_strategy()) {
        let e = sym_eig(&a, 0.0).or_else(|_| sym_eig(&a, default_clamp_floor(&a))).unwrap();
        prop_assert!(e.orthonormality_defect() <= 1e-10);
        let err = e.reconstruct().sub(&a).unwrap().max_abs();
        prop_assert!(err <= 1e-10 * a.max_abs().max(1.0));
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(e.values.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn oracle_matches_production(a in psd_strategy()) {
        let fast = sym_eig(&a, default_clamp_floor(&a)).unwrap();
        let slow = sym_eig_oracle(&a).unwrap();
        for (x, y) in fast.values.iter().zip(&slow.values) {
            prop_assert!((x - y).abs() <= 1e-9 * a.max_abs().max(1.0));
        }
    }
}
