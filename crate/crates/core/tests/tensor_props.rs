mod common;

use common::{gaussian_tokens, random_permutation, rng, to_dmatrix};
use prominence_core::tensor::{gram_matrix, sym_eigenvalues};
use prominence_core::TokenMatrix;
use proptest::prelude::*;

fn transpose(t: &TokenMatrix) -> TokenMatrix {
    let m = to_dmatrix(t).transpose();
    common::from_dmatrix(&m)
}

fn spectrum(t: &TokenMatrix) -> Vec<f64> {
    sym_eigenvalues(&gram_matrix(t).unwrap())
        .unwrap()
        .eigenvalues
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_gram_sides_share_a_spectrum(n in 1usize..14, d in 1usize..14, seed: u64) {
        let e = gaussian_tokens(n, d, &mut rng(seed));
        let a = spectrum(&e);
        let b = spectrum(&transpose(&e));
        let r = n.min(d);
        let scale = a[0].max(1.0);
        for i in 0..r {
            prop_assert!((a[i] - b[i]).abs() <= 1e-8 * scale, "{} vs {}", a[i], b[i]);
        }
    }

    #[test]
    fn gram_trace_is_squared_frobenius_norm(n in 1usize..20, d in 1usize..20, seed: u64) {
        let e = gaussian_tokens(n, d, &mut rng(seed));
        let fro: f64 = e.as_slice().iter().map(|v| v * v).sum();
        let tr = gram_matrix(&e).unwrap().trace();
        prop_assert!((tr - fro).abs() <= 1e-8 * fro);
    }

    #[test]
    fn spectrum_ignores_row_order(n in 2usize..16, d in 1usize..12, seed: u64) {
        let mut r = rng(seed);
        let e = gaussian_tokens(n, d, &mut r);
        let p = e.permute_rows(&random_permutation(n, &mut r)).unwrap();
        let (a, b) = (spectrum(&e), spectrum(&p));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8 * a[0].max(1.0));
        }
    }

    #[test]
    fn spectrum_matches_nalgebra(n in 1usize..12, d in 1usize..12, seed: u64) {
        let e = gaussian_tokens(n, d, &mut rng(seed));
        let g = to_dmatrix(&e);
        let gram = if d <= n { g.transpose() * &g } else { &g * g.transpose() };
        let mut expected: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|v| v.max(0.0)).collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        let got = spectrum(&e);
        prop_assert_eq!(got.len(), expected.len());
        for (x, y) in got.iter().zip(&expected) {
            prop_assert!((x - y).abs() <= 1e-9 * expected[0].max(1.0));
        }
    }

    #[test]
    fn eigenvalues_are_sorted_and_nonnegative(n in 1usize..10, d in 1usize..10, seed: u64) {
        let got = spectrum(&gaussian_tokens(n, d, &mut rng(seed)));
        prop_assert!(got.iter().all(|&v| v >= 0.0));
        prop_assert!(got.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn gram_is_exactly_symmetric() {
    let e = gaussian_tokens(70, 90, &mut rng(3));
    let g = gram_matrix(&e).unwrap();
    assert_eq!(g.asymmetry(), 0.0);
    let e = gaussian_tokens(90, 70, &mut rng(4));
    assert_eq!(gram_matrix(&e).unwrap().asymmetry(), 0.0);
}

#[test]
fn large_gram_matches_naive_product() {
    // Large enough to cross the blocked transpose and tiled mirror paths.
    let e = gaussian_tokens(150, 130, &mut rng(11));
    let g = gram_matrix(&e).unwrap();
    let m = to_dmatrix(&e);
    let naive = m.transpose() * &m;
    for i in 0..130 {
        for j in 0..130 {
            assert!((g.get(i, j) - naive[(i, j)]).abs() < 1e-9, "({i},{j})");
        }
    }
}
