use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use wigrot_core::analysis::{cross_error, noise_amplification, unitarity_error, NoiseKind, NoiseModel};
use wigrot_core::fft::{compute_subspace_fft_basic, compute_subspace_fft_modified, default_theta_hat};
use wigrot_core::oracle::{flip_reconstruct, h_direct, wigner_d_from_h};
use wigrot_core::rotation::{rotate_expansion, PrecomputedCoeffs, RotationAngles, SHExpansion};
use wigrot_core::{compute_any_beta, compute_subspace, full_matrix, Algorithm};

fn d_matrix(n: usize, beta: f64) -> Vec<Vec<f64>> {
    let h = full_matrix(&compute_subspace(n, beta).unwrap()).unwrap();
    let ni = n as i64;
    (-ni..=ni).map(|mp| (-ni..=ni).map(|m| wigner_d_from_h(n, mp, m, h.get(mp, m))).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn recursion_matches_direct_sum(n in 0usize..=20, beta in 0.0..=PI) {
        let t = compute_subspace(n, beta).unwrap();
        for (mp, m, v) in t.iter() {
            prop_assert!((v - h_direct(n, mp, m, beta).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn engines_agree(n in 1usize..=96, beta in 0.0..=PI) {
        let r = compute_subspace(n, beta).unwrap();
        let m = compute_subspace_fft_modified(n, beta).unwrap();
        prop_assert!(cross_error(&r, &m).unwrap() <= 1e-10);
        if n <= 32 {
            let b = compute_subspace_fft_basic(n, beta, default_theta_hat(n)).unwrap();
            prop_assert!(cross_error(&r, &b).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn d_matrix_group_law(n in 0usize..=24, b1 in 0.0..=1.5f64, b2 in 0.0..=1.5f64) {
        let (d1, d2, d12) = (d_matrix(n, b1), d_matrix(n, b2), d_matrix(n, b1 + b2));
        let dim = 2 * n + 1;
        for i in 0..dim {
            for j in 0..dim {
                let prod: f64 = (0..dim).map(|k| d1[i][k] * d2[k][j]).sum();
                prop_assert!((prod - d12[i][j]).abs() <= 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn flip_matches_recursion(n in 0usize..=64, beta in 0.0..=PI) {
        let half = compute_subspace(n, std::f64::consts::FRAC_PI_2).unwrap();
        let t = compute_subspace(n, beta).unwrap();
        prop_assert!(cross_error(&flip_reconstruct(&half, n, beta).unwrap(), &t).unwrap() <= 1e-11);
    }

    #[test]
    fn periodic_in_beta(n in 0usize..=40, beta in -PI..PI, k in -3i32..=3) {
        let (a, _) = compute_any_beta(Algorithm::Recursive, n, beta).unwrap();
        let (b, _) = compute_any_beta(Algorithm::Recursive, n, beta + TAU * k as f64).unwrap();
        for ((_, _, x), (_, _, y)) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() <= 1e-11);
        }
    }

    #[test]
    fn unitary_for_moderate_degree(n in 0usize..=200, beta in 0.0..=PI) {
        prop_assert!(unitarity_error(&compute_subspace(n, beta).unwrap()) <= 1e-12);
    }

    #[test]
    fn rotation_round_trip(
        p in 1usize..=24,
        alpha in -PI..PI,
        beta in 0.0..=PI,
        gamma in -PI..PI,
        seed in any::<u64>(),
    ) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let coeffs = (0..p * p).map(|_| Complex64::new(next(), next())).collect();
        let f = SHExpansion::from_coeffs(p, coeffs).unwrap();
        let angles = RotationAngles::new(alpha, beta, gamma).unwrap();
        let cached = PrecomputedCoeffs::new(p, beta).unwrap();
        let g = rotate_expansion(&f, &angles, &cached).unwrap();
        let g_fft = rotate_expansion(&f, &angles, &Algorithm::FftModified).unwrap();
        let back = rotate_expansion(&g, &angles.inverse(), &cached).unwrap();
        for n in 0..p {
            prop_assert!((f.degree_norm(n) - g.degree_norm(n)).abs() <= 1e-12);
        }
        for ((x, y), z) in f.as_slice().iter().zip(back.as_slice()).zip(g.as_slice()) {
            prop_assert!((x - y).norm() <= 1e-12);
            prop_assert!(z.norm().is_finite());
        }
        for (a, b) in g.as_slice().iter().zip(g_fft.as_slice()) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
    }
}

#[test]
fn noise_amplification_is_reproducible() {
    for kind in [NoiseKind::Uniform, NoiseKind::Coherent] {
        let model = NoiseModel { kind, seed: 99, trials: 6 };
        let a = noise_amplification(80, &model).unwrap();
        let b = noise_amplification(80, &model).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let other = noise_amplification(80, &NoiseModel { seed: 100, ..model }).unwrap();
        assert_ne!(a.to_bits(), other.to_bits());
    }
}
