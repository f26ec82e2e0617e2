mod support;

use palmtex_core::glcm::{cooccurrence, marginals, normalize};
use palmtex_core::haralick::{features, intermediates};
use palmtex_core::{NormalizedCooccurrence, Offset, QuantizedImage};
use proptest::prelude::*;

fn probs(n: usize, flat: Vec<f64>) -> NormalizedCooccurrence {
    NormalizedCooccurrence::from_probs(n, flat).unwrap()
}

#[test]
fn features_match_brute_force_evaluation() {
    let mut rng = support::rng(2016);
    for case in 0..100 {
        let n = [4, 8, 32][case % 3];
        let flat = support::random_probs(&mut rng, n);
        let got = features(&probs(n, flat.clone()));
        let want = support::features(n, &flat);
        for (k, &w) in want.iter().enumerate() {
            assert!(
                support::close(got.0[k], w, 1e-9),
                "case {case} (N_g={n}) f{}: {} vs {w}",
                k + 1,
                got.0[k]
            );
        }
    }
}

#[test]
fn worked_example_intermediates() {
    #[rustfmt::skip]
    let c = [
        0.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 2.0, 1.0,
        0.0, 3.0, 0.0, 1.0,
        0.0, 1.0, 2.0, 1.0,
    ];
    let flat: Vec<f64> = c.iter().map(|v| v / 12.0).collect();
    let p = probs(4, flat.clone());
    let it = intermediates(&p, &marginals(&p));
    let t = support::terms(4, &support::one_based(4, &flat));
    for (a, b) in [
        (it.mu_x, t.mu_x),
        (it.mu_y, t.mu_y),
        (it.sigma_x, t.sigma_x),
        (it.sigma_y, t.sigma_y),
        (it.hx, t.hx),
        (it.hy, t.hy),
        (it.hxy, t.hxy),
        (it.hxy1, t.hxy1),
        (it.hxy2, t.hxy2),
    ] {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
    assert!((features(&p).angular_second_moment() - 22.0 / 144.0).abs() < 1e-15);
}

#[test]
fn constant_block_features() {
    let q = QuantizedImage::new(16, 16, 32, vec![9; 256]).unwrap();
    let f = features(&normalize(&cooccurrence(&q, Offset::HORIZONTAL)).unwrap());
    assert_eq!(f.f(1), 1.0);
    assert_eq!(f.f(2), 0.0);
    assert_eq!(f.f(5), 1.0);
    for k in [8, 9, 10, 11] {
        assert!(f.f(k).abs() <= 1e-12, "f{k} = {}", f.f(k));
    }
    assert_eq!(f.f(3), 0.0);
    assert_eq!(f.f(12), 0.0);
    assert_eq!(f.f(14), 0.0);
}

#[test]
fn uniform_distribution_terms() {
    let n = 6;
    let p = probs(n, vec![1.0 / 36.0; 36]);
    let it = intermediates(&p, &marginals(&p));
    let two_log = 2.0 * (n as f64).ln();
    assert!((it.hxy - two_log).abs() < 1e-12);
    assert!((it.hxy1 - two_log).abs() < 1e-12);
    assert!((it.hxy2 - two_log).abs() < 1e-12);
}

fn prob_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=10).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![2 => Just(0u32), 3 => 1u32..50], n * n)
            .prop_filter("some mass", |c| c.iter().any(|&v| v > 0))
            .prop_map(move |c| {
                let total: u32 = c.iter().sum();
                (n, c.iter().map(|&v| v as f64 / total as f64).collect())
            })
    })
}

fn marginal_strategy() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=10).prop_flat_map(|n| {
        prop::collection::vec(0u32..20, n)
            .prop_filter("some mass", |c| c.iter().any(|&v| v > 0))
            .prop_map(|c| {
                let t: u32 = c.iter().sum();
                c.iter().map(|&v| v as f64 / t as f64).collect()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ranges_and_entropy_bounds((n, flat) in prob_strategy()) {
        let p = probs(n, flat);
        let m = marginals(&p);
        let it = intermediates(&p, &m);
        let f = features(&p);
        let ln = |x: f64| x.ln();
        let slack = 1e-9;
        prop_assert!(it.sigma_x >= 0.0 && it.sigma_y >= 0.0 && it.hxy >= 0.0);
        prop_assert!(it.hxy1 >= it.hxy - slack);
        prop_assert!(it.hxy2 >= it.hxy - slack);
        prop_assert!(f.f(1) > 0.0 && f.f(1) <= 1.0);
        prop_assert!(f.f(5) > 0.0 && f.f(5) <= 1.0);
        prop_assert!(f.f(3).abs() <= 1.0 + slack);
        prop_assert!(f.f(8) >= 0.0 && f.f(9) >= 0.0 && f.f(11) >= 0.0);
        prop_assert!((-slack..=1.0 + slack).contains(&f.f(13)));
        prop_assert!((-slack..=1.0 + slack).contains(&f.f(14)));
        prop_assert!(f.f(8) <= ln((2 * n - 1) as f64) + slack);
        prop_assert!(f.f(9) <= 2.0 * ln(n as f64) + slack);
        prop_assert!(f.f(11) <= ln(n as f64) + slack);
    }

    #[test]
    fn permutation_leaves_asm_and_entropy((n, flat) in prob_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut support::rng(seed));
        let mut permuted = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                permuted[perm[i] * n + perm[j]] = flat[i * n + j];
            }
        }
        let a = features(&probs(n, flat));
        let b = features(&probs(n, permuted));
        prop_assert!((a.f(1) - b.f(1)).abs() <= 1e-12);
        prop_assert!((a.f(9) - b.f(9)).abs() <= 1e-12);
    }

    #[test]
    fn contrast_zero_iff_diagonal((n, flat) in prob_strategy()) {
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || flat[i * n + j] == 0.0));
        let f = features(&probs(n, flat));
        prop_assert_eq!(f.f(2).abs() <= 1e-12, diagonal);
    }

    #[test]
    fn info_correlation_identity((n, flat) in prob_strategy()) {
        let p = probs(n, flat);
        let it = intermediates(&p, &marginals(&p));
        let e = (-2.0 * (it.hxy2 - it.hxy)).exp();
        prop_assume!(e <= 1.0);
        let f13 = features(&p).f(13);
        prop_assert!((f13 * f13 + e - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn independent_distribution_has_no_information_correlation(
        px in marginal_strategy(),
        py in marginal_strategy(),
    ) {
        let n = px.len().max(py.len());
        let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                flat[i * n + j] = at(&px, i) * at(&py, j);
            }
        }
        let total: f64 = flat.iter().sum();
        flat.iter_mut().for_each(|v| *v /= total);
        let p = probs(n, flat);
        let it = intermediates(&p, &marginals(&p));
        prop_assert!((it.hxy - it.hxy1).abs() <= 1e-9);
        prop_assert!(features(&p).f(12).abs() <= 1e-9);
    }
}

#[test]
fn point_mass_has_zero_max_correlation() {
    for n in [1, 3, 32] {
        let mut flat = vec![0.0; n * n];
        flat[(n - 1) * n] = 1.0;
        assert_eq!(features(&probs(n, flat)).f(14), 0.0);
    }
}
