use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use rand::SeedableRng;
use renewal_arma::arma::{arma_acvf, factorize};
use renewal_arma::battery::random_spec;
use renewal_arma::lifetime::LifetimeSpec;
use renewal_arma::polynomials::{Poly, SymLaurent};
use renewal_arma::renewal::acvf_renewal;
use renewal_arma::simulate::{simulate_counts, SimConfig};

/// Real roots and conjugate pairs, all with modulus in [1.2, 4].
fn root_set() -> impl Strategy<Value = Vec<Complex64>> {
    let real = (1.2f64..4.0, any::<bool>())
        .prop_map(|(m, neg)| vec![Complex64::new(if neg { -m } else { m }, 0.0)]);
    let pair = (1.2f64..4.0, 0.2f64..(PI - 0.2)).prop_map(|(m, t)| {
        let z = Complex64::from_polar(m, t);
        vec![z, z.conj()]
    });
    prop::collection::vec(prop_oneof![real, pair], 1..4).prop_map(|v| v.concat())
}

fn nearest_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .map(|x| {
            b.iter()
                .map(|y| (x - y).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn roots_recover_expanded_factors(roots in root_set()) {
        let p = Poly::from_roots(&roots);
        let found = p.roots().unwrap();
        prop_assert_eq!(found.len(), roots.len());
        prop_assert!(nearest_gap(&roots, &found) < 1e-7);
        prop_assert!(nearest_gap(&found, &roots) < 1e-7);
    }

    #[test]
    fn deflation_round_trips(coeffs in prop::collection::vec(-2.0f64..2.0, 1..6)) {
        let q = Poly::new(coeffs);
        prop_assume!(!q.is_zero());
        let p = q.mul(&Poly::new(vec![1.0, -1.0]));
        let back = p.deflate_at_one().unwrap();
        let gap = back.sub(&q).coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        prop_assert!(gap < 1e-12 * (1.0 + q.abs_sum()));
    }

    #[test]
    fn product_diff_matches_pointwise(
        p in prop::collection::vec(-1.0f64..1.0, 1..5),
        q in prop::collection::vec(-1.0f64..1.0, 1..5),
        t in 0.0f64..(2.0 * PI),
    ) {
        let (p, q) = (Poly::new(p), Poly::new(q));
        let z = Complex64::from_polar(1.0, t);
        let direct = q.eval(z).norm_sqr() - p.eval(z).norm_sqr();
        let n = SymLaurent::product_diff(&p, &q);
        prop_assert!((n.eval_circle(t) - direct).abs() < 1e-12);
    }

    #[test]
    fn factor_outside_reconstructs(roots in root_set(), k in 0.1f64..5.0) {
        // k theta(z) theta(1/z) for a real theta with zeros outside the circle
        let theta = Poly::from_roots(&roots);
        let theta = theta.scale(1.0 / theta.coeff(0));
        let c = theta.coeffs();
        let sym: Vec<f64> = (0..c.len())
            .map(|h| k * c.iter().zip(&c[h..]).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let (found, k_found) = SymLaurent::new(sym).factor_outside().unwrap();
        prop_assert!((k_found - k).abs() < 1e-8 * k);
        let gap = found.sub(&theta).coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(gap < 1e-7 * theta.abs_sum());
    }

    #[test]
    fn factorized_acvf_matches_renewal(p in 1usize..=4, seed in any::<u64>(), m in 1u32..8) {
        let spec = random_spec(p, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let model = factorize(&spec.pgf(), m).unwrap();
        let a = arma_acvf(&model, 30).unwrap();
        let b = acvf_renewal(&spec, m, 30);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn lifetime_moments_match_series(p in 1usize..=5, seed in any::<u64>()) {
        let spec = random_spec(p, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let f = spec.pmf_table(4000);
        prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let mean: f64 = f.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum();
        prop_assert!((mean - spec.mean()).abs() < 1e-9 * spec.mean());
        let m2: f64 = f.iter().enumerate().map(|(i, v)| ((i + 1) * (i + 1)) as f64 * v).sum();
        let var = m2 - mean * mean;
        prop_assert!((var - spec.variance()).abs() < 1e-8 * spec.variance().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_is_a_function_of_its_config(seed in any::<u64>(), m in 1u32..6) {
        let cfg = SimConfig {
            spec: LifetimeSpec::constant_hazard(vec![0.2, 0.3], 0.6).unwrap(),
            m,
            steps: 300,
            seed,
        };
        let a = simulate_counts(&cfg).unwrap();
        prop_assert_eq!(&a, &simulate_counts(&cfg).unwrap());
        prop_assert!(a.values.iter().all(|&v| v <= m));
    }
}
