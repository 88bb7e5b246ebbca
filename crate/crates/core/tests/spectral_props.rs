use std::f64::consts::PI;

use fbm_chaos::spectral::{
    gamma_fn, inner_product_delta, inner_product_l2, outer_h, spectral_density, z_hat, FrequencyFunction,
};
use fbm_chaos::{QuadratureSpec, SpectralModel};
use proptest::prelude::*;

#[test]
fn gamma_reference_values() {
    assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
    assert!((gamma_fn(5.0).unwrap() - 24.0).abs() < 1e-12);
    assert!((gamma_fn(-0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-13);
    assert!((gamma_fn(0.8).unwrap() - 1.1642297137253030).abs() < 1e-14);
}

#[test]
fn basis_gram_is_identity() {
    let q = QuadratureSpec::default();
    for h in [0.15, 0.5, 0.85] {
        let m = SpectralModel::new(h).unwrap();
        let basis: Vec<FrequencyFunction> = (-3..=3).map(|n| FrequencyFunction::xi_hat(&m, n)).collect();
        for (i, f) in basis.iter().enumerate() {
            for (j, g) in basis.iter().enumerate() {
                let v = inner_product_delta(f, g, &m, &q).unwrap().value;
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((v.re - target).abs() < 1e-4 && v.im.abs() < 1e-4, "H={h} ({i},{j}) {v}");
            }
        }
    }
}

#[test]
fn basis_lebesgue_norm() {
    // ∫ |ξ̂_n|^2 dγ = (1/(π C_H)) ∫ |γ|^{2H-1}/(1+γ^2) dγ = 1/(C_H sin πH)
    let q = QuadratureSpec::default();
    for h in [0.1, 0.3, 0.5, 0.9] {
        let m = SpectralModel::new(h).unwrap();
        let f = FrequencyFunction::xi_hat(&m, 2);
        let v = inner_product_l2(&f, &f, &q).unwrap();
        let oracle = 1.0 / (m.c_h() * (PI * h).sin());
        assert!((v.re() - oracle).abs() < 1e-6 * oracle, "H={h}: {} vs {oracle}", v.re());
    }
}

#[test]
fn transform_inner_product_is_covariance() {
    let q = QuadratureSpec::default();
    let m = SpectralModel::new(0.3).unwrap();
    for (t, s) in [(1.0, 0.5), (-2.0, 1.5), (0.7, 0.7)] {
        let v = inner_product_delta(&FrequencyFunction::z_t(t), &FrequencyFunction::z_t(s), &m, &q).unwrap();
        let exact = 0.5 * (f64::abs(t).powf(0.6) + f64::abs(s).powf(0.6) - f64::abs(t - s).powf(0.6));
        assert!((v.re() - exact).abs() < 1e-6, "({t},{s}) {} vs {exact}", v.re());
    }
}

proptest! {
    #[test]
    fn factorization_identity(h in 0.02f64..0.98, lg in -3.0f64..3.0, neg in any::<bool>()) {
        let m = SpectralModel::new(h).unwrap();
        let g = if neg { -(10f64.powf(lg)) } else { 10f64.powf(lg) };
        let o = outer_h(&m, g).unwrap();
        let d = spectral_density(&m, g);
        prop_assert!((o.norm_sqr() * (1.0 + g * g) - d).abs() <= 1e-12 * d);
        // (γ+i) h(γ) is the boundary value of a real function: conj at -γ
        let lhs = num_complex::Complex64::new(-g, 1.0) * outer_h(&m, -g).unwrap();
        let rhs = (num_complex::Complex64::new(g, 1.0) * o).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn transforms_are_hermitian(t in -5.0f64..5.0, g in 1e-3f64..1e3) {
        prop_assert!((z_hat(t, -g) - z_hat(t, g).conj()).norm() <= 1e-15 * z_hat(t, g).norm().max(1.0));
        let f = FrequencyFunction::z_t(t);
        prop_assert!(f.symmetry_defect(&[g]) <= 1e-15);
    }

    #[test]
    fn density_is_even_power_law(h in 0.02f64..0.98, g in 1e-3f64..1e3) {
        let m = SpectralModel::new(h).unwrap();
        let d = spectral_density(&m, g);
        prop_assert_eq!(d, spectral_density(&m, -g));
        prop_assert!((d - m.c_h() * g.powf(1.0 - 2.0 * h)).abs() <= 1e-13 * d);
    }
}
