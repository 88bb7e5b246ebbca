use std::collections::BTreeMap;

use fbm_chaos::hermite::{
    conditional_moment, hermite_eval, hermite_param_eval, wick_exponential, wick_square, ChaosExpansion, MultiIndex,
    PastSet,
};
use proptest::prelude::*;

/// Explicit sum Σ_k (-1)^k n!/(k!(n-2k)!2^k) x^{n-2k} in floating point.
fn hermite_sum(n: usize, x: f64) -> f64 {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    (0..=n / 2)
        .map(|k| {
            let c = fact(n) / (fact(k) * fact(n - 2 * k) * 2f64.powi(k as i32));
            (-1f64).powi(k as i32) * c * x.powi((n - 2 * k) as i32)
        })
        .sum()
}

fn coeffs() -> impl Strategy<Value = BTreeMap<i64, f64>> {
    prop::collection::btree_map(-6i64..6, -1.0f64..1.0, 1..5)
}

#[test]
fn low_order_values() {
    assert_eq!(hermite_eval(0, 3.0).unwrap(), 1.0);
    assert_eq!(hermite_eval(1, 3.0).unwrap(), 3.0);
    assert_eq!(hermite_eval(2, 3.0).unwrap(), 8.0);
    assert_eq!(hermite_eval(3, 3.0).unwrap(), 18.0);
    assert_eq!(hermite_eval(4, 3.0).unwrap(), 81.0 - 54.0 + 3.0);
}

#[test]
fn conditional_moment_matches_gaussian_moments() {
    // E[(μ+σZ)^2] and E[(μ+σZ)^4]
    let (mu, s2) = (0.7, 0.3);
    assert!((conditional_moment(2, mu, s2).unwrap() - (mu * mu + s2)).abs() < 1e-14);
    let m4 = mu.powi(4) + 6.0 * mu * mu * s2 + 3.0 * s2 * s2;
    assert!((conditional_moment(4, mu, s2).unwrap() - m4).abs() < 1e-14);
}

#[test]
fn wick_square_conditioning_is_gaussian_identity() {
    let r: BTreeMap<i64, f64> = [(-3, 0.4), (-1, -0.2), (0, 0.5), (2, 0.3)].into_iter().collect();
    let var: f64 = r.values().map(|v| v * v).sum();
    let past = PastSet::UpTo(-1);
    let cond = wick_square(&r, var).condition(&past);
    let z: BTreeMap<i64, f64> = [(-3, 1.3), (-1, -0.4), (0, 2.0), (2, -1.0)].into_iter().collect();
    let mu = 0.4 * 1.3 + (-0.2) * (-0.4);
    let sigma2 = 0.25 + 0.09;
    let v = cond.eval_map(&z).unwrap();
    assert!((v - conditional_moment(2, mu, sigma2).unwrap()).abs() < 1e-13);
}

#[test]
fn text_round_trip() {
    let mut e = ChaosExpansion::new(-4, 4).unwrap();
    e.add_term(MultiIndex::empty(), 0.5).unwrap();
    e.add_term(MultiIndex::from_pairs([(-2, 1), (3, 2)]), -1.25).unwrap();
    e.add_term(MultiIndex::unit(0), 1e-3).unwrap();
    let back = ChaosExpansion::from_text(&e.to_text()).unwrap();
    assert_eq!(back.len(), e.len());
    for (a, c) in e.terms() {
        assert_eq!(back.coeff(a), c);
    }
}

#[test]
fn wick_exponential_mean_and_variance() {
    let c: BTreeMap<i64, f64> = [(-1, 0.3), (1, 0.4)].into_iter().collect();
    let e = wick_exponential(&c, 12).unwrap();
    let (mean, var) = e.mean_variance().unwrap();
    assert_eq!(mean, 1.0);
    // Var :exp: = e^{|c|^2} - 1
    assert!((var - (0.25f64.exp() - 1.0)).abs() < 1e-10);
}

proptest! {
    #[test]
    fn recurrence_holds(n in 1usize..50, x in -10.0f64..10.0) {
        let (a, b, c) = (hermite_eval(n + 1, x).unwrap(), hermite_eval(n, x).unwrap(), hermite_eval(n - 1, x).unwrap());
        let scale = (x * b).abs() + n as f64 * c.abs();
        prop_assert!((a - (x * b - n as f64 * c)).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn explicit_sum_agrees(n in 0usize..=10, x in -10i32..=10) {
        prop_assert_eq!(hermite_eval(n, x as f64).unwrap(), hermite_sum(n, x as f64));
    }

    #[test]
    fn parametrised_scaling(n in 0usize..12, alpha in 0.05f64..4.0, x in -5.0f64..5.0) {
        // h_n^[α](x) = α^{n/2} h_n(x/√α)
        let lhs = hermite_param_eval(n, alpha, x).unwrap();
        let rhs = alpha.powf(n as f64 / 2.0) * hermite_eval(n, x / alpha.sqrt()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn multiindex_text_round_trip(pairs in prop::collection::btree_map(-20i64..20, 1u32..4, 0..4)) {
        let a = MultiIndex::from_pairs(pairs.clone());
        let b: MultiIndex = a.to_string().parse().unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.order(), pairs.values().sum::<u32>());
    }

    #[test]
    fn wick_square_is_square(r in coeffs(), draws in prop::collection::vec(-3.0f64..3.0, 12)) {
        let var: f64 = r.values().map(|v| v * v).sum();
        let e = wick_square(&r, var);
        let z: BTreeMap<i64, f64> = (-6i64..6).zip(draws).collect();
        let lin: f64 = r.iter().map(|(j, c)| c * z[j]).sum();
        let v = e.eval_map(&z).unwrap();
        prop_assert!((v - lin * lin).abs() <= 1e-10 * (lin * lin).max(var));
    }

    #[test]
    fn conditioning_is_a_projection(r in coeffs(), cut in -6i64..6) {
        let var: f64 = r.values().map(|v| v * v).sum();
        let e = wick_square(&r, var);
        let past = PastSet::UpTo(cut);
        let once = e.condition(&past);
        let twice = once.condition(&past);
        prop_assert_eq!(once.len(), twice.len());
        for (a, c) in once.terms() {
            prop_assert_eq!(twice.coeff(a), c);
        }
        let (_, v_full) = e.mean_variance().unwrap();
        let (_, v_cond) = once.mean_variance().unwrap();
        prop_assert!(v_cond <= v_full + 1e-14);
    }
}
