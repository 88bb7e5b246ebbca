//! At H = 1/2 the basis kernels are Laguerre functions in time, so every
//! coefficient and kernel has an elementary closed form.

use std::f64::consts::PI;

use fbm_chaos::prediction::{coeff_r, coeff_table_with_boundary, exact_error, past_boundary};
use fbm_chaos::simulate::{xi_time, xi_time_point, Grid};
use fbm_chaos::spectral::{laguerre_freq, xi_hat};
use fbm_chaos::{QuadratureSpec, SpectralModel};

fn laguerre(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 1.0 - x);
    if k == 0 {
        return a;
    }
    for n in 1..k {
        let c = ((2 * n + 1) as f64 - x) * b / (n + 1) as f64 - n as f64 * a / (n + 1) as f64;
        a = b;
        b = c;
    }
    b
}

/// `(-1)^k √2 e^{-|s|} L_k(2|s|)` on the half line selected by the index.
fn brownian_kernel(n: i64, s: f64) -> f64 {
    let (k, side) = if n >= -1 { ((n + 1) as usize, s > 0.0) } else { ((-n - 2) as usize, s < 0.0) };
    if !side {
        return 0.0;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * 2f64.sqrt() * (-s.abs()).exp() * laguerre(k, 2.0 * s.abs())
}

/// Composite Simpson on `[a, b]`, with the endpoints nudged inward so the
/// one-sided limits are used at the jump of the kernels at 0.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let f = |s: f64| f(s.clamp(a + 1e-13, b - 1e-13));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn bm() -> SpectralModel {
    SpectralModel::new(0.5).unwrap()
}

#[test]
fn frequency_basis_is_scaled_laguerre() {
    let m = bm();
    for n in -4..=4 {
        for &g in &[-7.0, -0.3, 0.01, 1.0, 12.0] {
            let a = xi_hat(&m, n, g).unwrap();
            let b = laguerre_freq(n + 1, g) * (2.0 * PI).sqrt();
            assert!((a - b).norm() < 1e-12, "n={n} γ={g}");
        }
    }
}

#[test]
fn pointwise_kernels() {
    let q = QuadratureSpec::default();
    let m = bm();
    for n in -4..=3 {
        for &s in &[-2.0, -0.7, -0.1, 0.15, 0.9, 3.0] {
            let v = xi_time_point(&m, n, s, &q).unwrap();
            let e = brownian_kernel(n, s);
            assert!((v - e).abs() < 1e-6, "n={n} s={s}: {v} vs {e}");
        }
    }
}

#[test]
fn coefficients_are_kernel_integrals() {
    // B(t) = ∫_0^t dW, so r_j(t) = ∫_0^t ξ_j(s) ds.
    let q = QuadratureSpec::default();
    let m = bm();
    for &t in &[-1.5, 0.5, 1.0, 2.0] {
        for j in -5..=5 {
            let (r, err) = coeff_r(&m, j, t, &q).unwrap();
            let (a, b) = if t > 0.0 { (0.0, t) } else { (t, 0.0) };
            let oracle = t.signum() * simpson(|s| brownian_kernel(j, s), a, b, 4000);
            assert!((r - oracle).abs() < 1e-7 + err, "j={j} t={t}: {r} vs {oracle}");
        }
    }
    let (r, _) = coeff_r(&m, -1, 1.0, &q).unwrap();
    assert!((r - 2f64.sqrt() * (1.0 - (-1.0f64).exp())).abs() < 1e-9);
}

#[test]
fn cell_averaged_kernels() {
    let q = QuadratureSpec::default();
    let m = bm();
    let grid = Grid::symmetric(4.0, 64).unwrap();
    for n in [-3, -2, -1, 0, 2] {
        let k = xi_time(&m, n, &grid, &q).unwrap();
        for (c, v) in k.values.iter().enumerate() {
            let (a, b) = (grid.t(c), grid.t(c + 1));
            let avg = simpson(|s| brownian_kernel(n, s), a, b, 200) / (b - a);
            assert!((v - avg).abs() < 1e-4, "n={n} cell {c}: {v} vs {avg}");
        }
    }
}

#[test]
fn brownian_split_is_exact() {
    // Future coefficients carry all of Var B(1) = 1 and the predictor is 0.
    let q = QuadratureSpec::default();
    let m = bm();
    assert!((exact_error(&m, 1.0).unwrap() - 1.0).abs() < 1e-14);
    let j_star = past_boundary(&m, &q).unwrap();
    let tbl = coeff_table_with_boundary(&m, 1.0, -64, 64, j_star, &q).unwrap();
    assert!(tbl.past_energy() < 1e-20);
    // Σ_{k≤64} over the closed-form coefficients, via Parseval in time.
    let kept: f64 = (-1..=64).map(|j| simpson(|s| brownian_kernel(j, s), 0.0, 1.0, 2000).powi(2)).sum();
    assert!((tbl.future_energy() - kept).abs() < 1e-6);
}
