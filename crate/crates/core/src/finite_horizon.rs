//! Basis for observations on a bounded window `[-T, T]`: the Bessel kernel
//! `S_T` sampled at the zeros of `J_{1-H}`.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
pub use crate::special::{bessel_j, bessel_zeros, BesselOrder};
use crate::special::{bessel_j_unchecked, gamma_unchecked, hankel1_scaled, HANKEL_RANGE};
use crate::quadrature::QuadratureSpec;
use crate::spectral::{inner_product_delta, Evaluator, FrequencyFunction, Side, SpectralModel};

/// Relative gap below which the diagonal formula is used.
pub const DIAGONAL_SWITCH: f64 = 1e-8;
pub const MAX_BASIS: usize = 20;

/// `A(x) = (x/2)^H J_{-H}(x)`, even and entire.
fn big_a(h: f64, x: f64) -> f64 {
    let y = x.abs();
    if y == 0.0 {
        return 1.0 / gamma_unchecked(1.0 - h);
    }
    (0.5 * y).powf(h) * bessel_j_unchecked(-h, y)
}

/// `B(x) = (x/2)^H J_{1-H}(x)`, odd and entire.
fn big_b(h: f64, x: f64) -> f64 {
    let y = x.abs();
    if y == 0.0 {
        return 0.0;
    }
    x.signum() * (0.5 * y).powf(h) * bessel_j_unchecked(1.0 - h, y)
}

fn prefactor(h: f64) -> f64 {
    let g = gamma_unchecked(1.0 - h);
    (2.0 - 2.0 * h) * g * g
}

/// Reproducing kernel `S_T(a, b)`, normalised so that `S_T(0, 0) = 1`.
pub fn kernel_s(m: &SpectralModel, horizon: f64, a: f64, b: f64) -> Result<Complex64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon {horizon} must be positive")));
    }
    Ok(kernel_unchecked(m.hurst(), horizon, a, b))
}

fn kernel_unchecked(h: f64, horizon: f64, a: f64, b: f64) -> Complex64 {
    let k = prefactor(h);
    let xa = 0.5 * horizon * a;
    let xb = 0.5 * horizon * b;
    if (b - a).abs() < DIAGONAL_SWITCH * b.abs().max(1.0) {
        let x = 0.5 * (xa + xb);
        if x == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let (ax, bx) = (big_a(h, x), big_b(h, x));
        let v = k * (ax * ax + bx * bx + (2.0 * h - 1.0) / x * ax * bx);
        return Complex64::from_polar(1.0, xb - xa) * v;
    }
    let num = big_a(h, xa) * big_b(h, xb) - big_b(h, xa) * big_a(h, xb);
    Complex64::from_polar(k * num / (xb - xa), xb - xa)
}

/// `S_T(a, ·)` with its oscillatory large-|b| decomposition.
pub fn kernel_function(m: &SpectralModel, horizon: f64, a: f64) -> Result<FrequencyFunction> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon {horizon} must be positive")));
    }
    let h = m.hurst();
    let t = horizon;
    let k = prefactor(h);
    let xa = 0.5 * t * a;
    let (aa, ba) = (big_a(h, xa), big_b(h, xa));
    let front = Complex64::from_polar(k, -xa);
    // A(x) = e^{ix} α(x) + e^{-ix} conj α(x), likewise B with β.
    let alpha = move |x: f64| hankel1_scaled(-h, x) * (0.5 * (0.5 * x).powf(h));
    let beta = move |x: f64| hankel1_scaled(1.0 - h, x) * (0.5 * (0.5 * x).powf(h));
    let tail_start = 2.0 * HANKEL_RANGE / t + 2.0 * a.abs();

    let pos_osc: Evaluator = Arc::new(move |u| {
        let x = 0.5 * t * u;
        front * (beta(x) * aa - alpha(x) * ba) / (x - xa)
    });
    let pos_flat: Evaluator = Arc::new(move |u| {
        let x = 0.5 * t * u;
        front * (beta(x).conj() * aa - alpha(x).conj() * ba) / (x - xa)
    });
    let neg_flat: Evaluator = Arc::new(move |u| {
        let y = 0.5 * t * u;
        front * (beta(y) * aa + alpha(y) * ba) / (y + xa)
    });
    let neg_osc: Evaluator = Arc::new(move |u| {
        let y = 0.5 * t * u;
        front * (beta(y).conj() * aa + alpha(y).conj() * ba) / (y + xa)
    });
    let decay = 1.5 - h;
    let pos = Side {
        eval: Arc::new(move |u| kernel_unchecked(h, t, a, u)),
        tail: vec![(t, pos_osc), (0.0, pos_flat)],
        origin_exponent: 0.0,
        decay,
        mobius: 0,
        tail_start,
    };
    let neg = Side {
        eval: Arc::new(move |u| kernel_unchecked(h, t, a, -u)),
        tail: vec![(0.0, neg_flat), (-t, neg_osc)],
        origin_exponent: 0.0,
        decay,
        mobius: 0,
        tail_start,
    };
    Ok(FrequencyFunction::general(format!("S_{t}({a}, .)"), pos, neg))
}

/// Kernel basis at the points `2γ_n/T`.
#[derive(Debug, Clone)]
pub struct HorizonBasis {
    pub hurst: f64,
    pub horizon: f64,
    /// Zeros of `J_{1-H}` (with 0 first when included).
    pub zeros: Vec<f64>,
    pub points: Vec<f64>,
    pub norms: Vec<f64>,
}

impl HorizonBasis {
    pub fn new(m: &SpectralModel, horizon: f64, count: usize, include_zero: bool, q: &QuadratureSpec) -> Result<Self> {
        if count == 0 || count > MAX_BASIS {
            return Err(Error::domain(format!("basis size {count} outside 1..={MAX_BASIS}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("horizon {horizon} must be positive")));
        }
        let order = BesselOrder::new(1.0 - m.hurst())?;
        let mut zeros = Vec::with_capacity(count);
        if include_zero {
            zeros.push(0.0);
        }
        let need = count - zeros.len();
        if need > 0 {
            zeros.extend(bessel_zeros(order, need)?);
        }
        let points: Vec<f64> = zeros.iter().map(|z| 2.0 * z / horizon).collect();
        let norms = points
            .par_iter()
            .map(|&a| {
                let f = kernel_function(m, horizon, a)?;
                Ok(inner_product_delta(&f, &f, m, q)?.re().sqrt())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { hurst: m.hurst(), horizon, zeros, points, norms })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Normalised basis element `S_T(a_n, γ) / ‖S_T(a_n, ·)‖_Δ`.
    pub fn eval(&self, n: usize, gamma: f64) -> Complex64 {
        kernel_unchecked(self.hurst, self.horizon, self.points[n], gamma) / self.norms[n]
    }

    /// CSV with header `n,zero,point,norm`.
    pub fn zeros_csv(&self) -> String {
        let mut out = String::from("n,zero,point,norm\n");
        for (n, ((z, p), s)) in self.zeros.iter().zip(&self.points).zip(&self.norms).enumerate() {
            let _ = writeln!(out, "{n},{z:.16e},{p:.16e},{s:.16e}");
        }
        out
    }
}

/// Gram matrix of the normalised kernel basis under `dΔ`; the diagonal is 1
/// by construction.
pub fn fh_basis_gram(m: &SpectralModel, horizon: f64, count: usize, q: &QuadratureSpec) -> Result<Vec<Vec<f64>>> {
    let basis = HorizonBasis::new(m, horizon, count, false, q)?;
    gram_of(m, &basis, q)
}

pub fn gram_of(m: &SpectralModel, basis: &HorizonBasis, q: &QuadratureSpec) -> Result<Vec<Vec<f64>>> {
    let n = basis.len();
    let funcs: Vec<FrequencyFunction> = basis
        .points
        .iter()
        .map(|&a| kernel_function(m, basis.horizon, a))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let v = inner_product_delta(&funcs[i], &funcs[j], m, q)?;
            Ok(v.re() / (basis.norms[i] * basis.norms[j]))
        })
        .collect::<Result<_>>()?;
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        g[i][i] = 1.0;
    }
    for (&(i, j), v) in pairs.iter().zip(values) {
        g[i][j] = v;
        g[j][i] = v;
    }
    Ok(g)
}

/// CSV with header `i,j,value`.
pub fn gram_csv(g: &[Vec<f64>]) -> String {
    let mut out = String::from("i,j,value\n");
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let _ = writeln!(out, "{i},{j},{v:.16e}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_at_origin_is_one() {
        for &h in &[0.2, 0.5, 0.7] {
            let m = SpectralModel::new(h).unwrap();
            assert!((kernel_s(&m, 1.0, 0.0, 0.0).unwrap() - 1.0).norm() < 1e-15);
            let near = kernel_s(&m, 1.0, 0.0, 1e-6).unwrap();
            assert!((near - 1.0).norm() < 1e-5, "H={h} {near}");
        }
        assert!(kernel_s(&SpectralModel::new(0.5).unwrap(), 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn derivative_identities() {
        // A' = -B and B' = A + (2H-1)/x B, by central differences.
        let h = 0.7;
        for &x in &[0.4, 3.0, 11.0, 30.0] {
            let d = 1e-5;
            let da = (big_a(h, x + d) - big_a(h, x - d)) / (2.0 * d);
            let db = (big_b(h, x + d) - big_b(h, x - d)) / (2.0 * d);
            assert!((da + big_b(h, x)).abs() < 1e-7);
            assert!((db - big_a(h, x) - (2.0 * h - 1.0) / x * big_b(h, x)).abs() < 1e-7);
        }
    }

    #[test]
    fn brownian_kernel_is_sinc() {
        let m = SpectralModel::new(0.5).unwrap();
        for &(a, b) in &[(0.3f64, 2.0f64), (-1.0, 4.5), (6.0, -7.0)] {
            let d = 0.5 * (b - a);
            let expected = Complex64::from_polar(d.sin() / d, d);
            assert!((kernel_s(&m, 1.0, a, b).unwrap() - expected).norm() < 1e-12);
        }
    }
}
