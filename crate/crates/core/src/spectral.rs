//! Spectral measure of fBm, its outer factor, the Laguerre frequency basis
//! and inner products in `L_Δ`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, Estimate, HalfLineIntegrand, QuadratureSpec, TailTerm};
pub use crate::special::gamma_fn;
use crate::special::gamma_unchecked;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// fBm spectral model: `dΔ = C_H |γ|^{1-2H} dγ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    hurst: f64,
    c_h: f64,
}

impl SpectralModel {
    pub fn new(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::domain(format!("Hurst parameter {hurst} outside (0, 1)")));
        }
        let c_h = gamma_unchecked(1.0 + 2.0 * hurst) * (PI * hurst).sin() / (2.0 * PI);
        Ok(Self { hurst, c_h })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    /// Exponent `1 - 2H` of the density.
    pub fn density_exponent(&self) -> f64 {
        1.0 - 2.0 * self.hurst
    }

    pub fn density(&self, gamma: f64) -> f64 {
        spectral_density(self, gamma)
    }
}

/// `C_H |γ|^{1-2H}`; at the origin `+∞`, `0` or `C_H` depending on `H`.
pub fn spectral_density(m: &SpectralModel, gamma: f64) -> f64 {
    let e = m.density_exponent();
    if gamma == 0.0 {
        return if e < 0.0 {
            f64::INFINITY
        } else if e > 0.0 {
            0.0
        } else {
            m.c_h
        };
    }
    m.c_h * gamma.abs().powf(e)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Outer factor `h` with `|h|^2 (1+γ^2) = Δ'`.
pub fn outer_h(m: &SpectralModel, gamma: f64) -> Result<Complex64> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::domain(format!("outer_h is singular at γ = {gamma}")));
    }
    let h = m.hurst;
    let phase = PI * (2.0 * h - 1.0) / 4.0 * sign(gamma);
    let modulus = m.c_h.sqrt() * gamma.abs().powf(0.5 - h) / (1.0 + gamma * gamma);
    Ok(Complex64::from_polar(modulus, phase) * Complex64::new(-gamma, 1.0))
}

/// `cis(2n·atan γ) = ((1+iγ)/(1-iγ))^n`.
fn mobius(n: i64, gamma: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * n as f64 * gamma.atan())
}

/// Laguerre frequency basis `e_n(γ) = π^{-1/2} (1-iγ)^{-1} ((1+iγ)/(1-iγ))^n`.
pub fn laguerre_freq(n: i64, gamma: f64) -> Complex64 {
    mobius(n, gamma) / (Complex64::new(1.0, -gamma) * PI.sqrt())
}

/// `ξ̂_n(γ) = e_n(γ) / ((γ+i) conj(h(γ)))`.
pub fn xi_hat(m: &SpectralModel, n: i64, gamma: f64) -> Result<Complex64> {
    let h = outer_h(m, gamma)?;
    Ok(laguerre_freq(n, gamma) / (Complex64::new(gamma, 1.0) * h.conj()))
}

/// Closed form of `ξ̂_n`: `e_{n+1}(γ) (iγ)^{H-1/2} / sqrt(C_H)`.
pub(crate) fn xi_hat_closed(m: &SpectralModel, n: i64, gamma: f64) -> Complex64 {
    let b = m.hurst - 0.5;
    let ipow = Complex64::from_polar(gamma.abs().powf(b), 0.5 * PI * b * sign(gamma));
    laguerre_freq(n + 1, gamma) * ipow / m.c_h.sqrt()
}

/// `½(|t|^{2H} + |s|^{2H} - |t-s|^{2H})`.
pub fn fbm_covariance(m: &SpectralModel, t: f64, s: f64) -> f64 {
    let e = 2.0 * m.hurst;
    0.5 * (t.abs().powf(e) + s.abs().powf(e) - (t - s).abs().powf(e))
}

/// Transform of the indicator of `[0, t]`: `(e^{iγt} - 1)/(iγ)`.
pub fn z_hat(t: f64, gamma: f64) -> Complex64 {
    if gamma == 0.0 {
        return Complex64::new(t, 0.0);
    }
    let s = (0.5 * gamma * t).sin();
    Complex64::new((gamma * t).sin(), 2.0 * s * s) / gamma
}

pub type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Symmetry declared for a [`FrequencyFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// `f(-γ) = conj(f(γ))`
    Hermitian,
    /// `f(-γ) = f(γ)`
    Even,
    None,
}

/// One half line of a frequency function, in the variable `u = |γ| > 0`.
#[derive(Clone)]
pub struct Side {
    pub eval: Evaluator,
    /// `(ω, A)` with `f(u) = Σ e^{iωu} A(u)` for `u >= tail_start`.
    pub tail: Vec<(f64, Evaluator)>,
    /// `|f(u)| ~ u^p` as `u → 0`.
    pub origin_exponent: f64,
    /// `|A(u)| ~ u^{-d}` as `u → ∞`.
    pub decay: f64,
    pub mobius: i64,
    pub tail_start: f64,
}

impl Side {
    /// A side whose large-u behaviour is the evaluator itself, non-oscillatory.
    pub fn smooth(eval: Evaluator, origin_exponent: f64, decay: f64, mobius: i64) -> Self {
        Self { tail: vec![(0.0, eval.clone())], eval, origin_exponent, decay, mobius, tail_start: 0.0 }
    }

    fn mirrored_conj(&self) -> Self {
        let e = self.eval.clone();
        Self {
            eval: Arc::new(move |u| e(u).conj()),
            tail: self
                .tail
                .iter()
                .map(|(w, a)| {
                    let a = a.clone();
                    (-w, Arc::new(move |u: f64| a(u).conj()) as Evaluator)
                })
                .collect(),
            origin_exponent: self.origin_exponent,
            decay: self.decay,
            mobius: -self.mobius,
            tail_start: self.tail_start,
        }
    }
}

/// Function of frequency with the metadata needed to integrate it.
#[derive(Clone)]
pub struct FrequencyFunction {
    name: String,
    symmetry: Symmetry,
    pos: Side,
    neg: Side,
}

impl fmt::Debug for FrequencyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrequencyFunction")
            .field("name", &self.name)
            .field("symmetry", &self.symmetry)
            .field("origin_exponent", &self.pos.origin_exponent)
            .field("decay", &self.pos.decay)
            .finish()
    }
}

impl FrequencyFunction {
    pub fn hermitian(name: impl Into<String>, pos: Side) -> Self {
        let neg = pos.mirrored_conj();
        Self { name: name.into(), symmetry: Symmetry::Hermitian, pos, neg }
    }

    pub fn even(name: impl Into<String>, pos: Side) -> Self {
        Self { name: name.into(), symmetry: Symmetry::Even, neg: pos.clone(), pos }
    }

    /// `neg` is expressed in `u = -γ`.
    pub fn general(name: impl Into<String>, pos: Side, neg: Side) -> Self {
        Self { name: name.into(), symmetry: Symmetry::None, pos, neg }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn positive(&self) -> &Side {
        &self.pos
    }

    pub fn negative(&self) -> &Side {
        &self.neg
    }

    /// Value at `γ`; the origin is excluded and yields NaN.
    pub fn eval(&self, gamma: f64) -> Complex64 {
        if gamma > 0.0 {
            (self.pos.eval)(gamma)
        } else if gamma < 0.0 {
            (self.neg.eval)(-gamma)
        } else {
            Complex64::new(f64::NAN, f64::NAN)
        }
    }

    /// Largest violation of the declared symmetry over `points` (positive).
    pub fn symmetry_defect(&self, points: &[f64]) -> f64 {
        points
            .iter()
            .map(|&g| {
                let a = self.eval(g);
                let b = self.eval(-g);
                match self.symmetry {
                    Symmetry::Hermitian => (b - a.conj()).norm(),
                    Symmetry::Even => (b - a).norm(),
                    Symmetry::None => 0.0,
                }
            })
            .fold(0.0, f64::max)
    }

    /// Transform of the indicator of `[0, t]`.
    pub fn z_t(t: f64) -> Self {
        if t == 0.0 {
            let zero: Evaluator = Arc::new(|_| Complex64::new(0.0, 0.0));
            return Self::hermitian("z_0", Side::smooth(zero, 0.0, 2.0, 0));
        }
        let side = Side {
            eval: Arc::new(move |g| z_hat(t, g)),
            tail: vec![
                (0.0, Arc::new(|g: f64| I / g) as Evaluator),
                (t, Arc::new(|g: f64| -I / g) as Evaluator),
            ],
            origin_exponent: 0.0,
            decay: 1.0,
            mobius: 0,
            tail_start: 0.0,
        };
        Self::hermitian(format!("z_{t}"), side)
    }

    /// Laguerre basis element `e_n`.
    pub fn laguerre(n: i64) -> Self {
        Self::hermitian(format!("e_{n}"), Side::smooth(Arc::new(move |g| laguerre_freq(n, g)), 0.0, 1.0, n))
    }

    /// Basis element `ξ̂_n` of the model.
    pub fn xi_hat(m: &SpectralModel, n: i64) -> Self {
        let m = *m;
        let b = m.hurst - 0.5;
        Self::hermitian(
            format!("xi_{n}"),
            Side::smooth(Arc::new(move |g| xi_hat_closed(&m, n, g)), b, 1.0 - b, n + 1),
        )
    }

    /// `e^{-iγt}`, the kernel of the inverse transform at time `t`.
    pub fn inverse_kernel(t: f64) -> Self {
        let e: Evaluator = Arc::new(move |g| Complex64::from_polar(1.0, -g * t));
        let one: Evaluator = Arc::new(|_| Complex64::new(1.0, 0.0));
        let side = Side {
            eval: e,
            tail: vec![(-t, one)],
            origin_exponent: 0.0,
            decay: 0.0,
            mobius: 0,
            tail_start: 0.0,
        };
        Self::hermitian(format!("exp_{t}"), side)
    }
}

/// Integration weight on the frequency axis.
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    Lebesgue,
    Spectral(&'a SpectralModel),
}

impl Weight<'_> {
    fn exponent(&self) -> f64 {
        match self {
            Weight::Lebesgue => 0.0,
            Weight::Spectral(m) => m.density_exponent(),
        }
    }

    fn constant(&self) -> f64 {
        match self {
            Weight::Lebesgue => 1.0,
            Weight::Spectral(m) => m.c_h,
        }
    }
}

fn side_integral(f: &Side, g: &Side, w: Weight<'_>, q: &QuadratureSpec) -> Result<Estimate> {
    let e = w.exponent();
    let c = w.constant();
    let weight = move |u: f64| if e == 0.0 { c } else { c * u.powf(e) };
    let (fe, ge) = (f.eval.clone(), g.eval.clone());
    let mut groups: Vec<(f64, Vec<(Evaluator, Evaluator)>)> = Vec::new();
    for (wf, af) in &f.tail {
        for (wg, ag) in &g.tail {
            let omega = wf - wg;
            let omega = if omega.abs() < 1e-12 * (wf.abs() + wg.abs()).max(1.0) { 0.0 } else { omega };
            match groups.iter_mut().find(|(o, _)| (o - omega).abs() <= 1e-12 * omega.abs().max(1.0)) {
                Some((_, v)) => v.push((af.clone(), ag.clone())),
                None => groups.push((omega, vec![(af.clone(), ag.clone())])),
            }
        }
    }
    let tail = groups
        .into_iter()
        .map(|(omega, pairs)| TailTerm {
            omega,
            amplitude: Box::new(move |u: f64| pairs.iter().map(|(a, b)| a(u) * b(u).conj()).sum::<Complex64>() * weight(u)),
        })
        .collect();
    let integrand = HalfLineIntegrand {
        eval: Box::new(move |u| fe(u) * ge(u).conj() * weight(u)),
        tail,
        origin_exponent: f.origin_exponent + g.origin_exponent + e,
        tail_decay: f.decay + g.decay - e,
        mobius: f.mobius - g.mobius,
        tail_start: f.tail_start.max(g.tail_start),
    };
    integrate_half_line(&integrand, q)
}

/// `∫ f conj(g) w(γ) dγ` over the real line.
pub fn inner_product(f: &FrequencyFunction, g: &FrequencyFunction, w: Weight<'_>, q: &QuadratureSpec) -> Result<Estimate> {
    q.validate()?;
    let pos = side_integral(&f.pos, &g.pos, w, q)?;
    if f.symmetry == Symmetry::Hermitian && g.symmetry == Symmetry::Hermitian {
        return Ok(Estimate {
            value: Complex64::new(2.0 * pos.value.re, 0.0),
            error: 2.0 * pos.error,
            panels: pos.panels,
        });
    }
    let neg = side_integral(&f.neg, &g.neg, w, q)?;
    Ok(Estimate { value: pos.value + neg.value, error: pos.error + neg.error, panels: pos.panels + neg.panels })
}

/// `(f, g)_Δ = ∫ f conj(g) dΔ`.
pub fn inner_product_delta(
    f: &FrequencyFunction,
    g: &FrequencyFunction,
    m: &SpectralModel,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    inner_product(f, g, Weight::Spectral(m), q)
}

/// `∫ f conj(g) dγ`.
pub fn inner_product_l2(f: &FrequencyFunction, g: &FrequencyFunction, q: &QuadratureSpec) -> Result<Estimate> {
    inner_product(f, g, Weight::Lebesgue, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn normalisation_constant() {
        let m = SpectralModel::new(0.5).unwrap();
        assert!((m.c_h() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let m = SpectralModel::new(0.7).unwrap();
        let expected = gamma_fn(2.4).unwrap() * (0.7 * PI).sin() / (2.0 * PI);
        assert!((m.c_h() - expected).abs() < 1e-14 * expected);
        assert!(SpectralModel::new(1.0).is_err());
        assert!(SpectralModel::new(0.0).is_err());
    }

    #[test]
    fn density_values() {
        let m = SpectralModel::new(0.5).unwrap();
        assert!((spectral_density(&m, 3.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let m7 = SpectralModel::new(0.7).unwrap();
        assert_eq!(spectral_density(&m7, -2.0), spectral_density(&m7, 2.0));
        assert!((spectral_density(&m7, 2.0) - m7.c_h() * 2f64.powf(-0.4)).abs() < 1e-15);
        assert!(spectral_density(&m7, 0.0).is_infinite());
        assert_eq!(spectral_density(&SpectralModel::new(0.3).unwrap(), 0.0), 0.0);
        assert_eq!(spectral_density(&m, 0.0), m.c_h());
    }

    #[test]
    fn factorisation_and_reality() {
        for &h in &[0.2, 0.35, 0.5, 0.7, 0.9] {
            let m = SpectralModel::new(h).unwrap();
            for g in log_grid(200) {
                for &x in &[g, -g] {
                    let o = outer_h(&m, x).unwrap();
                    let lhs = o.norm_sqr() * (1.0 + x * x);
                    let rhs = spectral_density(&m, x);
                    assert!((lhs - rhs).abs() <= 1e-12 * rhs, "H={h} γ={x}");
                }
                let lhs = Complex64::new(-g, -1.0) * outer_h(&m, -g).unwrap();
                let rhs = Complex64::new(g, 1.0) * outer_h(&m, g).unwrap().conj();
                assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
            }
        }
        assert!(outer_h(&SpectralModel::new(0.5).unwrap(), 0.0).is_err());
    }

    #[test]
    fn brownian_outer_factor() {
        let m = SpectralModel::new(0.5).unwrap();
        for &g in &[-3.0, 0.1, 2.0] {
            let expected = Complex64::new(-g, 1.0) / ((1.0 + g * g) * (2.0 * PI).sqrt());
            assert!((outer_h(&m, g).unwrap() - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn laguerre_modulus() {
        assert!((laguerre_freq(0, 0.0).re - 1.0 / PI.sqrt()).abs() < 1e-15);
        for n in -5..5 {
            for &g in &[-2.0, 0.3, 7.0] {
                let v = laguerre_freq(n, g).norm_sqr();
                assert!((v - 1.0 / (PI * (1.0 + g * g))).abs() < 1e-15);
            }
        }
        let q = QuadratureSpec::default();
        let e1 = FrequencyFunction::laguerre(1);
        assert!((inner_product_l2(&e1, &e1, &q).unwrap().re() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn closed_form_matches_definition() {
        for &h in &[0.2, 0.5, 0.7] {
            let m = SpectralModel::new(h).unwrap();
            for n in -3..=3 {
                for &g in &[-5.0, -0.2, 0.01, 1.0, 40.0] {
                    let a = xi_hat(&m, n, g).unwrap();
                    let b = xi_hat_closed(&m, n, g);
                    assert!((a - b).norm() < 1e-12 * b.norm(), "H={h} n={n} γ={g}");
                }
            }
        }
    }

    #[test]
    fn brownian_basis_is_shifted_laguerre() {
        let m = SpectralModel::new(0.5).unwrap();
        for n in -3..=3 {
            for &g in &[-4.0, 0.5, 3.0] {
                let ratio = xi_hat(&m, n, g).unwrap() / laguerre_freq(n + 1, g);
                assert!((ratio - Complex64::new((2.0 * PI).sqrt(), 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hermitian_tags_hold() {
        let m = SpectralModel::new(0.7).unwrap();
        let pts = log_grid(50);
        assert!(FrequencyFunction::xi_hat(&m, -2).symmetry_defect(&pts) < 1e-12);
        assert!(FrequencyFunction::z_t(1.3).symmetry_defect(&pts) < 1e-12);
        for &g in &pts {
            let direct = z_hat(1.3, -g);
            assert!((direct - z_hat(1.3, g).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn covariance_closed_form() {
        let m = SpectralModel::new(0.7).unwrap();
        assert_eq!(fbm_covariance(&m, 0.0, 2.0), 0.0);
        assert!((fbm_covariance(&m, 1.0, -1.0) - (1.0 - 2f64.powf(0.4))).abs() < 1e-15);
        assert!((fbm_covariance(&m, 1.0, -1.0) + 0.3195).abs() < 1e-4);
        let b = SpectralModel::new(0.5).unwrap();
        assert_eq!(fbm_covariance(&b, 1.0, -1.0), 0.0);
    }

    #[test]
    fn covariance_from_spectral_inner_product() {
        let m = SpectralModel::new(0.7).unwrap();
        let q = QuadratureSpec::default();
        for &(t, s) in &[(1.0, 1.0), (1.0, -1.0), (2.0, 0.5)] {
            let v = inner_product_delta(&FrequencyFunction::z_t(t), &FrequencyFunction::z_t(s), &m, &q).unwrap();
            assert!((v.re() - fbm_covariance(&m, t, s)).abs() < 1e-6, "({t},{s}) {}", v.re());
        }
        let b = SpectralModel::new(0.5).unwrap();
        let z1 = FrequencyFunction::z_t(1.0);
        assert!((inner_product_delta(&z1, &z1, &b, &q).unwrap().re() - 1.0).abs() < 1e-7);
    }
}
