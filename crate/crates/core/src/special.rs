//! Gamma and Bessel functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler's Gamma function (Lanczos approximation, reflection below 1/2).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("gamma of NaN"));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        a += p / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // t^(x+1/2) split in two halves so that x up to ~171 does not overflow early.
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * a
}

/// Admissible Bessel order, `ν ∈ (-1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > -1.0 && nu < 2.0) {
            return Err(Error::domain(format!("Bessel order {nu} outside (-1, 2)")));
        }
        Ok(Self(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Bessel function of the first kind `J_ν(x)` for `x >= 0`.
///
/// Power series below 8, Miller's backward recurrence on [8, 25) and the
/// Hankel asymptotic expansion beyond.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("bessel_j needs x >= 0, got {x}")));
    }
    Ok(bessel_j_unchecked(order.0, x))
}

pub(crate) fn bessel_j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x < SERIES_LIMIT {
        bessel_series(nu, x)
    } else if x < ASYMPTOTIC_LIMIT {
        bessel_miller(nu, x)
    } else {
        let (p, q) = hankel_pq(nu, x);
        let chi = x - (0.5 * nu + 0.25) * PI;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

fn bessel_series(nu: f64, x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = (0.5 * x).powf(nu) / gamma_unchecked(nu + 1.0);
    let mut sum = term;
    for k in 1..300 {
        term *= -y / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn bessel_miller(nu: f64, x: f64) -> f64 {
    let base = nu - nu.floor();
    let shift = nu.floor() as i64; // -1, 0 or 1
    let top = (x.ceil() as usize) + 40;
    // f[k + 1] holds the unnormalised J_{base + k} for k = -1..=top.
    let mut f = vec![0.0; top + 3];
    f[top + 2] = 0.0;
    f[top + 1] = 1e-30;
    for k in (0..=top).rev() {
        let mu = base + k as f64;
        f[k] = 2.0 * mu / x * f[k + 1] - f[k + 2];
        if f[k].abs() > 1e250 {
            for v in f[k..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // (x/2)^base = Γ(base+1) J_base + Σ_{k>=1} (base+2k) Γ(base+k)/k! J_{base+2k}
    let mut g = gamma_unchecked(base + 1.0);
    let mut norm = g * f[1];
    let mut k = 1usize;
    while 2 * k < top {
        if k > 1 {
            g *= (base + k as f64 - 1.0) / k as f64;
        }
        norm += (base + 2.0 * k as f64) * g * f[1 + 2 * k];
        k += 1;
    }
    let scale = (0.5 * x).powf(base) / norm;
    f[(shift + 1) as usize] * scale
}

/// Hankel asymptotic series `(P, Q)` with `J_ν = sqrt(2/πx)(P cos χ − Q sin χ)`.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    (p, q)
}

/// `H¹_ν(x)·e^{-ix}` from the asymptotic expansion, valid for large `x`.
pub(crate) fn hankel1_scaled(nu: f64, x: f64) -> Complex64 {
    let (p, q) = hankel_pq(nu, x);
    let phase = Complex64::from_polar(1.0, -(0.5 * nu + 0.25) * PI);
    (2.0 / (PI * x)).sqrt() * phase * Complex64::new(p, q)
}

pub(crate) const HANKEL_RANGE: f64 = ASYMPTOTIC_LIMIT;

/// First `count` positive zeros of `J_ν`, increasing.
pub fn bessel_zeros(order: BesselOrder, count: usize) -> Result<Vec<f64>> {
    if count == 0 || count > 200 {
        return Err(Error::domain(format!("zero count {count} outside 1..=200")));
    }
    let nu = order.0;
    let f = |x: f64| bessel_j_unchecked(nu, x);
    let step = 0.1;
    let mut zeros = Vec::with_capacity(count);
    let mut a = 1e-6;
    let mut fa = f(a);
    while zeros.len() < count {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(brent(f, a, b, 1e-14)?);
        }
        a = b;
        fa = fb;
        if a > 2000.0 {
            return Err(Error::numerical("bessel_zeros", "zero bracketing ran past x = 2000"));
        }
    }
    Ok(zeros)
}

/// Brent's root finder on a sign-changing bracket.
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa * fb > 0.0 {
        return Err(Error::numerical("brent", format!("no sign change on [{a}, {b}]")));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < tol * b.abs().max(1.0) {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let between = if lo < b { s > lo && s < b } else { s > b && s < lo };
        if !between
            || (bisected && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!bisected && (s - b).abs() >= (c - d).abs() / 2.0)
            || (bisected && (b - c).abs() < tol)
            || (!bisected && (c - d).abs() < tol)
        {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Err(Error::numerical("brent", "no convergence in 200 iterations"))
}
