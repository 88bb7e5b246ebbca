//! Chaos coefficients of fBm, the past/future split of the basis and the
//! prediction error.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermite::{wick_square, ChaosExpansion, MultiIndex, PastSet};
use crate::quadrature::{integrate_half_line, HalfLineIntegrand, QuadratureSpec, TailTerm};
use crate::special::gamma_unchecked;
use crate::spectral::{z_hat, SpectralModel};

pub const PROBE_TIMES: [f64; 5] = [-0.25, -0.5, -1.0, -2.0, -4.0];
pub const PAST_THRESHOLD: f64 = 1e-3;
pub const FUTURE_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_WINDOW: (i64, i64) = (-512, 512);
/// Indices scanned by [`past_boundary`].
pub const BOUNDARY_SCAN: (i64, i64) = (-8, 8);

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `r_j(t) = (1_t, ξ_j)_Δ` with its quadrature error bound.
pub fn coeff_r(m: &SpectralModel, j: i64, t: f64, q: &QuadratureSpec) -> Result<(f64, f64)> {
    q.validate()?;
    if !t.is_finite() {
        return Err(Error::domain("coefficient time must be finite"));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let a = 0.5 - m.hurst();
    let scale = 2.0 * (m.c_h() / PI).sqrt();
    let order = j + 1;
    // 2 sqrt(C_H/π) (iγ)^a ((1-iγ)/(1+iγ))^{j+1} / (1+iγ)
    let kernel = move |g: f64| {
        let phase = 0.5 * PI * a - 2.0 * order as f64 * g.atan();
        Complex64::from_polar(scale * g.powf(a), phase) / Complex64::new(1.0, g)
    };
    let integrand = HalfLineIntegrand {
        eval: Box::new(move |g| z_hat(t, g) * kernel(g)),
        tail: vec![
            TailTerm { omega: 0.0, amplitude: Box::new(move |g| I * kernel(g) / g) },
            TailTerm { omega: t, amplitude: Box::new(move |g| -I * kernel(g) / g) },
        ],
        origin_exponent: a,
        tail_decay: 2.0 - a,
        mobius: -order,
        tail_start: 0.0,
    };
    let est = integrate_half_line(&integrand, q).map_err(|e| annotate(e, j, t))?;
    Ok((est.re(), est.error))
}

fn annotate(e: Error, j: i64, t: f64) -> Error {
    match e {
        Error::Numerical { context, detail, estimate, error, panels } => Error::Numerical {
            context: format!("coeff_r(j={j}, t={t}): {context}"),
            detail,
            estimate,
            error,
            panels,
        },
        other => other,
    }
}

/// Largest normalised correlation `|E[I(ξ_j) X(s)]| / |s|^H` over the probe times.
pub fn past_correlation(m: &SpectralModel, j: i64, q: &QuadratureSpec) -> Result<f64> {
    let mut best: f64 = 0.0;
    for &s in &PROBE_TIMES {
        let (r, _) = coeff_r(m, j, s, q)?;
        best = best.max(r.abs() / s.abs().powf(m.hurst()));
    }
    Ok(best)
}

/// Whether `ξ_j` is measurable with respect to the past, decided by its
/// correlation with past values of the process.
pub fn classify_past(m: &SpectralModel, j: i64, q: &QuadratureSpec) -> Result<bool> {
    let c = past_correlation(m, j, q)?;
    if c > PAST_THRESHOLD {
        Ok(true)
    } else if c < FUTURE_THRESHOLD {
        Ok(false)
    } else {
        Err(Error::Numerical {
            context: format!("classify_past(j={j})"),
            detail: "correlation with the past falls between the thresholds; tighten the quadrature".into(),
            estimate: c,
            error: f64::NAN,
            panels: 0,
        })
    }
}

/// Boundary `j*` with past = `{j <= j*}`, checked to be a half line over the
/// scan window.
pub fn past_boundary(m: &SpectralModel, q: &QuadratureSpec) -> Result<i64> {
    let (lo, hi) = BOUNDARY_SCAN;
    let classes: Vec<bool> = (lo..=hi)
        .into_par_iter()
        .map(|j| classify_past(m, j, q))
        .collect::<Result<_>>()?;
    let boundary = classes.iter().take_while(|&&p| p).count();
    if boundary == 0 || boundary == classes.len() || classes[boundary..].iter().any(|&p| p) {
        return Err(Error::Numerical {
            context: "past_boundary".into(),
            detail: format!("classification over [{lo}, {hi}] is not a half line: {classes:?}"),
            estimate: f64::NAN,
            error: f64::NAN,
            panels: 0,
        });
    }
    Ok(lo + boundary as i64 - 1)
}

/// Coefficients `r_j(t)` over an index window with their past/future class.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub hurst: f64,
    pub t: f64,
    pub j_min: i64,
    pub j_max: i64,
    pub r: Vec<f64>,
    pub abs_err: Vec<f64>,
    /// Past indices are `j <= boundary`.
    pub boundary: i64,
}

impl CoefficientTable {
    pub fn past_set(&self) -> PastSet {
        PastSet::UpTo(self.boundary)
    }

    pub fn is_past(&self, j: i64) -> bool {
        j <= self.boundary
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.j_min..=self.j_max
    }

    pub fn get(&self, j: i64) -> Option<f64> {
        if j < self.j_min || j > self.j_max {
            return None;
        }
        Some(self.r[(j - self.j_min) as usize])
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, f64, f64, bool)> + '_ {
        self.indices()
            .zip(self.r.iter().zip(&self.abs_err))
            .map(|(j, (&r, &e))| (j, r, e, self.is_past(j)))
    }

    pub fn total_energy(&self) -> f64 {
        self.r.iter().map(|r| r * r).sum()
    }

    pub fn past_energy(&self) -> f64 {
        self.entries().filter(|e| e.3).map(|e| e.1 * e.1).sum()
    }

    pub fn future_energy(&self) -> f64 {
        self.entries().filter(|e| !e.3).map(|e| e.1 * e.1).sum()
    }

    pub fn past_indices(&self) -> Vec<i64> {
        self.indices().filter(|&j| self.is_past(j)).collect()
    }

    pub fn coefficient_map(&self) -> BTreeMap<i64, f64> {
        self.indices().zip(self.r.iter().copied()).collect()
    }

    /// CSV with header `j,r,abs_err,class`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,r,abs_err,class\n");
        for (j, r, e, past) in self.entries() {
            let class = if past { "past" } else { "future" };
            let _ = writeln!(out, "{j},{r:.16e},{e:.16e},{class}");
        }
        out
    }
}

/// Table of `r_j(t)` for `j_min..=j_max`, classified by [`past_boundary`].
pub fn coeff_table(m: &SpectralModel, t: f64, j_min: i64, j_max: i64, q: &QuadratureSpec) -> Result<CoefficientTable> {
    let boundary = past_boundary(m, q)?;
    coeff_table_with_boundary(m, t, j_min, j_max, boundary, q)
}

pub fn coeff_table_with_boundary(
    m: &SpectralModel,
    t: f64,
    j_min: i64,
    j_max: i64,
    boundary: i64,
    q: &QuadratureSpec,
) -> Result<CoefficientTable> {
    if j_min > j_max {
        return Err(Error::domain(format!("empty index window [{j_min}, {j_max}]")));
    }
    let pairs: Vec<(f64, f64)> = (j_min..=j_max)
        .into_par_iter()
        .map(|j| coeff_r(m, j, t, q))
        .collect::<Result<_>>()?;
    let (r, abs_err) = pairs.into_iter().unzip();
    let tbl = CoefficientTable { hurst: m.hurst(), t, j_min, j_max, r, abs_err, boundary };
    let var = t.abs().powf(2.0 * m.hurst());
    if tbl.total_energy() > var * (1.0 + 1e-6) + 1e-9 {
        log::warn!("coefficient energy {} exceeds the variance {var}", tbl.total_energy());
    }
    Ok(tbl)
}

/// Energy of the future-class coefficients, the truncated prediction error.
pub fn error_variance_truncated(tbl: &CoefficientTable) -> f64 {
    tbl.future_energy()
}

/// Closed-form prediction error variance of `B_H(t)` given the past.
pub fn exact_error(m: &SpectralModel, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("exact_error needs t >= 0, got {t}")));
    }
    let h = m.hurst();
    let x = PI * (h - 0.5);
    let sinc = if x.abs() < 1e-6 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    let g = gamma_unchecked(1.5 - h);
    Ok(sinc * g * g / gamma_unchecked(2.0 - 2.0 * h) * t.powf(2.0 * h))
}

/// Predictor and conditional second moment as chaos expansions.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionResult {
    /// First-order expansion `Σ_{past} r_j H_{ε_j}`.
    pub predictor: ChaosExpansion,
    /// `E[B_H(t)^2 | past]`.
    pub conditional_square: ChaosExpansion,
    pub predictor_variance: f64,
    /// `|t|^{2H}` minus the predictor variance.
    pub residual_variance: f64,
    /// Future-class energy in the window.
    pub truncated_error: f64,
    pub exact_error: f64,
}

/// `(predictor, E[B_H(t)^2 | past])` from a coefficient table.
pub fn conditional_expansions_from_table(tbl: &CoefficientTable) -> Result<(ChaosExpansion, ChaosExpansion)> {
    let mut predictor = ChaosExpansion::new(tbl.j_min, tbl.j_max)?;
    for (j, r, _, past) in tbl.entries() {
        if past {
            predictor.add_term(MultiIndex::unit(j), r)?;
        }
    }
    let var = tbl.t.abs().powf(2.0 * tbl.hurst);
    let square = wick_square(&tbl.coefficient_map(), var).condition(&tbl.past_set());
    Ok((predictor, square))
}

pub fn conditional_expansions(
    m: &SpectralModel,
    t: f64,
    window: (i64, i64),
    q: &QuadratureSpec,
) -> Result<(ChaosExpansion, ChaosExpansion)> {
    let tbl = coeff_table(m, t, window.0, window.1, q)?;
    conditional_expansions_from_table(&tbl)
}

pub fn predict(m: &SpectralModel, t: f64, window: (i64, i64), q: &QuadratureSpec) -> Result<PredictionResult> {
    let tbl = coeff_table(m, t, window.0, window.1, q)?;
    prediction_from_table(m, &tbl)
}

pub fn prediction_from_table(m: &SpectralModel, tbl: &CoefficientTable) -> Result<PredictionResult> {
    let (predictor, conditional_square) = conditional_expansions_from_table(tbl)?;
    let (_, predictor_variance) = predictor.mean_variance()?;
    let var = tbl.t.abs().powf(2.0 * tbl.hurst);
    Ok(PredictionResult {
        predictor,
        conditional_square,
        predictor_variance,
        residual_variance: var - predictor_variance,
        truncated_error: error_variance_truncated(tbl),
        exact_error: exact_error(m, tbl.t.abs())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_error_values() {
        let m = SpectralModel::new(0.7).unwrap();
        let v = exact_error(&m, 1.0).unwrap();
        let oracle = (0.2 * PI).sin() * gamma_unchecked(0.8).powi(2) / (0.2 * PI * gamma_unchecked(0.6));
        assert!((v - oracle).abs() < 1e-14);
        assert!((v - 0.8515).abs() < 1e-3);
        assert!((exact_error(&m, 2.0).unwrap() - 2f64.powf(1.4) * v).abs() < 1e-12);
        let b = SpectralModel::new(0.5).unwrap();
        assert!((exact_error(&b, 1.7).unwrap() - 1.7).abs() < 1e-14);
        assert!(exact_error(&m, -1.0).is_err());
    }

    #[test]
    fn zero_time_gives_zero() {
        let m = SpectralModel::new(0.3).unwrap();
        assert_eq!(coeff_r(&m, 4, 0.0, &QuadratureSpec::default()).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn csv_header_and_rows() {
        let tbl = CoefficientTable {
            hurst: 0.5,
            t: 1.0,
            j_min: -1,
            j_max: 0,
            r: vec![0.25, -0.5],
            abs_err: vec![1e-9, 2e-9],
            boundary: -1,
        };
        let csv = tbl.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "j,r,abs_err,class");
        assert!(lines[1].starts_with("-1,2.5000000000000000e-1,") && lines[1].ends_with(",past"));
        assert!(lines[2].ends_with(",future"));
        assert_eq!(tbl.past_energy(), 0.0625);
        assert_eq!(error_variance_truncated(&tbl), 0.25);
    }
}
