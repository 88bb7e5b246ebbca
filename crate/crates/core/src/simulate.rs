//! Exact fBm sampling, time-domain basis kernels, pathwise integrals and the
//! Monte Carlo checks built on them.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prediction::{coeff_r, exact_error, past_boundary};
use crate::quadrature::QuadratureSpec;
use crate::spectral::{fbm_covariance, inner_product_l2, FrequencyFunction, SpectralModel};

/// Largest number of grid intervals accepted by the exact sampler.
pub const MAX_INTERVALS: usize = 4096;

/// Uniform time grid `t_k = start + k·step`, `k = 0..=intervals`, containing 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    start: f64,
    step: f64,
    intervals: usize,
    zero: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, intervals: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::domain(format!("invalid grid bounds [{start}, {end}]")));
        }
        if intervals == 0 || intervals > MAX_INTERVALS {
            return Err(Error::domain(format!("grid intervals {intervals} outside 1..={MAX_INTERVALS}")));
        }
        let step = (end - start) / intervals as f64;
        let k = (-start / step).round();
        if k < 0.0 || k > intervals as f64 || (start + k * step).abs() > 1e-9 * step {
            return Err(Error::domain(format!("grid [{start}, {end}] with {intervals} intervals does not contain 0")));
        }
        Ok(Self { start, step, intervals, zero: k as usize })
    }

    /// `[-l, l]` with `intervals` cells.
    pub fn symmetric(l: f64, intervals: usize) -> Result<Self> {
        Self::new(-l, l, intervals)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.t(self.intervals)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero_index(&self) -> usize {
        self.zero
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.zero {
            0.0
        } else {
            self.start + k as f64 * self.step
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.t(k)).collect()
    }

    /// Index of the grid point equal to `t`, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = ((t - self.start) / self.step).round();
        if k < 0.0 || k > self.intervals as f64 {
            return None;
        }
        let k = k as usize;
        ((self.t(k) - t).abs() <= 1e-9 * self.step).then_some(k)
    }

    fn same_as(&self, other: &Grid) -> bool {
        self.intervals == other.intervals
            && (self.start - other.start).abs() <= 1e-12 * self.step
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Process values on a grid, pinned to 0 at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub hurst: f64,
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl SamplePath {
    pub fn at(&self, t: f64) -> Option<f64> {
        self.grid.index_of(t).map(|k| self.values[k])
    }

    /// CSV with header `t,x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x\n");
        for (k, x) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e}", self.grid.t(k), x);
        }
        out
    }
}

/// Standard normal variates: ChaCha8 keyed by `(seed, stream)`, uniforms
/// from the top 53 bits, Box–Muller pairs `sqrt(-2 ln u1)·(cos, sin)(2π u2)`
/// with `u1 ∈ (0, 1]`.
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Autocovariance of fGn increments with spacing `dt`.
pub fn increment_autocov(hurst: f64, dt: f64, k: usize) -> f64 {
    let e = 2.0 * hurst;
    let k = k as f64;
    0.5 * dt.powf(e) * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Cholesky sampler for one grid, reused across paths.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    hurst: f64,
    grid: Grid,
    /// Lower factor, rows packed: row `i` starts at `i(i+1)/2`.
    chol: Vec<f64>,
}

impl FbmSampler {
    pub fn new(m: &SpectralModel, grid: &Grid) -> Result<Self> {
        let h = m.hurst();
        let n = grid.intervals();
        let acf: Vec<f64> = (0..n).map(|k| increment_autocov(h, grid.step(), k)).collect();
        let chol = match cholesky_toeplitz(&acf, 0.0) {
            Ok(c) => c,
            Err(_) => cholesky_toeplitz(&acf, 1e-12 * acf[0])?,
        };
        Ok(Self { hurst: h, grid: *grid, chol })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Increments `X(t_{k+1}) - X(t_k)` for path `path_index`.
    pub fn increments(&self, seed: u64, path_index: u64) -> Vec<f64> {
        let n = self.grid.intervals();
        let mut normals = NormalStream::new(seed, path_index);
        let z: Vec<f64> = (0..n).map(|_| normals.next()).collect();
        (0..n)
            .map(|i| {
                let row = &self.chol[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
                row.iter().zip(&z).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn sample(&self, seed: u64, path_index: u64) -> SamplePath {
        let inc = self.increments(seed, path_index);
        SamplePath { hurst: self.hurst, grid: self.grid, values: integrate_increments(&self.grid, &inc) }
    }
}

fn integrate_increments(grid: &Grid, inc: &[f64]) -> Vec<f64> {
    let z = grid.zero_index();
    let mut x = vec![0.0; grid.len()];
    for k in z + 1..grid.len() {
        x[k] = x[k - 1] + inc[k - 1];
    }
    for k in (0..z).rev() {
        x[k] = x[k + 1] - inc[k];
    }
    x
}

fn cholesky_toeplitz(acf: &[f64], jitter: f64) -> Result<Vec<f64>> {
    let n = acf.len();
    let mut l = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let ri = i * (i + 1) / 2;
        for j in 0..=i {
            let rj = j * (j + 1) / 2;
            let dot: f64 = l[ri..ri + j].iter().zip(&l[rj..rj + j]).map(|(a, b)| a * b).sum();
            let a = acf[i - j] + if i == j { jitter } else { 0.0 };
            if i == j {
                let d = a - dot;
                if !(d > 1e-14 * acf[0]) {
                    return Err(Error::numerical(
                        "fbm_sample",
                        format!("covariance matrix not positive definite at pivot {i} (pivot {d:e})"),
                    ));
                }
                l[ri + i] = d.sqrt();
            } else {
                l[ri + j] = (a - dot) / l[rj + j];
            }
        }
    }
    Ok(l)
}

/// Exact fBm sample on `grid` for `seed`.
pub fn fbm_sample(m: &SpectralModel, grid: &Grid, seed: u64) -> Result<SamplePath> {
    Ok(FbmSampler::new(m, grid)?.sample(seed, 0))
}

/// Time-domain kernel on a grid: one value per cell, used at the left point
/// of the cell in Riemann–Stieltjes sums.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeKernel {
    pub index: i64,
    pub hurst: f64,
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Relative L² energy of the kernel not captured by the cell values.
    pub tail_energy: f64,
}

impl TimeKernel {
    pub fn from_values(index: i64, hurst: f64, grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.intervals() {
            return Err(Error::domain(format!(
                "kernel has {} values for {} cells",
                values.len(),
                grid.intervals()
            )));
        }
        Ok(Self { index, hurst, grid, values, tail_energy: f64::NAN })
    }

    /// Sum of `values² · dt`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.step()
    }
}

/// `(1/2π)‖ξ̂_n‖²` in `L²(dγ)`, the time-domain energy of every `ξ_n`.
pub fn xi_energy(m: &SpectralModel) -> f64 {
    1.0 / (2.0 * PI * m.c_h() * (PI * m.hurst()).sin())
}

/// Antiderivative `Ξ_n(t) = ∫_0^t ξ_n(s) ds = (1/2π) ∫ ξ̂_n conj(ẑ_t) dγ`.
pub fn xi_antiderivative(m: &SpectralModel, n: i64, t: f64, q: &QuadratureSpec) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let est = inner_product_l2(&FrequencyFunction::xi_hat(m, n), &FrequencyFunction::z_t(t), q)?;
    Ok(est.re() / (2.0 * PI))
}

/// Pointwise `ξ_n(t) = (1/2π) ∫ ξ̂_n(γ) e^{-iγt} dγ`.
pub fn xi_time_point(m: &SpectralModel, n: i64, t: f64, q: &QuadratureSpec) -> Result<f64> {
    let est = inner_product_l2(&FrequencyFunction::xi_hat(m, n), &FrequencyFunction::inverse_kernel(-t), q)?;
    Ok(est.re() / (2.0 * PI))
}

/// Cell averages of `ξ_n` over `grid`.
pub fn xi_time(m: &SpectralModel, n: i64, grid: &Grid, q: &QuadratureSpec) -> Result<TimeKernel> {
    let anti: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| xi_antiderivative(m, n, grid.t(k), q))
        .collect::<Result<_>>()?;
    let dt = grid.step();
    let values: Vec<f64> = anti.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
    let mut kernel = TimeKernel { index: n, hurst: m.hurst(), grid: *grid, values, tail_energy: 0.0 };
    let total = xi_energy(m);
    kernel.tail_energy = ((total - kernel.energy()) / total).max(0.0);
    if kernel.tail_energy > 1e-4 {
        log::debug!("kernel {n}: relative energy outside the grid cells {:.3e}", kernel.tail_energy);
    }
    Ok(kernel)
}

/// Left-point Riemann–Stieltjes sum `Σ ξ(t_k)(X(t_{k+1}) - X(t_k))`.
pub fn pathwise_integral(p: &SamplePath, k: &TimeKernel) -> Result<f64> {
    if !p.grid.same_as(&k.grid) {
        return Err(Error::domain("path and kernel grids differ"));
    }
    Ok(p.values.windows(2).zip(&k.values).map(|(x, w)| w * (x[1] - x[0])).sum())
}

fn dot_increments(weights: &[f64], inc: &[f64]) -> f64 {
    weights.iter().zip(inc).map(|(w, d)| w * d).sum()
}

/// `w_a^T Σ w_b` for the increment covariance `Σ` of the grid.
fn discrete_gram(m: &SpectralModel, grid: &Grid, kernels: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = grid.intervals();
    let acf: Vec<f64> = (0..n).map(|k| increment_autocov(m.hurst(), grid.step(), k)).collect();
    let sw: Vec<Vec<f64>> = kernels
        .par_iter()
        .map(|w| (0..n).map(|i| (0..n).map(|j| acf[i.abs_diff(j)] * w[j]).sum()).collect())
        .collect();
    kernels
        .iter()
        .map(|wa| sw.iter().map(|s| dot_increments(wa, s)).collect())
        .collect()
}

/// Empirical Gram matrix of pathwise integrals with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub indices: Vec<i64>,
    pub n_paths: usize,
    pub mean: Vec<Vec<f64>>,
    pub std_err: Vec<Vec<f64>>,
    /// Exact expectation of the estimator for this grid (discretisation and
    /// truncation included).
    pub expected: Vec<Vec<f64>>,
    pub tail_energy: Vec<f64>,
}

impl GramReport {
    /// Largest `|G - I|` measured in standard errors.
    pub fn max_z_score(&self) -> f64 {
        let k = self.indices.len();
        let mut z: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                let target = if a == b { 1.0 } else { 0.0 };
                z = z.max((self.mean[a][b] - target).abs() / self.std_err[a][b]);
            }
        }
        z
    }

    /// Largest deviation of the expected Gram from the identity.
    pub fn bias(&self) -> f64 {
        let k = self.indices.len();
        let mut b: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                b = b.max((self.expected[i][j] - target).abs());
            }
        }
        b
    }

    /// CSV with header `i,j,mean,std_err,expected`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,mean,std_err,expected\n");
        for (a, &i) in self.indices.iter().enumerate() {
            for (b, &j) in self.indices.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{i},{j},{:.16e},{:.16e},{:.16e}",
                    self.mean[a][b], self.std_err[a][b], self.expected[a][b]
                );
            }
        }
        out
    }
}

/// Expected Gram matrix of the discretised kernels, without simulation.
pub fn expected_gram(m: &SpectralModel, window: (i64, i64), grid: &Grid, q: &QuadratureSpec) -> Result<Vec<Vec<f64>>> {
    let kernels = kernels_for(m, window.0..=window.1, grid, q)?;
    let w: Vec<Vec<f64>> = kernels.into_iter().map(|k| k.values).collect();
    Ok(discrete_gram(m, grid, &w))
}

fn kernels_for(
    m: &SpectralModel,
    indices: impl Iterator<Item = i64>,
    grid: &Grid,
    q: &QuadratureSpec,
) -> Result<Vec<TimeKernel>> {
    indices.map(|n| xi_time(m, n, grid, q)).collect()
}

/// Monte Carlo Gram matrix of `I(ξ_n)` over `window`.
pub fn mc_gram(
    m: &SpectralModel,
    window: (i64, i64),
    grid: &Grid,
    n_paths: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<GramReport> {
    let (lo, hi) = window;
    if lo > hi || hi - lo + 1 > 17 {
        return Err(Error::domain(format!("Gram window [{lo}, {hi}] must hold 1..=17 indices")));
    }
    if n_paths < 1000 {
        return Err(Error::domain(format!("mc_gram needs at least 1000 paths, got {n_paths}")));
    }
    let kernels = kernels_for(m, lo..=hi, grid, q)?;
    let sampler = FbmSampler::new(m, grid)?;
    let samples: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let inc = sampler.increments(seed, p);
            kernels.iter().map(|k| dot_increments(&k.values, &inc)).collect()
        })
        .collect();
    let k = kernels.len();
    let n = n_paths as f64;
    let means: Vec<f64> = (0..k).map(|a| samples.iter().map(|s| s[a]).sum::<f64>() / n).collect();
    let mut mean = vec![vec![0.0; k]; k];
    let mut std_err = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let prods: Vec<f64> = samples.iter().map(|s| (s[a] - means[a]) * (s[b] - means[b])).collect();
            let mu = prods.iter().sum::<f64>() / (n - 1.0);
            let var = prods.iter().map(|p| (p - mu) * (p - mu)).sum::<f64>() / (n - 1.0);
            mean[a][b] = mu;
            std_err[a][b] = (var / n).sqrt();
        }
    }
    let w: Vec<Vec<f64>> = kernels.iter().map(|k| k.values.clone()).collect();
    Ok(GramReport {
        indices: (lo..=hi).collect(),
        n_paths,
        mean,
        std_err,
        expected: discrete_gram(m, grid, &w),
        tail_energy: kernels.iter().map(|k| k.tail_energy).collect(),
    })
}

/// Outcome of the Monte Carlo prediction experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub hurst: f64,
    pub t: f64,
    pub n_paths: usize,
    pub past_indices: Vec<i64>,
    pub ms_residual: f64,
    pub ms_residual_se: f64,
    pub exact_error: f64,
    pub ratio: f64,
    /// `E[(X(t) - P)^2]` for the discretised predictor, computed exactly.
    pub expected_ms_residual: f64,
    pub predictor_energy: f64,
    /// `(t_k, corr(residual, X(t_k)), standard error)` for past probe points.
    pub past_correlations: Vec<(f64, f64, f64)>,
}

impl PredictionReport {
    /// CSV with header `n_paths,ms_residual,exact_error,ratio`.
    pub fn to_csv(&self) -> String {
        format!(
            "n_paths,ms_residual,exact_error,ratio\n{},{:.16e},{:.16e},{:.16e}\n",
            self.n_paths, self.ms_residual, self.exact_error, self.ratio
        )
    }

    pub fn max_corr_z(&self) -> f64 {
        self.past_correlations.iter().map(|(_, c, se)| c.abs() / se).fold(0.0, f64::max)
    }
}

/// Past probe times for residual correlations.
pub const RESIDUAL_PROBES: [f64; 5] = [-0.25, -0.5, -1.0, -2.0, -4.0];

/// Simulates paths, forms the chaos predictor of `X(t)` from past basis
/// integrals and compares the mean-square residual with the closed form.
pub fn mc_prediction_experiment(
    m: &SpectralModel,
    t: f64,
    window: (i64, i64),
    grid: &Grid,
    n_paths: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<PredictionReport> {
    if !(t > 0.0) {
        return Err(Error::domain("prediction time must be positive"));
    }
    let need = 8.0 * t.max(1.0);
    if grid.start() > -need + 1e-9 || grid.end() < t - 1e-9 {
        return Err(Error::domain(format!(
            "grid [{}, {}] must cover [-{need}, {t}]",
            grid.start(),
            grid.end()
        )));
    }
    let t_index = grid
        .index_of(t)
        .ok_or_else(|| Error::domain(format!("prediction time {t} is not a grid point")))?;
    if n_paths < 2 {
        return Err(Error::domain("need at least two paths"));
    }
    let boundary = past_boundary(m, q)?;
    let top = window.1.min(boundary);
    if window.0 > top {
        return Err(Error::domain(format!("window [{}, {}] holds no past index", window.0, window.1)));
    }
    let past: Vec<i64> = (window.0..=top).collect();
    let zero = grid.zero_index();
    let mut combined = vec![0.0; grid.intervals()];
    let mut predictor_energy = 0.0;
    for &j in &past {
        let (r, _) = coeff_r(m, j, t, q)?;
        predictor_energy += r * r;
        let k = xi_time(m, j, grid, q)?;
        for (c, w) in combined.iter_mut().zip(&k.values).take(zero) {
            *c += r * w;
        }
    }
    let sampler = FbmSampler::new(m, grid)?;
    let probes: Vec<(f64, usize)> = RESIDUAL_PROBES
        .iter()
        .filter_map(|&s| grid.index_of(s).map(|k| (s, k)))
        .collect();
    let rows: Vec<(f64, Vec<f64>)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let path = sampler.sample(seed, p);
            let pred: f64 = path.values.windows(2).zip(&combined).map(|(x, w)| w * (x[1] - x[0])).sum();
            let resid = path.values[t_index] - pred;
            (resid, probes.iter().map(|&(_, k)| path.values[k]).collect())
        })
        .collect();
    let n = n_paths as f64;
    let sq: Vec<f64> = rows.iter().map(|(r, _)| r * r).collect();
    let ms = sq.iter().sum::<f64>() / n;
    let ms_var = sq.iter().map(|s| (s - ms) * (s - ms)).sum::<f64>() / (n - 1.0);
    let mut past_correlations = Vec::new();
    for (pi, &(s, _)) in probes.iter().enumerate() {
        let xs: Vec<f64> = rows.iter().map(|(_, v)| v[pi]).collect();
        let rs: Vec<f64> = rows.iter().map(|(r, _)| *r).collect();
        let corr = correlation(&rs, &xs);
        past_correlations.push((s, corr, (1.0 - corr * corr) / (n - 3.0).sqrt()));
    }
    let exact = exact_error(m, t)?;
    let expected = expected_residual(m, grid, &combined, t, t_index);
    Ok(PredictionReport {
        hurst: m.hurst(),
        t,
        n_paths,
        past_indices: past,
        ms_residual: ms,
        ms_residual_se: (ms_var / n).sqrt(),
        exact_error: exact,
        ratio: ms / exact,
        expected_ms_residual: expected,
        predictor_energy,
        past_correlations,
    })
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// `E[(X(t) - Σ_k w_k ΔX_k)^2]` from the covariance function.
fn expected_residual(m: &SpectralModel, grid: &Grid, w: &[f64], t: f64, _t_index: usize) -> f64 {
    let n = grid.intervals();
    let h = m.hurst();
    let cross: f64 = (0..n)
        .map(|k| w[k] * (fbm_covariance(m, t, grid.t(k + 1)) - fbm_covariance(m, t, grid.t(k))))
        .sum();
    let acf: Vec<f64> = (0..n).map(|k| increment_autocov(h, grid.step(), k)).collect();
    let quad: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            if w[i] == 0.0 {
                return 0.0;
            }
            w[i] * (0..n).map(|j| acf[i.abs_diff(j)] * w[j]).sum::<f64>()
        })
        .sum();
    t.abs().powf(2.0 * h) - 2.0 * cross + quad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rules() {
        let g = Grid::symmetric(2.0, 8).unwrap();
        assert_eq!(g.zero_index(), 4);
        assert_eq!(g.t(4), 0.0);
        assert_eq!(g.index_of(-1.5), Some(1));
        assert_eq!(g.index_of(0.3), None);
        assert!(Grid::new(0.1, 1.0, 9).is_err());
        assert!(Grid::new(-1.0, 1.0, 4097).is_err());
        assert!(Grid::new(1.0, -1.0, 4).is_err());
        assert!(Grid::new(-3.0, 1.0, 8).is_ok());
    }

    #[test]
    fn normals_are_reproducible_and_standard() {
        let mut a = NormalStream::new(7, 3);
        let mut b = NormalStream::new(7, 3);
        let xs: Vec<f64> = (0..20000).map(|_| a.next()).collect();
        let ys: Vec<f64> = (0..20000).map(|_| b.next()).collect();
        assert_eq!(xs, ys);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.04);
        let mut c = NormalStream::new(7, 4);
        assert_ne!(xs[0], c.next());
    }

    #[test]
    fn cholesky_reproduces_covariance() {
        let acf: Vec<f64> = (0..30).map(|k| increment_autocov(0.7, 0.1, k)).collect();
        let l = cholesky_toeplitz(&acf, 0.0).unwrap();
        for i in 0..30 {
            for j in 0..=i {
                let ri = i * (i + 1) / 2;
                let rj = j * (j + 1) / 2;
                let s: f64 = (0..=j).map(|k| l[ri + k] * l[rj + k]).sum();
                assert!((s - acf[i - j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn increments_sum_to_fbm_covariance() {
        // Var(X(1)) from summed increment covariances on a 0.1 grid.
        let m = SpectralModel::new(0.7).unwrap();
        let n = 10;
        let mut v = 0.0;
        for i in 0..n as usize {
            for j in 0..n as usize {
                v += increment_autocov(0.7, 0.1, i.abs_diff(j));
            }
        }
        assert!((v - fbm_covariance(&m, 1.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn energy_closed_form_for_brownian_motion() {
        let m = SpectralModel::new(0.5).unwrap();
        assert!((xi_energy(&m) - 1.0).abs() < 1e-14);
    }
}
