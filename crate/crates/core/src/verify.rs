//! Verification suite: each criterion is an end-to-end numerical check with
//! a fixed tolerance and runtime budget.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::figures::{error_curve, render_path, write_file, coeff_svg};
use crate::finite_horizon::{bessel_j, bessel_zeros, fh_basis_gram, kernel_s, BesselOrder};
use crate::hermite::{hermite_eval, hermite_param_eval, wick_exponential, wick_square, ChaosExpansion, MultiIndex, PastSet};
use crate::prediction::{coeff_table_with_boundary, exact_error, past_boundary};
use crate::quadrature::{integrate_half_line, HalfLineIntegrand, QuadratureSpec};
use crate::simulate::{mc_gram, mc_prediction_experiment, Grid, NormalStream};
use crate::spectral::{inner_product_delta, outer_h, spectral_density, FrequencyFunction, SpectralModel};

/// Outer-factor implementation under test.
pub type OuterFn = fn(&SpectralModel, f64) -> Result<Complex64>;

/// Outer factor with the phase sign flipped, for mutation testing.
pub fn mutated_outer(m: &SpectralModel, gamma: f64) -> Result<Complex64> {
    let h = outer_h(m, gamma)?;
    let phase = PI * (2.0 * m.hurst() - 1.0) / 2.0 * gamma.signum();
    Ok(h * Complex64::from_polar(1.0, -phase))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Skip the Monte Carlo criteria.
    pub quick: bool,
    pub quadrature: QuadratureSpec,
    pub seed: u64,
    pub paths: usize,
    pub outer: OuterFn,
    /// Directory for the figure files of criterion 10.
    pub out_dir: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            quadrature: QuadratureSpec::default(),
            seed: 20240607,
            paths: 10_000,
            outer: outer_h,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
    pub budget: f64,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        write!(f, "criterion {:>2} {s} {:<28} {:>8.2}s  {}", self.id, self.name, self.seconds, self.detail)
    }
}

pub const CRITERIA: [(u8, &str, f64, bool); 10] = [
    (1, "hermite-algebra", 1.0, false),
    (2, "outer-factorization", 1.0, false),
    (3, "basis-orthonormality", 60.0, false),
    (4, "variance-identity", 300.0, false),
    (5, "error-identity", 300.0, false),
    (6, "mc-orthonormality", 600.0, true),
    (7, "mc-prediction", 600.0, true),
    (8, "wick-identities", 60.0, false),
    (9, "finite-horizon", 120.0, false),
    (10, "figure-reproduction", 300.0, false),
];

/// Runs one criterion; numerical failures count as a failed check.
pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionResult {
    let (_, name, budget, mc) = *CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .unwrap_or_else(|| panic!("unknown criterion {id}"));
    if mc && opts.quick {
        return CriterionResult { id, name, status: Status::Skipped, detail: "quick mode".into(), seconds: 0.0, budget };
    }
    let start = Instant::now();
    let outcome = match id {
        1 => criterion_hermite(),
        2 => criterion_outer(opts),
        3 => criterion_gram(opts),
        4 => criterion_variance(opts),
        5 => criterion_error(opts),
        6 => criterion_mc_gram(opts),
        7 => criterion_mc_prediction(opts),
        8 => criterion_wick(opts),
        9 => criterion_finite_horizon(opts),
        _ => criterion_figures(opts),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut ok, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if seconds > budget {
        ok = false;
        detail = format!("{detail}; exceeded {budget}s budget");
    }
    CriterionResult { id, name, status: if ok { Status::Pass } else { Status::Fail }, detail, seconds, budget }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|c| run_criterion(c.0, opts)).collect()
}

type Outcome = Result<(bool, String)>;

fn hermite_sum_exact(n: u32, x: i64) -> i128 {
    // Σ_k (-1)^k n! / (k! (n-2k)! 2^k) x^{n-2k}
    let fact = |k: u32| (1..=k as i128).product::<i128>();
    (0..=n / 2)
        .map(|k| {
            let c = fact(n) / (fact(k) * fact(n - 2 * k) * (1i128 << k));
            let sign = if k % 2 == 0 { 1 } else { -1 };
            sign * c * (x as i128).pow(n - 2 * k)
        })
        .sum()
}

fn criterion_hermite() -> Outcome {
    let mut worst_float: f64 = 0.0;
    for n in 0..=10u32 {
        for x in -10i64..=10 {
            let exact = hermite_sum_exact(n, x) as f64;
            let v = hermite_eval(n as usize, x as f64)?;
            if v != exact {
                return Ok((false, format!("h_{n}({x}) = {v}, expected {exact}")));
            }
            if hermite_param_eval(n as usize, 1.0, x as f64)? != v {
                return Ok((false, format!("h^[1]_{n}({x}) differs from h_{n}")));
            }
            if hermite_param_eval(n as usize, 0.0, x as f64)? != (x as f64).powi(n as i32) {
                return Ok((false, format!("h^[0]_{n}({x}) differs from x^n")));
            }
        }
    }
    for n in 1..=50usize {
        for k in 0..=200 {
            let x = -10.0 + 0.1 * k as f64;
            let (a, b, c) = (hermite_eval(n + 1, x)?, hermite_eval(n, x)?, hermite_eval(n - 1, x)?);
            let scale = (x * b).abs() + n as f64 * c.abs();
            if scale > 0.0 {
                worst_float = worst_float.max((a - (x * b - n as f64 * c)).abs() / scale);
            }
            if n <= 10 {
                let d = 1e-5 * x.abs().max(1.0);
                let fd = (hermite_eval(n, x + d)? - hermite_eval(n, x - d)?) / (2.0 * d);
                let exact = n as f64 * c;
                if (fd - exact).abs() > 1e-6 * exact.abs().max(1.0) {
                    return Ok((false, format!("derivative of h_{n} at {x}: {fd} vs {exact}")));
                }
            }
        }
    }
    let (c, x) = (0.5f64, 1.0f64);
    let mut sum = 0.0;
    let mut fact = 1.0;
    for n in 0..=30usize {
        if n > 0 {
            fact *= n as f64;
        }
        sum += c.powi(n as i32) * hermite_eval(n, x)? / fact;
    }
    let gen_gap = (sum - (c * x - 0.5 * c * c).exp()).abs();
    let ok = worst_float <= 1e-12 && gen_gap <= 1e-12;
    Ok((ok, format!("recurrence rel {worst_float:.1e}, generating fn gap {gen_gap:.1e}")))
}

/// `|∫ h(γ)/(γ+i) dγ|`; vanishes when `h` extends analytically to the upper
/// half plane.
fn hardy_defect(m: &SpectralModel, outer: OuterFn, q: &QuadratureSpec) -> Result<f64> {
    let a = 0.5 - m.hurst();
    let side = |sign: f64| {
        let m = *m;
        let f = move |u: f64| {
            let g = sign * u;
            outer(&m, g).unwrap_or(Complex64::new(f64::NAN, f64::NAN)) / Complex64::new(g, 1.0)
        };
        HalfLineIntegrand {
            eval: Box::new(f),
            tail: vec![crate::quadrature::TailTerm { omega: 0.0, amplitude: Box::new(f) }],
            origin_exponent: a,
            tail_decay: 2.0 - a,
            mobius: 0,
            tail_start: 0.0,
        }
    };
    let pos = integrate_half_line(&side(1.0), q)?;
    let neg = integrate_half_line(&side(-1.0), q)?;
    Ok((pos.value + neg.value).norm())
}

fn criterion_outer(opts: &VerifyOptions) -> Outcome {
    let grid: Vec<f64> = (0..200).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 199.0)).collect();
    let mut fact: f64 = 0.0;
    let mut real: f64 = 0.0;
    let mut hardy: f64 = 0.0;
    for &h in &[0.2, 0.35, 0.5, 0.7, 0.9] {
        let m = SpectralModel::new(h)?;
        for &g in &grid {
            for x in [g, -g] {
                let o = (opts.outer)(&m, x)?;
                let d = spectral_density(&m, x);
                fact = fact.max((o.norm_sqr() * (1.0 + x * x) - d).abs() / d);
            }
            let lhs = Complex64::new(-g, -1.0) * (opts.outer)(&m, -g)?;
            let rhs = Complex64::new(g, 1.0) * (opts.outer)(&m, g)?.conj();
            real = real.max((lhs - rhs).norm() / rhs.norm());
        }
        hardy = hardy.max(hardy_defect(&m, opts.outer, &opts.quadrature)?);
    }
    let ok = fact <= 1e-12 && real <= 1e-12 && hardy <= 1e-6;
    Ok((ok, format!("factorization {fact:.1e}, reality {real:.1e}, upper half-plane defect {hardy:.1e}")))
}

fn criterion_gram(opts: &VerifyOptions) -> Outcome {
    let mut worst: f64 = 0.0;
    for &h in &[0.2, 0.5, 0.7] {
        let m = SpectralModel::new(h)?;
        let basis: Vec<FrequencyFunction> = (-3..=3).map(|n| FrequencyFunction::xi_hat(&m, n)).collect();
        for (i, f) in basis.iter().enumerate() {
            for (j, g) in basis.iter().enumerate().skip(i) {
                let v = inner_product_delta(f, g, &m, &opts.quadrature)?;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v.value - target).norm());
            }
        }
    }
    Ok((worst <= 1e-4, format!("max |G - I| = {worst:.2e} over n in [-3, 3], H in {{0.2, 0.5, 0.7}}")))
}

fn boundary_for(m: &SpectralModel, q: &QuadratureSpec) -> Result<i64> {
    past_boundary(m, q)
}

fn criterion_variance(opts: &VerifyOptions) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for &h in &[0.2, 0.5, 0.7] {
        let m = SpectralModel::new(h)?;
        let tbl = coeff_table_with_boundary(&m, 1.0, -512, 512, -2, &opts.quadrature)?;
        let gap = (tbl.total_energy() - 1.0).abs();
        ok &= gap <= 0.02;
        parts.push(format!("H={h}: {:.4}{}", tbl.total_energy(), if gap <= 0.02 { "" } else { " (outside 2%)" }));
    }
    Ok((ok, format!("Σ r_j(1)^2 over |j| <= 512: {}", parts.join(", "))))
}

fn criterion_error(opts: &VerifyOptions) -> Outcome {
    let q = &opts.quadrature;
    let mut boundaries = Vec::new();
    for &h in &[0.2, 0.5, 0.7] {
        boundaries.push(boundary_for(&SpectralModel::new(h)?, q)?);
    }
    if boundaries.iter().any(|&b| b != boundaries[0]) {
        return Ok((false, format!("past boundary differs across H: {boundaries:?}")));
    }
    let j_star = boundaries[0];
    let m7 = SpectralModel::new(0.7)?;
    let t7 = coeff_table_with_boundary(&m7, 1.0, -512, 512, j_star, q)?;
    let exact = exact_error(&m7, 1.0)?;
    let rel7 = (t7.future_energy() - exact).abs() / exact;
    let m5 = SpectralModel::new(0.5)?;
    let t5 = coeff_table_with_boundary(&m5, 1.0, -512, 512, j_star, q)?;
    let rel5 = (t5.future_energy() - 1.0).abs();
    let past5 = t5.past_energy();
    let ok = rel7 <= 0.02 && rel5 <= 0.02 && past5 < 1e-3;
    Ok((
        ok,
        format!(
            "j* = {j_star}; H=0.7 future {:.4} vs exact {exact:.4} ({:.2}%); H=0.5 future {:.4}, past {past5:.1e}",
            t7.future_energy(),
            100.0 * rel7,
            t5.future_energy()
        ),
    ))
}

fn criterion_mc_gram(opts: &VerifyOptions) -> Outcome {
    let q = &opts.quadrature;
    let mut ok = true;
    let mut parts = Vec::new();
    for &h in &[0.5, 0.7] {
        let m = SpectralModel::new(h)?;
        let wide = mc_gram(&m, (-4, 4), &Grid::symmetric(16.0, 2048)?, opts.paths, opts.seed, q)?;
        let narrow = crate::simulate::expected_gram(&m, (-4, 4), &Grid::symmetric(8.0, 1024)?, q)?;
        let narrow_bias = max_identity_gap(&narrow);
        let z = wide.max_z_score();
        ok &= z <= 5.0 && wide.bias() < narrow_bias;
        parts.push(format!("H={h}: max z {z:.2}, bias L=8 {narrow_bias:.1e} -> L=16 {:.1e}", wide.bias()));
    }
    Ok((ok, parts.join("; ")))
}

fn max_identity_gap(g: &[Vec<f64>]) -> f64 {
    let mut b: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            b = b.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    b
}

fn criterion_mc_prediction(opts: &VerifyOptions) -> Outcome {
    let m = SpectralModel::new(0.7)?;
    let grid = Grid::new(-8.0, 1.0, 9 * 128)?;
    let r = mc_prediction_experiment(&m, 1.0, (-8, 8), &grid, opts.paths, opts.seed, &opts.quadrature)?;
    let rel = (r.ms_residual - r.exact_error).abs() / r.exact_error;
    let z = r.max_corr_z();
    Ok((
        rel <= 0.10 && z < 5.0,
        format!(
            "ms residual {:.4} ± {:.4} vs exact {:.4} ({:.1}%), max residual-past corr {z:.2} SE",
            r.ms_residual,
            r.ms_residual_se,
            r.exact_error,
            100.0 * rel
        ),
    ))
}

fn criterion_wick(opts: &VerifyOptions) -> Outcome {
    let m = SpectralModel::new(0.7)?;
    let j_star = -2;
    let tbl = coeff_table_with_boundary(&m, 1.0, -6, 3, j_star, &opts.quadrature)?;
    let r = tbl.coefficient_map();
    let var: f64 = r.values().map(|v| v * v).sum();
    let sq = wick_square(&r, var);
    let mut normals = NormalStream::new(opts.seed, 8);
    let mut worst_square: f64 = 0.0;
    let mut worst_exp: f64 = 0.0;
    let past = PastSet::UpTo(j_star);
    let wexp = wick_exponential(&r, 6)?;
    let wexp_past = wexp.condition(&past);
    for _ in 0..1000 {
        let draws: BTreeMap<i64, f64> = r.keys().map(|&j| (j, normals.next())).collect();
        let lin: f64 = r.iter().map(|(j, c)| c * draws[j]).sum();
        let v = sq.eval_map(&draws)?;
        worst_square = worst_square.max((v - lin * lin).abs() / (lin * lin).max(1e-300).max(var * 1e-3));
        let lin_past: f64 = r.iter().filter(|(j, _)| past.contains(**j)).map(|(j, c)| c * draws[j]).sum();
        let var_past: f64 = r.iter().filter(|(j, _)| past.contains(**j)).map(|(_, c)| c * c).sum();
        let closed = (lin_past - 0.5 * var_past).exp();
        worst_exp = worst_exp.max((wexp_past.eval_map(&draws)? - closed).abs());
    }
    // E[B^2 | past] = μ^2 + σ^2 built term by term.
    let cond = sq.condition(&past);
    let mut expected = ChaosExpansion::new(tbl.j_min, tbl.j_max)?;
    let past_idx: Vec<i64> = r.keys().copied().filter(|&j| past.contains(j)).collect();
    expected.add_term(MultiIndex::empty(), var)?;
    for (a, &i) in past_idx.iter().enumerate() {
        expected.add_term(MultiIndex::from_pairs([(i, 2)]), r[&i] * r[&i])?;
        for &j in &past_idx[a + 1..] {
            expected.add_term(MultiIndex::from_pairs([(i, 1), (j, 1)]), 2.0 * r[&i] * r[&j])?;
        }
    }
    let coeff_match = cond.terms().count() == expected.terms().count()
        && cond.terms().all(|(alpha, c)| expected.coeff(alpha) == c);
    let mean_one = wexp.coeff(&MultiIndex::empty()) == 1.0;
    let ok = worst_square <= 1e-10 && coeff_match && mean_one && worst_exp <= 1e-3;
    Ok((
        ok,
        format!(
            "square rel {worst_square:.1e}, conditional coefficients {}, Wick exp mean {}, conditional exp gap {worst_exp:.1e}",
            if coeff_match { "exact" } else { "MISMATCH" },
            wexp.coeff(&MultiIndex::empty())
        ),
    ))
}

fn criterion_finite_horizon(opts: &VerifyOptions) -> Outcome {
    let half = BesselOrder::new(0.5)?;
    let zeros = bessel_zeros(half, 20)?;
    let zero_gap = zeros
        .iter()
        .enumerate()
        .map(|(k, z)| (z - (k + 1) as f64 * PI).abs())
        .fold(0.0, f64::max);
    let residual = zeros.iter().map(|&z| bessel_j(half, z).map(f64::abs)).collect::<Result<Vec<_>>>()?;
    let residual = residual.into_iter().fold(0.0, f64::max);
    let mut off: f64 = 0.0;
    let mut cont: f64 = 0.0;
    for &h in &[0.5, 0.7] {
        let m = SpectralModel::new(h)?;
        let g = fh_basis_gram(&m, 1.0, 5, &opts.quadrature)?;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    off = off.max(v.abs());
                }
            }
        }
        for &x in &[0.3, 2.0, 7.5, 20.0] {
            let diag = kernel_s(&m, 1.0, x, x)?;
            let above = kernel_s(&m, 1.0, x, x * (1.0 + 1e-7))?;
            let below = kernel_s(&m, 1.0, x, x * (1.0 - 1e-7))?;
            cont = cont.max(((above + below) * 0.5 - diag).norm() / diag.norm());
        }
    }
    let ok = zero_gap <= 1e-10 && residual < 1e-9 && off < 1e-2 && cont < 1e-6;
    Ok((
        ok,
        format!("zeros vs nπ {zero_gap:.1e}, Gram off-diagonal {off:.1e}, diagonal continuity {cont:.1e}"),
    ))
}

/// Figure files for the coefficient profile, the error curve and the path
/// rendering; returns the checks made on the written CSV.
pub fn write_figures(m: &SpectralModel, dir: &Path, seed: u64, q: &QuadratureSpec) -> Result<Vec<(String, bool)>> {
    let j_star = past_boundary(m, q)?;
    let tbl = coeff_table_with_boundary(m, 1.0, -512, 512, j_star, q)?;
    write_file(&dir.join("coeffs.csv"), &tbl.to_csv())?;
    write_file(&dir.join("coeffs.svg"), &coeff_svg(&tbl))?;
    let curve = error_curve(m, &tbl)?;
    write_file(&dir.join("error_curve.csv"), &curve.to_csv())?;
    write_file(&dir.join("error_curve.svg"), &curve.to_svg())?;
    let times: Vec<f64> = (0..=80).map(|k| -2.0 + 0.05 * k as f64).collect();
    let path = render_path(m, (-64, 64), j_star, &times, seed, q)?;
    write_file(&dir.join("render_path.csv"), &path.to_csv())?;
    write_file(&dir.join("render_path.svg"), &path.to_svg())?;
    check_figure_dir(dir)
}

fn read_csv(path: &Path) -> Result<(String, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if text.contains('\r') {
        return Err(Error::Parse(format!("{} has CR line endings", path.display())));
    }
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().to_string();
    Ok((header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect()))
}

fn num(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")))
}

/// Checks the figure CSV/SVG files in `dir`.
pub fn check_figure_dir(dir: &Path) -> Result<Vec<(String, bool)>> {
    let mut checks = Vec::new();
    let (h, rows) = read_csv(&dir.join("coeffs.csv"))?;
    checks.push(("coeffs header".to_string(), h == "j,r,abs_err,class"));
    checks.push(("coeffs rows".to_string(), !rows.is_empty() && rows.iter().all(|r| r.len() == 4)));

    let (h, rows) = read_csv(&dir.join("error_curve.csv"))?;
    checks.push(("error-curve header".to_string(), h == "k,residual_after_k_coeffs,exact"));
    let res: Vec<f64> = rows.iter().map(|r| num(&r[1])).collect::<Result<_>>()?;
    let exact = num(&rows[0][2])?;
    checks.push(("error-curve nonincreasing".to_string(), res.windows(2).all(|w| w[1] <= w[0])));
    let last = *res.last().unwrap_or(&f64::NAN);
    checks.push(("error-curve ends within 5% of exact".to_string(), (last - exact).abs() <= 0.05 * exact));

    let (h, rows) = read_csv(&dir.join("render_path.csv"))?;
    checks.push(("render-path header".to_string(), h == "t,past_component,future_component,total"));
    let parsed: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|s| num(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let scale = parsed.iter().map(|r| r[3].abs()).fold(0.0, f64::max).max(1e-300);
    let future_past = parsed.iter().filter(|r| r[0] <= 0.0).map(|r| r[2].abs()).fold(0.0, f64::max);
    checks.push(("future component vanishes for t <= 0".to_string(), future_past <= 0.02 * scale));
    checks.push((
        "total = past + future".to_string(),
        parsed.iter().all(|r| (r[1] + r[2] - r[3]).abs() <= 1e-12 * scale),
    ));
    for f in ["coeffs.svg", "error_curve.svg", "render_path.svg"] {
        let ok = std::fs::read_to_string(dir.join(f)).map(|s| s.contains(r#"viewBox="0 0 800 500""#)).unwrap_or(false);
        checks.push((format!("{f} present"), ok));
    }
    Ok(checks)
}

fn criterion_figures(opts: &VerifyOptions) -> Outcome {
    let dir = match &opts.out_dir {
        Some(d) => d.clone(),
        None => std::env::temp_dir().join(format!("fbm-chaos-figures-{}", std::process::id())),
    };
    let m = SpectralModel::new(0.7)?;
    let checks = write_figures(&m, &dir, opts.seed, &opts.quadrature)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    if opts.out_dir.is_none() {
        let _ = std::fs::remove_dir_all(&dir);
    }
    if failed.is_empty() {
        Ok((true, format!("{} checks on coeffs, error-curve and render-path output", checks.len())))
    } else {
        Ok((false, format!("failed: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_hermite_sum() {
        assert_eq!(hermite_sum_exact(2, 3), 8);
        assert_eq!(hermite_sum_exact(3, 2), 2);
        assert_eq!(hermite_sum_exact(0, -7), 1);
    }

    #[test]
    fn mutation_keeps_modulus() {
        let m = SpectralModel::new(0.7).unwrap();
        let a = outer_h(&m, 1.3).unwrap();
        let b = mutated_outer(&m, 1.3).unwrap();
        assert!((a.norm() - b.norm()).abs() < 1e-15);
        assert!((a - b).norm() > 0.1);
    }
}
