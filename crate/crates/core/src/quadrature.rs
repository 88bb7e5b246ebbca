//! Adaptive Gauss–Kronrod quadrature for oscillatory half-line integrals.
//!
//! An integrand on `(0, ∞)` is described by a [`HalfLineIntegrand`]: a plain
//! evaluator, a power-law exponent at the origin, and a decomposition
//! `Σ e^{iωγ} A_ω(γ)` valid beyond some point.  The origin panel uses a power
//! substitution, the middle range uses global adaptive bisection over
//! half-period breakpoints, the non-oscillatory part of the tail is mapped
//! onto a bounded interval and oscillatory tails are summed half-period by
//! half-period with Wynn's epsilon extrapolation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerances and limits for every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Minimum frequency cutoff before the tail treatment takes over.
    pub gamma_max: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-8, rel_tol: 1e-6, gamma_max: 32.0, max_panels: 20_000 }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, gamma_max: f64, max_panels: usize) -> Result<Self> {
        let q = Self { abs_tol, rel_tol, gamma_max, max_panels };
        q.validate()?;
        Ok(q)
    }

    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        Self::new(abs_tol, rel_tol, Self::default().gamma_max, Self::default().max_panels)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if !(self.gamma_max >= 1.0) || !self.gamma_max.is_finite() {
            return Err(Error::domain("frequency cutoff must be finite and at least 1"));
        }
        if self.max_panels < 16 {
            return Err(Error::domain("max_panels must be at least 16"));
        }
        Ok(())
    }

    /// Accepted error for an integral of magnitude `value`.
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    fn scaled(&self, factor: f64) -> Self {
        Self { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..*self }
    }
}

/// Quadrature result with its error bound and the number of panels used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

impl Estimate {
    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }

    fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            panels: self.panels + other.panels,
        }
    }

    fn zero() -> Estimate {
        Estimate { value: Complex64::new(0.0, 0.0), error: 0.0, panels: 0 }
    }
}

pub type Amplitude<'a> = Box<dyn Fn(f64) -> Complex64 + Send + Sync + 'a>;

/// One term `e^{iωγ} A(γ)` of the large-γ decomposition.
pub struct TailTerm<'a> {
    pub omega: f64,
    pub amplitude: Amplitude<'a>,
}

/// Integrand on `(0, ∞)`.
pub struct HalfLineIntegrand<'a> {
    pub eval: Amplitude<'a>,
    /// Terms whose sum equals `eval` for `γ >= tail_start`.
    pub tail: Vec<TailTerm<'a>>,
    /// `|f(γ)| ~ γ^p` as `γ → 0`, `p > -1`.
    pub origin_exponent: f64,
    /// `|A_0(γ)| ~ γ^{-q}` for the non-oscillatory tail term, `q > 1`.
    pub tail_decay: f64,
    /// Order of the Möbius factor `((1+iγ)/(1-iγ))^m` carried by the integrand.
    pub mobius: i64,
    pub tail_start: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

type Source<'s> = &'s (dyn Fn(f64) -> Complex64 + Sync + 's);

/// 15-point Kronrod rule with the 7-point Gauss error estimate.
fn gk15(f: Source<'_>, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let h = h.abs();
    let result = resk * h;
    let resasc = resasc * h;
    let resabs = resabs * h;
    let mut err = ((resk - resg) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    if !result.re.is_finite() || !result.im.is_finite() {
        err = f64::INFINITY;
    }
    (result, err)
}

struct Panel {
    a: f64,
    b: f64,
    src: usize,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Global adaptive bisection over a set of initial panels, each attached to
/// one of `sources`.
fn adaptive(
    sources: &[Source<'_>],
    initial: &[(f64, f64, usize)],
    spec: &QuadratureSpec,
    context: &str,
) -> Result<Estimate> {
    if initial.len() > spec.max_panels {
        return Err(Error::Numerical {
            context: context.into(),
            detail: format!("{} initial panels exceed the panel budget", initial.len()),
            estimate: f64::NAN,
            error: f64::NAN,
            panels: initial.len(),
        });
    }
    let mut heap = BinaryHeap::with_capacity(initial.len() * 2);
    let mut frozen_value = Complex64::new(0.0, 0.0);
    let mut frozen_error = 0.0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    for &(a, b, src) in initial {
        if b <= a {
            continue;
        }
        let (value, error) = gk15(sources[src], a, b);
        total += value;
        total_err += error;
        heap.push(Panel { a, b, src, value, error });
    }
    let mut panels = heap.len();
    let mut since_resum = 0;
    loop {
        if total_err <= spec.target(total.norm()) {
            break;
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || worst.b - worst.a < 1e-14 * worst.a.abs().max(worst.b.abs()) {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        if panels >= spec.max_panels {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(sources[worst.src], worst.a, mid);
        let (v2, e2) = gk15(sources[worst.src], mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, src: worst.src, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, src: worst.src, value: v2, error: e2 });
        panels += 1;
        since_resum += 1;
        if since_resum == 256 {
            since_resum = 0;
            total = frozen_value + heap.iter().map(|p| p.value).sum::<Complex64>();
            total_err = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
        }
    }
    let value = frozen_value + heap.iter().map(|p| p.value).sum::<Complex64>();
    let error = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
    if !(error <= spec.target(value.norm())) {
        return Err(Error::Numerical {
            context: context.into(),
            detail: "adaptive refinement did not reach the tolerance".into(),
            estimate: value.norm(),
            error,
            panels,
        });
    }
    Ok(Estimate { value, error, panels })
}

/// Adaptive integral of a smooth (or integrably singular at the open
/// endpoints) function over `[a, b]`.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration bounds must be finite"));
    }
    if a == b {
        return Ok(Estimate::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let n = 8;
    let initial: Vec<_> = (0..n)
        .map(|k| {
            let x0 = lo + (hi - lo) * k as f64 / n as f64;
            let x1 = if k + 1 == n { hi } else { lo + (hi - lo) * (k + 1) as f64 / n as f64 };
            (x0, x1, 0)
        })
        .collect();
    let est = adaptive(&[&f], &initial, spec, "integrate_interval")?;
    Ok(Estimate { value: est.value * sign, ..est })
}

/// Cutoff and breakpoint layout shared by every half-line integral.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub head: f64,
    pub cutoff: f64,
    pub breaks: Vec<f64>,
}

pub(crate) fn layout(
    omegas: &[f64],
    mobius: i64,
    tail_start: f64,
    spec: &QuadratureSpec,
) -> Layout {
    let m = mobius.unsigned_abs() as f64;
    let nonzero: Vec<f64> = omegas.iter().map(|w| w.abs()).filter(|&w| w > 0.0).collect();
    let w_min = nonzero.iter().cloned().fold(f64::INFINITY, f64::min);
    let w_max = nonzero.iter().cloned().fold(0.0, f64::max);
    let mut cutoff = spec.gamma_max.max(tail_start).max(4.0 * (m + 1.0));
    if w_min.is_finite() {
        cutoff = cutoff.max(20.0 * PI / w_min);
    }
    let head = (0.25f64).min(PI / (4.0 * (w_max + 2.0 * m + 1.0)));
    let mut breaks = vec![head];
    let mut g = head * 2.0;
    while g < 1.0 {
        breaks.push(g);
        g *= 2.0;
    }
    breaks.push(1.0);
    for &w in &nonzero {
        let step = PI / w;
        let mut k = (head / step).floor() + 1.0;
        while k * step < cutoff {
            breaks.push(k * step);
            k += 1.0;
        }
    }
    if mobius != 0 {
        let half = 2.0 * m;
        for k in 1..mobius.unsigned_abs() {
            let x = (k as f64 * PI / half).tan();
            if x > head && x < cutoff {
                breaks.push(x);
            }
        }
    }
    let mut g = 2.0;
    while g < cutoff {
        breaks.push(g);
        g *= 2.0;
    }
    breaks.push(cutoff);
    breaks.retain(|&x| x >= head && x <= cutoff);
    breaks.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(breaks.len());
    for x in breaks {
        match merged.last() {
            Some(&last) if x - last <= 1e-9 * x.max(1.0) => {}
            _ => merged.push(x),
        }
    }
    if *merged.last().unwrap() < cutoff {
        merged.push(cutoff);
    }
    Layout { head, cutoff, breaks: merged }
}

/// Integral over `(0, ∞)`.
pub fn integrate_half_line(f: &HalfLineIntegrand<'_>, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    let p = f.origin_exponent;
    if !(p > -1.0) {
        return Err(Error::domain(format!("origin exponent {p} is not integrable")));
    }
    let omegas: Vec<f64> = f.tail.iter().map(|t| t.omega).collect();
    let lay = layout(&omegas, f.mobius, f.tail_start, spec);
    let budget = spec.scaled(0.25);

    let head = lay.head;
    let inv = 1.0 / (1.0 + p);
    let eval = &f.eval;
    let head_src = move |v: f64| {
        let g = head * v.powf(inv);
        eval(g) * (head * inv * v.powf(inv - 1.0))
    };
    let plain_src = |g: f64| eval(g);

    let zero_terms: Vec<&TailTerm<'_>> = f.tail.iter().filter(|t| t.omega == 0.0).collect();
    let osc_terms: Vec<&TailTerm<'_>> = f.tail.iter().filter(|t| t.omega != 0.0).collect();
    let q = f.tail_decay;
    let cutoff = lay.cutoff;
    let has_zero = !zero_terms.is_empty();
    if has_zero && !(q > 1.0) {
        return Err(Error::domain(format!("tail decay exponent {q} is not integrable")));
    }
    let s = if has_zero { 1.0 / (q - 1.0) } else { 1.0 };
    let recip_src = |w: f64| {
        let g = cutoff * w.powf(-s);
        let jac = cutoff * s * w.powf(-s - 1.0);
        zero_terms.iter().map(|t| (t.amplitude)(g)).sum::<Complex64>() * jac
    };

    let sources: [Source<'_>; 3] = [&head_src, &plain_src, &recip_src];
    let mut initial = vec![(0.0, 0.5, 0), (0.5, 1.0, 0)];
    for w in lay.breaks.windows(2) {
        initial.push((w[0], w[1], 1));
    }
    if has_zero {
        initial.push((0.0, 0.5, 2));
        initial.push((0.5, 1.0, 2));
    }
    let body = adaptive(&sources, &initial, &budget, "half-line body")?;

    let mut total = body;
    for term in osc_terms {
        let t = oscillatory_tail(&term.amplitude, term.omega, cutoff, &budget)?;
        total = total.add(t);
    }
    if !(total.error <= spec.target(total.value.norm())) {
        return Err(Error::Numerical {
            context: "half-line integral".into(),
            detail: "combined error exceeds the tolerance".into(),
            estimate: total.value.norm(),
            error: total.error,
            panels: total.panels,
        });
    }
    Ok(total)
}

const WYNN_WINDOW: usize = 40;
const MAX_HALF_PERIODS: usize = 400;

/// `∫_start^∞ e^{iωγ} A(γ) dγ` by half-period summation and Wynn's epsilon
/// algorithm.
pub(crate) fn oscillatory_tail(
    amp: &Amplitude<'_>,
    omega: f64,
    start: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let step = PI / omega.abs();
    let src = |g: f64| Complex64::from_polar(1.0, omega * g) * amp(g);
    let piece_spec = spec.scaled(0.01);
    let mut sums: Vec<Complex64> = Vec::new();
    let mut running = Complex64::new(0.0, 0.0);
    let mut piece_err = 0.0;
    let mut panels = 0;
    let mut history: Vec<Complex64> = Vec::new();
    for k in 0..MAX_HALF_PERIODS {
        let a = start + k as f64 * step;
        let piece = adaptive(&[&src], &[(a, a + step, 0)], &piece_spec, "oscillatory tail piece")?;
        running += piece.value;
        piece_err += piece.error;
        panels += piece.panels;
        sums.push(running);
        if sums.len() < 6 {
            continue;
        }
        let from = sums.len().saturating_sub(WYNN_WINDOW);
        let est = wynn(&sums[from..]);
        history.push(est);
        let n = history.len();
        if n >= 3 {
            let d1 = (history[n - 1] - history[n - 2]).norm();
            let d2 = (history[n - 2] - history[n - 3]).norm();
            let tol = spec.target(est.norm());
            if d1 <= tol && d2 <= tol {
                return Ok(Estimate { value: est, error: d1 + d2 + piece_err, panels });
            }
        }
    }
    let est = history.last().copied().unwrap_or(running);
    Err(Error::Numerical {
        context: "oscillatory tail".into(),
        detail: format!("epsilon extrapolation did not settle after {MAX_HALF_PERIODS} half periods (ω = {omega})"),
        estimate: est.norm(),
        error: f64::NAN,
        panels,
    })
}

/// Wynn's epsilon algorithm; returns the deepest even-column entry.
pub(crate) fn wynn(seq: &[Complex64]) -> Complex64 {
    let n = seq.len();
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut prev = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur = seq.to_vec();
    let mut best = seq[n - 1];
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.norm() <= 1e-300 || !d.norm().is_finite() {
                return if column % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + d.inv());
        }
        prev = cur;
        cur = next;
        column += 1;
        if column % 2 == 0 {
            best = *cur.last().unwrap();
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn gk15_is_exact_for_polynomials() {
        let f = |x: f64| c(x.powi(10) - 3.0 * x.powi(3) + 1.0);
        let (v, _) = gk15(&f, -1.0, 2.0);
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 0.75 * (16.0 - 1.0) + 3.0;
        assert!((v.re - exact).abs() < 1e-12);
    }

    #[test]
    fn interval_with_endpoint_singularity() {
        let q = QuadratureSpec::default();
        let e = integrate_interval(|x| c(1.0 / x.sqrt()), 0.0, 1.0, &q).unwrap();
        assert!((e.re() - 2.0).abs() < 1e-7);
        let r = integrate_interval(|x| c(x), 1.0, 0.0, &q).unwrap();
        assert!((r.re() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        let mut s = Vec::new();
        let mut acc = 0.0;
        for k in 0..20 {
            acc += (-1f64).powi(k) / (2 * k + 1) as f64;
            s.push(c(acc));
        }
        assert!((wynn(&s).re - PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn power_head_and_reciprocal_tail() {
        // ∫_0^∞ γ^{-1/2}/(1+γ) dγ = π
        let f = HalfLineIntegrand {
            eval: Box::new(|g| c(g.powf(-0.5) / (1.0 + g))),
            tail: vec![TailTerm { omega: 0.0, amplitude: Box::new(|g| c(g.powf(-0.5) / (1.0 + g))) }],
            origin_exponent: -0.5,
            tail_decay: 1.5,
            mobius: 0,
            tail_start: 0.0,
        };
        let e = integrate_half_line(&f, &QuadratureSpec::default()).unwrap();
        assert!((e.re() - PI).abs() < 1e-7, "{}", e.re());
    }

    #[test]
    fn conditionally_convergent_sine_integral() {
        // ∫_0^∞ sin(γ)/γ dγ = π/2, written as Im of e^{iγ}/γ.
        let f = HalfLineIntegrand {
            eval: Box::new(|g| c(g.sin() / g)),
            tail: vec![
                TailTerm { omega: 1.0, amplitude: Box::new(|g| Complex64::new(0.0, -0.5) / g) },
                TailTerm { omega: -1.0, amplitude: Box::new(|g| Complex64::new(0.0, 0.5) / g) },
            ],
            origin_exponent: 0.0,
            tail_decay: 2.0,
            mobius: 0,
            tail_start: 0.0,
        };
        let e = integrate_half_line(&f, &QuadratureSpec::default()).unwrap();
        assert!((e.re() - PI / 2.0).abs() < 1e-7, "{}", e.re());
        assert!(e.im().abs() < 1e-7);
    }

    #[test]
    fn oscillatory_power_law_tail() {
        // ∫_0^∞ γ^{-1/2} cos γ dγ = sqrt(π/2)
        let f = HalfLineIntegrand {
            eval: Box::new(|g| c(g.cos() / g.sqrt())),
            tail: vec![
                TailTerm { omega: 1.0, amplitude: Box::new(|g| c(0.5 / g.sqrt())) },
                TailTerm { omega: -1.0, amplitude: Box::new(|g| c(0.5 / g.sqrt())) },
            ],
            origin_exponent: -0.5,
            tail_decay: 2.0,
            mobius: 0,
            tail_start: 0.0,
        };
        let e = integrate_half_line(&f, &QuadratureSpec::default()).unwrap();
        assert!((e.re() - (PI / 2.0).sqrt()).abs() < 1e-7, "{}", e.re());
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-6, 32.0, 100).is_err());
        assert!(QuadratureSpec::new(1e-8, 1e-6, 0.5, 100).is_err());
        assert!(QuadratureSpec::new(1e-8, 1e-6, 32.0, 100).is_ok());
    }

    #[test]
    fn panel_budget_exhaustion_is_reported() {
        let q = QuadratureSpec::new(1e-14, 1e-14, 32.0, 16).unwrap();
        let err = integrate_interval(|x| c((50.0 * x).sin() / x.sqrt()), 0.0, 10.0, &q).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }
}
