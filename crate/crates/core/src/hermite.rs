//! Hermite polynomials and Wiener chaos expansions.
//!
//! A chaos expansion is a finite sum `Σ_α c_α H_α` where `α` is a multi-index
//! over an orthonormal Gaussian basis `{E_j}` and `H_α = Π_j h_{α_j}(E_j)`.
//! Conditioning on the σ-field generated by a sub-family `{E_j : j ∈ P}` keeps
//! exactly the terms whose support lies in `P` ([`ChaosExpansion::condition`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest polynomial degree accepted; `171!` overflows `f64`.
pub const MAX_DEGREE: usize = 170;

/// Default cap on the total order of enumerated multi-indices.
pub const DEFAULT_MAX_ORDER: u32 = 12;

/// Coefficients smaller than this are not stored.
pub const COEFF_DROP: f64 = 1e-15;

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::domain(format!(
            "Hermite degree {n} exceeds {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// Probabilists' Hermite polynomial `h_n(x)` (`h_0 = 1`, `h_1 = x`).
pub fn hermite_eval(n: usize, x: f64) -> Result<f64> {
    hermite_param_eval(n, 1.0, x)
}

/// Hermite polynomial with parameter, `h_n^[α](x) = n! Σ_m α^m x^{n-2m} (-1/2)^m / (m!(n-2m)!)`.
///
/// Evaluated with the recurrence `h_{k+1} = x h_k - α k h_{k-1}`.
/// `h^[1]` is the standard family and `h^[0](x) = x^n`.
pub fn hermite_param_eval(n: usize, alpha: f64, x: f64) -> Result<f64> {
    check_degree(n)?;
    Ok(hermite_recurrence(n, alpha, x))
}

#[inline]
fn hermite_recurrence(n: usize, alpha: f64, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 1..n {
                let next = x * cur - alpha * k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `E[U^n | F]` when `U | F ~ N(mu, sigma2)`, i.e. `h_n^[-σ²](μ)`.
pub fn conditional_moment(n: usize, mu: f64, sigma2: f64) -> Result<f64> {
    if sigma2 < 0.0 || !sigma2.is_finite() {
        return Err(Error::domain(format!(
            "conditional variance must be nonnegative, got {sigma2}"
        )));
    }
    hermite_param_eval(n, -sigma2, mu)
}

/// `E[h_n(U) | F]` for a unit-variance Gaussian `U` with `μ = E[U | F]`.
///
/// `predictor_var` is `Var(μ) = 1 - σ²_MSE`, and the result is
/// `h_n^[predictor_var](μ)`. This follows from `E[h_n^[s](μ + σZ)] = h_n^[s-σ²](μ)`
/// with `s = 1` and `σ² = σ²_MSE`; passing the mean-square error itself as the
/// parameter gives the wrong second moment.
pub fn conditional_hermite(n: usize, mu: f64, predictor_var: f64) -> Result<f64> {
    if predictor_var < 0.0 || !predictor_var.is_finite() {
        return Err(Error::domain(format!(
            "predictor variance must be nonnegative, got {predictor_var}"
        )));
    }
    hermite_param_eval(n, predictor_var, mu)
}

/// Finitely supported map from basis index to multiplicity, kept sorted by
/// index with no zero entries so that equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex {
    entries: Vec<(i64, u32)>,
}

impl MultiIndex {
    /// The empty multi-index (the constant chaos element).
    pub fn empty() -> Self {
        Self::default()
    }

    /// `ε(j)`: multiplicity one at `j`.
    pub fn unit(j: i64) -> Self {
        Self {
            entries: vec![(j, 1)],
        }
    }

    /// Builds a canonical multi-index; repeated indices are merged and zero
    /// multiplicities discarded.
    pub fn from_pairs<I: IntoIterator<Item = (i64, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<i64, u32> = BTreeMap::new();
        for (j, m) in pairs {
            *map.entry(j).or_default() += m;
        }
        Self {
            entries: map.into_iter().filter(|&(_, m)| m > 0).collect(),
        }
    }

    pub fn entries(&self) -> &[(i64, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total order `|α| = Σ α_j`.
    pub fn order(&self) -> u32 {
        self.entries.iter().map(|&(_, m)| m).sum()
    }

    pub fn multiplicity(&self, j: i64) -> u32 {
        self.entries
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.iter().map(|&(j, _)| j)
    }

    /// `α! = Π_j α_j!`, the squared norm of `H_α`.
    pub fn factorial(&self) -> Result<f64> {
        let mut out = 1.0;
        for &(j, m) in &self.entries {
            if m as usize > MAX_DEGREE {
                return Err(Error::domain(format!(
                    "multiplicity {m} at index {j} exceeds {MAX_DEGREE}"
                )));
            }
            out *= factorial(m);
        }
        if !out.is_finite() {
            return Err(Error::domain("multi-index factorial overflows"));
        }
        Ok(out)
    }

    /// `H_α` evaluated at the given draws of the basis variables.
    pub fn eval<F: Fn(i64) -> Option<f64>>(&self, draws: F) -> Result<f64> {
        let mut out = 1.0;
        for &(j, m) in &self.entries {
            let x = draws(j).ok_or_else(|| Error::domain(format!("no draw for index {j}")))?;
            out *= hermite_param_eval(m as usize, 1.0, x)?;
        }
        Ok(out)
    }
}

/// `α!` as a free function, mirroring [`MultiIndex::factorial`].
pub fn multiindex_factorial(alpha: &MultiIndex) -> Result<f64> {
    alpha.factorial()
}

fn factorial(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

impl fmt::Display for MultiIndex {
    /// `j1:m1,j2:m2,...`, or `-` for the empty multi-index.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("-");
        }
        for (i, (j, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}:{m}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "-" {
            return Ok(Self::empty());
        }
        let mut pairs = Vec::new();
        for part in s.split(',') {
            let (j, m) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected `index:multiplicity`, got `{part}`")))?;
            let j: i64 = j
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad index `{j}`: {e}")))?;
            let m: u32 = m
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad multiplicity `{m}`: {e}")))?;
            if m == 0 {
                return Err(Error::Parse(format!("zero multiplicity at index {j}")));
            }
            pairs.push((j, m));
        }
        let alpha = Self::from_pairs(pairs.iter().copied());
        if alpha.entries.len() != pairs.len() {
            return Err(Error::Parse(format!("repeated index in `{s}`")));
        }
        Ok(alpha)
    }
}

/// Set of basis indices whose variables are measurable with respect to the
/// observed σ-field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PastSet {
    All,
    Empty,
    /// `{ j : j <= bound }`
    UpTo(i64),
    Indices(BTreeSet<i64>),
}

impl PastSet {
    pub fn contains(&self, j: i64) -> bool {
        match self {
            PastSet::All => true,
            PastSet::Empty => false,
            PastSet::UpTo(b) => j <= *b,
            PastSet::Indices(s) => s.contains(&j),
        }
    }

    pub fn contains_support(&self, alpha: &MultiIndex) -> bool {
        alpha.support().all(|j| self.contains(j))
    }
}

/// Sparse chaos expansion `Σ_α c_α H_α` over a closed window of basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosExpansion {
    window: (i64, i64),
    terms: BTreeMap<MultiIndex, f64>,
}

impl ChaosExpansion {
    /// Empty expansion over the index window `[lo, hi]`.
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain(format!("empty basis window [{lo}, {hi}]")));
        }
        Ok(Self {
            window: (lo, hi),
            terms: BTreeMap::new(),
        })
    }

    pub fn constant(lo: i64, hi: i64, c: f64) -> Result<Self> {
        let mut e = Self::new(lo, hi)?;
        e.add_term(MultiIndex::empty(), c)?;
        Ok(e)
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// Adds `c` to the coefficient of `alpha`; the entry is removed if the sum
    /// falls below [`COEFF_DROP`].
    pub fn add_term(&mut self, alpha: MultiIndex, c: f64) -> Result<()> {
        let (lo, hi) = self.window;
        if let Some(j) = alpha.support().find(|&j| j < lo || j > hi) {
            return Err(Error::domain(format!(
                "index {j} outside basis window [{lo}, {hi}]"
            )));
        }
        let v = self.terms.get(&alpha).copied().unwrap_or(0.0) + c;
        if v.abs() < COEFF_DROP {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, v);
        }
        Ok(())
    }

    /// Evaluates the expansion at a realisation of the basis variables.
    pub fn eval<F: Fn(i64) -> Option<f64>>(&self, draws: F) -> Result<f64> {
        let mut cache: BTreeMap<(i64, u32), f64> = BTreeMap::new();
        let mut total = 0.0;
        for (alpha, &c) in &self.terms {
            let mut prod = c;
            for &(j, m) in alpha.entries() {
                let h = match cache.get(&(j, m)) {
                    Some(&h) => h,
                    None => {
                        let x = draws(j)
                            .ok_or_else(|| Error::domain(format!("no draw for index {j}")))?;
                        let h = hermite_param_eval(m as usize, 1.0, x)?;
                        cache.insert((j, m), h);
                        h
                    }
                };
                prod *= h;
            }
            total += prod;
        }
        Ok(total)
    }

    /// Evaluates against an explicit index → value map.
    pub fn eval_map(&self, draws: &BTreeMap<i64, f64>) -> Result<f64> {
        self.eval(|j| draws.get(&j).copied())
    }

    /// Conditional expectation given the σ-field of `{E_j : j ∈ past}`: terms
    /// whose support lies in `past` are kept, all others have zero conditional
    /// mean and are dropped.
    pub fn condition(&self, past: &PastSet) -> ChaosExpansion {
        ChaosExpansion {
            window: self.window,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| past.contains_support(a))
                .map(|(a, &c)| (a.clone(), c))
                .collect(),
        }
    }

    /// `(E[Y], Var[Y])` from orthogonality: `Var = Σ_{α≠∅} c_α² α!`.
    pub fn mean_variance(&self) -> Result<(f64, f64)> {
        let mut mean = 0.0;
        let mut var = 0.0;
        for (alpha, &c) in &self.terms {
            if alpha.is_empty() {
                mean = c;
            } else {
                var += c * c * alpha.factorial()?;
            }
        }
        Ok((mean, var))
    }

    /// Text form: optional `# window lo hi` header, then one term per line as
    /// `j1:m1,j2:m2 <coefficient>` (constant term `- <coefficient>`), with
    /// coefficients at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("# window {} {}\n", self.window.0, self.window.1);
        for (alpha, c) in &self.terms {
            out.push_str(&format!("{alpha} {c:.16e}\n"));
        }
        out
    }

    /// Parses [`ChaosExpansion::to_text`] output. Without a window header the
    /// window is the hull of all supports (or `[0, 0]` when there are none).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut window = None;
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.first() == Some(&"window") {
                    if fields.len() != 3 {
                        return Err(Error::Parse(format!("line {}: malformed window header", lineno + 1)));
                    }
                    let lo = fields[1].parse().map_err(|e| Error::Parse(format!("window: {e}")))?;
                    let hi = fields[2].parse().map_err(|e| Error::Parse(format!("window: {e}")))?;
                    window = Some((lo, hi));
                }
                continue;
            }
            let (idx, coeff) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| Error::Parse(format!("line {}: expected `<multi-index> <coefficient>`", lineno + 1)))?;
            let alpha: MultiIndex = idx.parse()?;
            let c: f64 = coeff
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad coefficient: {e}", lineno + 1)))?;
            terms.push((alpha, c));
        }
        let (lo, hi) = window.unwrap_or_else(|| {
            let mut it = terms.iter().flat_map(|(a, _)| a.support());
            match it.next() {
                None => (0, 0),
                Some(first) => it.fold((first, first), |(l, h), j| (l.min(j), h.max(j))),
            }
        });
        let mut e = Self::new(lo, hi)?;
        for (alpha, c) in terms {
            e.add_term(alpha, c)?;
        }
        Ok(e)
    }
}

fn window_of(keys: impl Iterator<Item = i64>) -> (i64, i64) {
    let mut it = keys;
    match it.next() {
        None => (0, 0),
        Some(first) => it.fold((first, first), |(l, h), j| (l.min(j), h.max(j))),
    }
}

/// Relative mismatch between `Σ r_j²` and the declared total variance.
pub fn variance_mismatch(r: &BTreeMap<i64, f64>, total_variance: f64) -> f64 {
    let energy: f64 = r.values().map(|v| v * v).sum();
    (energy - total_variance).abs() / total_variance.abs().max(f64::MIN_POSITIVE)
}

/// Chaos expansion of `U²` for `U = Σ_j r_j E_j`:
/// constant `total_variance`, `r_j²` on `(j:2)` and `2 r_i r_j` on `(i:1, j:1)`
/// for `i < j`.
///
/// When `Σ r_j²` differs from `total_variance` (truncated windows) a warning is
/// logged; the expansion then evaluates to `U² + total_variance - Σ r_j²`.
pub fn wick_square(r: &BTreeMap<i64, f64>, total_variance: f64) -> ChaosExpansion {
    let gap = variance_mismatch(r, total_variance);
    if gap > 1e-9 {
        log::warn!(
            "wick_square: Σ r² differs from the declared variance {total_variance} by {:.3e} (relative)",
            gap
        );
    }
    let (lo, hi) = window_of(r.keys().copied());
    let mut terms = BTreeMap::new();
    let mut put = |alpha: MultiIndex, c: f64| {
        if c.abs() >= COEFF_DROP {
            terms.insert(alpha, c);
        }
    };
    put(MultiIndex::empty(), total_variance);
    let entries: Vec<(i64, f64)> = r.iter().map(|(&j, &v)| (j, v)).collect();
    for (a, &(i, ri)) in entries.iter().enumerate() {
        put(MultiIndex::from_pairs([(i, 2)]), ri * ri);
        for &(j, rj) in &entries[a + 1..] {
            put(MultiIndex::from_pairs([(i, 1), (j, 1)]), 2.0 * ri * rj);
        }
    }
    ChaosExpansion {
        window: (lo, hi),
        terms,
    }
}

/// Truncated chaos expansion of the Wick exponential `:e^U: = exp(U - Var(U)/2)`
/// for `U = Σ_n c_n E_n`: all multi-indices of total order `<= order`, with
/// coefficient `Π_n c_n^{α_n} / α_n!`.
pub fn wick_exponential(c: &BTreeMap<i64, f64>, order: u32) -> Result<ChaosExpansion> {
    wick_exponential_capped(c, order, DEFAULT_MAX_ORDER)
}

/// As [`wick_exponential`] with an explicit order cap.
pub fn wick_exponential_capped(
    c: &BTreeMap<i64, f64>,
    order: u32,
    max_order: u32,
) -> Result<ChaosExpansion> {
    if order == 0 || order > max_order {
        return Err(Error::domain(format!(
            "Wick exponential order {order} outside 1..={max_order}"
        )));
    }
    let support: Vec<(i64, f64)> = c.iter().map(|(&j, &v)| (j, v)).collect();
    let (lo, hi) = window_of(support.iter().map(|&(j, _)| j));
    let mut terms = BTreeMap::new();
    let mut current: Vec<(i64, u32)> = Vec::new();
    enumerate_exp(&support, 0, order, 1.0, &mut current, &mut terms);
    Ok(ChaosExpansion {
        window: (lo, hi),
        terms,
    })
}

fn enumerate_exp(
    support: &[(i64, f64)],
    pos: usize,
    remaining: u32,
    coeff: f64,
    current: &mut Vec<(i64, u32)>,
    out: &mut BTreeMap<MultiIndex, f64>,
) {
    if pos == support.len() {
        if coeff.abs() >= COEFF_DROP {
            out.insert(
                MultiIndex {
                    entries: current.clone(),
                },
                coeff,
            );
        }
        return;
    }
    let (j, cj) = support[pos];
    let mut factor = 1.0;
    for m in 0..=remaining {
        if m > 0 {
            factor *= cj / m as f64;
            current.push((j, m));
        }
        enumerate_exp(support, pos + 1, remaining - m, coeff * factor, current, out);
        if m > 0 {
            current.pop();
        }
    }
}
