//! CSV tables and self-contained SVG plots for the coefficient profile, the
//! error convergence curve and the past/future path rendering.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::prediction::{coeff_r, exact_error, CoefficientTable};
use crate::quadrature::QuadratureSpec;
use crate::simulate::NormalStream;
use crate::spectral::SpectralModel;

/// Real number with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Stem,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: &'static str,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                xs = (xs.0.min(x), xs.1.max(x));
                ys = (ys.0.min(y), ys.1.max(y));
            }
        }
        if s.style == Style::Stem {
            ys = (ys.0.min(0.0), ys.1.max(0.0));
        }
    }
    if !xs.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if xs.1 - xs.0 <= 0.0 {
        xs = (xs.0 - 0.5, xs.1 + 0.5);
    }
    let pad = 0.05 * (ys.1 - ys.0).max(1e-12);
    (xs.0, xs.1, ys.0 - pad, ys.1 + pad)
}

/// Fixed 800×500 SVG with axes, tick labels and a legend.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 500" width="800" height="500" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="500" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="400" y="22" text-anchor="middle" font-size="15">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            HEIGHT - MARGIN_B + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(s, r#"<text x="400" y="492" text-anchor="middle">{}</text>"#, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="250" text-anchor="middle" transform="rotate(-90 16 250)">{}</text>"#,
        escape(y_label)
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#999" stroke-width="0.5"/>"##,
            sy(0.0),
            WIDTH - MARGIN_R
        );
    }
    for (k, ser) in series.iter().enumerate() {
        match ser.style {
            Style::Stem => {
                for &(x, y) in &ser.points {
                    let _ = writeln!(
                        s,
                        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{3}"/>"#,
                        sx(x),
                        sy(0.0),
                        sy(y),
                        ser.color
                    );
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{}"/>"#, sx(x), sy(y), ser.color);
                }
            }
            Style::Line | Style::Dashed => {
                let pts: Vec<String> = ser
                    .points
                    .iter()
                    .filter(|p| p.0.is_finite() && p.1.is_finite())
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                let dash = if ser.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                    ser.color,
                    pts.join(" ")
                );
            }
        }
        let ly = MARGIN_T + 16.0 + 16.0 * k as f64;
        let lx = WIDTH - MARGIN_R - 170.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{0}" x2="{1}" y2="{0}" stroke="{2}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 20.0,
            ser.color
        );
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 26.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        format!("{v:.3}")
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Stem plot of `r_j` against `j`, past and future in different colours.
pub fn coeff_svg(tbl: &CoefficientTable) -> String {
    let past: Vec<(f64, f64)> = tbl.entries().filter(|e| e.3).map(|e| (e.0 as f64, e.1)).collect();
    let future: Vec<(f64, f64)> = tbl.entries().filter(|e| !e.3).map(|e| (e.0 as f64, e.1)).collect();
    svg_plot(
        &format!("Chaos coefficients r_j(t), H = {}, t = {}", tbl.hurst, tbl.t),
        "j",
        "r_j(t)",
        &[
            Series { label: "past".into(), points: past, style: Style::Stem, color: "#1f77b4" },
            Series { label: "future".into(), points: future, style: Style::Stem, color: "#d62728" },
        ],
    )
}

/// Residual error after the `k` largest past coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub hurst: f64,
    pub t: f64,
    pub exact: f64,
    /// Past indices by decreasing `|r_j|`.
    pub order: Vec<i64>,
    /// `residuals[k]` uses the first `k` entries of `order`.
    pub residuals: Vec<f64>,
}

pub fn error_curve(m: &SpectralModel, tbl: &CoefficientTable) -> Result<ErrorCurve> {
    let mut past: Vec<(i64, f64)> = tbl.entries().filter(|e| e.3).map(|e| (e.0, e.1)).collect();
    past.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    let var = tbl.t.abs().powf(2.0 * tbl.hurst);
    let mut residuals = vec![var];
    let mut acc = 0.0;
    for &(_, r) in &past {
        acc += r * r;
        residuals.push(var - acc);
    }
    Ok(ErrorCurve {
        hurst: tbl.hurst,
        t: tbl.t,
        exact: exact_error(m, tbl.t.abs())?,
        order: past.iter().map(|p| p.0).collect(),
        residuals,
    })
}

impl ErrorCurve {
    /// CSV with header `k,residual_after_k_coeffs,exact`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,residual_after_k_coeffs,exact\n");
        for (k, r) in self.residuals.iter().enumerate() {
            let _ = writeln!(out, "{k},{},{}", fmt_real(*r), fmt_real(self.exact));
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let n = self.residuals.len();
        let curve = self.residuals.iter().enumerate().map(|(k, &r)| (k as f64, r)).collect();
        svg_plot(
            &format!("Error in estimating B_H({}), H = {}", self.t, self.hurst),
            "number of past coefficients",
            "mean-square error",
            &[
                Series { label: "truncated predictor".into(), points: curve, style: Style::Line, color: "#1f77b4" },
                Series {
                    label: "exact error".into(),
                    points: vec![(0.0, self.exact), ((n.max(2) - 1) as f64, self.exact)],
                    style: Style::Dashed,
                    color: "#d62728",
                },
            ],
        )
    }
}

/// Past and future components of one synthetic path built from iid basis
/// integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRender {
    pub hurst: f64,
    pub times: Vec<f64>,
    pub past: Vec<f64>,
    pub future: Vec<f64>,
}

/// Draws `I(ξ_j) ~ N(0,1)` for `j` in `window` and evaluates
/// `Σ_{past} r_j(t) I(ξ_j)` and `Σ_{future} r_j(t) I(ξ_j)` at `times`.
pub fn render_path(
    m: &SpectralModel,
    window: (i64, i64),
    boundary: i64,
    times: &[f64],
    seed: u64,
    q: &QuadratureSpec,
) -> Result<PathRender> {
    use rayon::prelude::*;
    if window.0 > window.1 {
        return Err(Error::domain("empty index window"));
    }
    let mut normals = NormalStream::new(seed, 0);
    let draws: Vec<(i64, f64)> = (window.0..=window.1).map(|j| (j, normals.next())).collect();
    let rows: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let mut past = 0.0;
            let mut future = 0.0;
            for &(j, z) in &draws {
                let (r, _) = coeff_r(m, j, t, q)?;
                if j <= boundary {
                    past += r * z;
                } else {
                    future += r * z;
                }
            }
            Ok((past, future))
        })
        .collect::<Result<_>>()?;
    Ok(PathRender {
        hurst: m.hurst(),
        times: times.to_vec(),
        past: rows.iter().map(|r| r.0).collect(),
        future: rows.iter().map(|r| r.1).collect(),
    })
}

impl PathRender {
    pub fn total(&self) -> Vec<f64> {
        self.past.iter().zip(&self.future).map(|(a, b)| a + b).collect()
    }

    /// CSV with header `t,past_component,future_component,total`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,past_component,future_component,total\n");
        for ((t, p), f) in self.times.iter().zip(&self.past).zip(&self.future) {
            let _ = writeln!(out, "{},{},{},{}", fmt_real(*t), fmt_real(*p), fmt_real(*f), fmt_real(p + f));
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let pts = |v: &[f64]| self.times.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
        svg_plot(
            &format!("fBm path split into past and future parts, H = {}", self.hurst),
            "t",
            "value",
            &[
                Series { label: "total".into(), points: pts(&self.total()), style: Style::Line, color: "#000000" },
                Series { label: "past component".into(), points: pts(&self.past), style: Style::Line, color: "#1f77b4" },
                Series { label: "future component".into(), points: pts(&self.future), style: Style::Dashed, color: "#d62728" },
            ],
        )
    }
}
