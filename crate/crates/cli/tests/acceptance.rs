//! Acceptance run: one PASS/FAIL line per criterion, written straight to
//! stderr so it shows without `--nocapture`.
//!
//! Known-unattainable check: the variance identity at H = 0.2 and J = 512.
//! The truncation deficit of Σ_{|j|≤J} r_j² decays like J^{-H}, which leaves
//! about 11% missing at J = 512 for H = 0.2. That line reports FAIL; the
//! test still requires the H = 0.5 and 0.7 parts of the criterion to hold
//! and the H = 0.2 deficit to follow the tail law.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fbm_chaos::prediction::{coeff_table_with_boundary, past_boundary};
use fbm_chaos::verify::{check_figure_dir, run_criterion, CriterionResult, Status, VerifyOptions, CRITERIA};
use fbm_chaos::{QuadratureSpec, SpectralModel};

fn report(line: &str) {
    let mut e = std::io::stderr().lock();
    let _ = writeln!(e, "{line}");
}

fn figures_via_binary(dir: &Path) -> CriterionResult {
    let start = Instant::now();
    let d = dir.to_str().unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for cmd in ["coeffs", "error-curve", "render-path"] {
        let o = Command::new(env!("CARGO_BIN_EXE_fbm-chaos"))
            .args([cmd, "--hurst", "0.7", "--t", "1", "--out", d, "--format", "both"])
            .output()
            .expect("binary runs");
        if o.status.code() != Some(0) {
            ok = false;
            detail.push(format!("{cmd} exited {:?}", o.status.code()));
        }
    }
    match check_figure_dir(dir) {
        Ok(checks) => {
            for (name, pass) in &checks {
                if !pass {
                    ok = false;
                    detail.push(name.clone());
                }
            }
            if ok {
                detail.push(format!("{} checks on binary output", checks.len()));
            }
        }
        Err(e) => {
            ok = false;
            detail.push(e.to_string());
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    CriterionResult {
        id: 10,
        name: "figure-reproduction",
        status: if ok && seconds < 300.0 { Status::Pass } else { Status::Fail },
        detail: detail.join("; "),
        seconds,
        budget: 300.0,
    }
}

/// Per-H truth of the variance identity: `(H, total at 256, total at 512)`.
fn variance_parts() -> Vec<(f64, f64, f64)> {
    let q = QuadratureSpec::default();
    [0.2, 0.5, 0.7]
        .iter()
        .map(|&h| {
            let m = SpectralModel::new(h).unwrap();
            let b = past_boundary(&m, &q).unwrap();
            let tbl = coeff_table_with_boundary(&m, 1.0, -512, 512, b, &q).unwrap();
            let e256: f64 = (-256..=256).map(|j| tbl.get(j).unwrap().powi(2)).sum();
            (h, e256, tbl.total_energy())
        })
        .collect()
}

#[test]
fn acceptance_criteria() {
    let opts = VerifyOptions::default();
    let dir = tempfile::tempdir().unwrap();
    let mut unexpected = Vec::new();
    report("acceptance criteria");
    for &(id, ..) in CRITERIA.iter() {
        let r = if id == 10 { figures_via_binary(dir.path()) } else { run_criterion(id, &opts) };
        report(&r.to_string());
        if r.passed() {
            continue;
        }
        if id == 4 {
            // allowed only in the documented form
            let parts = variance_parts();
            let mut explained = true;
            for &(h, e256, e512) in &parts {
                if h == 0.2 {
                    let ratio = (1.0 - e256) / (1.0 - e512);
                    let tail_law = e512 < 1.0 && (ratio / 2f64.powf(0.2) - 1.0).abs() < 0.1;
                    report(&format!(
                        "             known-unattainable: H=0.2 deficit {:.4} at J=512, deficit ratio 256->512 {ratio:.3} (J^-H law {:.3})",
                        1.0 - e512,
                        2f64.powf(0.2)
                    ));
                    explained &= tail_law;
                } else {
                    explained &= (e512 - 1.0).abs() <= 0.02;
                }
            }
            if explained {
                continue;
            }
        }
        unexpected.push(id);
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
