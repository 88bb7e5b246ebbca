use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbm_chaos::figures::{coeff_svg, error_curve, render_path, svg_plot, write_file, Series, Style};
use fbm_chaos::finite_horizon::{gram_csv, gram_of, HorizonBasis};
use fbm_chaos::prediction::{coeff_table_with_boundary, exact_error, past_boundary};
use fbm_chaos::simulate::{fbm_sample, mc_gram, Grid, MAX_INTERVALS};
use fbm_chaos::verify::{mutated_outer, run_criterion, Status, VerifyOptions, CRITERIA};
use fbm_chaos::{Error, QuadratureSpec, SpectralModel};

const MAX_INDEX: i64 = 4096;

#[derive(Parser)]
#[command(name = "fbm-chaos", version, about = "Chaos expansions and prediction for fractional Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients r_j(t) of B_H(t) in the basis, with past/future class.
    Coeffs(Common),
    /// Mean-square prediction error against the number of past coefficients.
    ErrorCurve(Common),
    /// One synthetic path split into its past and future components.
    RenderPath(Common),
    /// Exact fBm sample path on [-L, L].
    Simulate(Common),
    /// Monte Carlo Gram matrix of the pathwise basis integrals.
    Gram(Common),
    /// Bessel-kernel basis on a bounded window [-T, T].
    FiniteHorizon(Common),
    /// Run the verification criteria.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long, allow_hyphen_values = true)]
    hurst: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Observation horizon T for finite-horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of basis elements for finite-horizon.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    jmin: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    jmax: Option<i64>,
    #[arg(long = "grid-l")]
    grid_l: Option<f64>,
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "tol-abs")]
    tol_abs: Option<f64>,
    #[arg(long = "tol-rel")]
    tol_rel: Option<f64>,
    /// Output directory; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct VerifyArgs {
    /// Skip the Monte Carlo criteria.
    #[arg(long)]
    quick: bool,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    /// Replace the outer factor with a phase-flipped version.
    #[arg(long, hide = true)]
    mutate_outer: bool,
    #[command(flatten)]
    common: Common,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
struct RunConfig {
    hurst: f64,
    t: f64,
    horizon: f64,
    count: usize,
    window: (i64, i64),
    grid_l: f64,
    grid_n: usize,
    paths: usize,
    seed: u64,
    quadrature: QuadratureSpec,
    out: Option<PathBuf>,
    format: Format,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_config(path: &Path) -> std::result::Result<BTreeMap<String, String>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, Failure> {
    v.parse().map_err(|_| usage(format!("invalid value {v:?} for {key}")))
}

/// Fills unset flags from the config file.
fn merge_config(c: &Common) -> std::result::Result<Common, Failure> {
    let mut c = c.clone();
    let Some(path) = c.config.clone() else { return Ok(c) };
    for (k, v) in read_config(&path)? {
        match k.as_str() {
            "hurst" => c.hurst = c.hurst.or(Some(parse_value(&k, &v)?)),
            "t" => c.t = c.t.or(Some(parse_value(&k, &v)?)),
            "horizon" => c.horizon = c.horizon.or(Some(parse_value(&k, &v)?)),
            "count" => c.count = c.count.or(Some(parse_value(&k, &v)?)),
            "jmin" => c.jmin = c.jmin.or(Some(parse_value(&k, &v)?)),
            "jmax" => c.jmax = c.jmax.or(Some(parse_value(&k, &v)?)),
            "grid-l" => c.grid_l = c.grid_l.or(Some(parse_value(&k, &v)?)),
            "grid-n" => c.grid_n = c.grid_n.or(Some(parse_value(&k, &v)?)),
            "paths" => c.paths = c.paths.or(Some(parse_value(&k, &v)?)),
            "seed" => c.seed = c.seed.or(Some(parse_value(&k, &v)?)),
            "tol-abs" => c.tol_abs = c.tol_abs.or(Some(parse_value(&k, &v)?)),
            "tol-rel" => c.tol_rel = c.tol_rel.or(Some(parse_value(&k, &v)?)),
            "out" => c.out = c.out.or(Some(PathBuf::from(v))),
            "format" => {
                let f = Format::from_str(&v, true).map_err(|_| usage(format!("invalid format {v:?}")))?;
                c.format = c.format.or(Some(f));
            }
            _ => return Err(usage(format!("unknown config key {k:?}"))),
        }
    }
    Ok(c)
}

struct Defaults {
    window: (i64, i64),
    grid_l: f64,
    grid_n: usize,
}

fn resolve(c: &Common, d: Defaults) -> std::result::Result<RunConfig, Failure> {
    let c = merge_config(c)?;
    let defaults = QuadratureSpec::default();
    let quadrature = QuadratureSpec::with_tolerances(
        c.tol_abs.unwrap_or(defaults.abs_tol),
        c.tol_rel.unwrap_or(defaults.rel_tol),
    )?;
    let cfg = RunConfig {
        hurst: c.hurst.unwrap_or(0.7),
        t: c.t.unwrap_or(1.0),
        horizon: c.horizon.unwrap_or(1.0),
        count: c.count.unwrap_or(5),
        window: (c.jmin.unwrap_or(d.window.0), c.jmax.unwrap_or(d.window.1)),
        grid_l: c.grid_l.unwrap_or(d.grid_l),
        grid_n: c.grid_n.unwrap_or(d.grid_n),
        paths: c.paths.unwrap_or(10_000),
        seed: c.seed.unwrap_or(1),
        quadrature,
        out: c.out,
        format: c.format.unwrap_or(Format::Csv),
    };
    if !(cfg.hurst > 0.0 && cfg.hurst < 1.0) {
        return Err(usage(format!("--hurst {} must lie in (0, 1)", cfg.hurst)));
    }
    if !cfg.t.is_finite() {
        return Err(usage("--t must be finite"));
    }
    if cfg.window.0 > cfg.window.1 || cfg.window.0 < -MAX_INDEX || cfg.window.1 > MAX_INDEX {
        return Err(usage(format!("index window {:?} must be ordered and within ±{MAX_INDEX}", cfg.window)));
    }
    if cfg.grid_n == 0 || cfg.grid_n > MAX_INTERVALS {
        return Err(usage(format!("--grid-n {} must lie in 1..={MAX_INTERVALS}", cfg.grid_n)));
    }
    if !(cfg.grid_l > 0.0 && cfg.grid_l.is_finite()) {
        return Err(usage("--grid-l must be positive"));
    }
    if cfg.format != Format::Csv && cfg.out.is_none() {
        return Err(usage("--format svg/both needs --out"));
    }
    Ok(cfg)
}

/// Writes `name.csv` and/or `name.svg` under `--out`, or the CSV to stdout.
fn emit(cfg: &RunConfig, name: &str, csv: &str, svg: impl FnOnce() -> String) -> Outcome {
    let Some(dir) = &cfg.out else {
        print!("{csv}");
        return Ok(());
    };
    std::fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    if cfg.format != Format::Svg {
        write_file(&dir.join(format!("{name}.csv")), csv)?;
    }
    if cfg.format != Format::Csv {
        write_file(&dir.join(format!("{name}.svg")), &svg())?;
    }
    Ok(())
}

/// Footer line goes to stdout unless stdout carries the CSV.
fn note(cfg: &RunConfig, msg: &str) {
    if cfg.out.is_some() {
        println!("{msg}");
    } else {
        eprintln!("{msg}");
    }
}

fn cmd_coeffs(c: &Common) -> Outcome {
    let cfg = resolve(c, Defaults { window: (-64, 64), grid_l: 8.0, grid_n: 1024 })?;
    let m = SpectralModel::new(cfg.hurst)?;
    let j_star = past_boundary(&m, &cfg.quadrature)?;
    let tbl = coeff_table_with_boundary(&m, cfg.t, cfg.window.0, cfg.window.1, j_star, &cfg.quadrature)?;
    emit(&cfg, "coeffs", &tbl.to_csv(), || coeff_svg(&tbl))?;
    let var = cfg.t.abs().powf(2.0 * cfg.hurst);
    let sum = tbl.total_energy();
    let gap = if var > 0.0 { format!("{:.3}%", 100.0 * (sum - var).abs() / var) } else { "n/a".into() };
    note(
        &cfg,
        &format!(
            "# sum r^2 = {sum:.8} (past {:.8}, future {:.8}); Var B_H(t) = {var:.8}; gap {gap}; past boundary j* = {j_star}",
            tbl.past_energy(),
            tbl.future_energy()
        ),
    );
    Ok(())
}

fn cmd_error_curve(c: &Common) -> Outcome {
    let cfg = resolve(c, Defaults { window: (-512, 512), grid_l: 8.0, grid_n: 1024 })?;
    let m = SpectralModel::new(cfg.hurst)?;
    let j_star = past_boundary(&m, &cfg.quadrature)?;
    let tbl = coeff_table_with_boundary(&m, cfg.t, cfg.window.0, cfg.window.1, j_star, &cfg.quadrature)?;
    let curve = error_curve(&m, &tbl)?;
    emit(&cfg, "error_curve", &curve.to_csv(), || curve.to_svg())?;
    let last = curve.residuals.last().copied().unwrap_or(f64::NAN);
    note(&cfg, &format!("# final residual {last:.8}; exact {:.8}", exact_error(&m, cfg.t)?));
    Ok(())
}

fn cmd_render_path(c: &Common) -> Outcome {
    let cfg = resolve(c, Defaults { window: (-64, 64), grid_l: 2.0, grid_n: 80 })?;
    let m = SpectralModel::new(cfg.hurst)?;
    let j_star = past_boundary(&m, &cfg.quadrature)?;
    let grid = Grid::symmetric(cfg.grid_l, cfg.grid_n)?;
    let times = grid.points();
    let path = render_path(&m, cfg.window, j_star, &times, cfg.seed, &cfg.quadrature)?;
    emit(&cfg, "render_path", &path.to_csv(), || path.to_svg())
}

fn cmd_simulate(c: &Common) -> Outcome {
    let cfg = resolve(c, Defaults { window: (-4, 4), grid_l: 8.0, grid_n: 1024 })?;
    let m = SpectralModel::new(cfg.hurst)?;
    let grid = Grid::symmetric(cfg.grid_l, cfg.grid_n)?;
    let path = fbm_sample(&m, &grid, cfg.seed)?;
    emit(&cfg, "simulate", &path.to_csv(), || {
        let pts = (0..path.values.len()).map(|k| (path.grid.t(k), path.values[k])).collect();
        svg_plot(
            &format!("fBm sample path, H = {}", cfg.hurst),
            "t",
            "B_H(t)",
            &[Series { label: "path".into(), points: pts, style: Style::Line, color: "#1f77b4" }],
        )
    })
}

fn cmd_gram(c: &Common) -> Outcome {
    let cfg = resolve(c, Defaults { window: (-4, 4), grid_l: 16.0, grid_n: 2048 })?;
    let m = SpectralModel::new(cfg.hurst)?;
    let grid = Grid::symmetric(cfg.grid_l, cfg.grid_n)?;
    let report = mc_gram(&m, cfg.window, &grid, cfg.paths, cfg.seed, &cfg.quadrature)?;
    emit(&cfg, "gram", &report.to_csv(), || {
        let k = report.indices.len();
        let diag = (0..k).map(|i| (report.indices[i] as f64, report.mean[i][i])).collect();
        let off = (1..k).map(|i| (report.indices[i] as f64, report.mean[i - 1][i])).collect();
        svg_plot(
            &format!("Monte Carlo Gram matrix, H = {}", cfg.hurst),
            "index n",
            "E[I(ξ_n) I(ξ_m)]",
            &[
                Series { label: "diagonal".into(), points: diag, style: Style::Stem, color: "#1f77b4" },
                Series { label: "first off-diagonal".into(), points: off, style: Style::Stem, color: "#d62728" },
            ],
        )
    })?;
    note(&cfg, &format!("# max z-score {:.3}; discretisation bias {:.3e}", report.max_z_score(), report.bias()));
    Ok(())
}

fn cmd_finite_horizon(c: &Common) -> Outcome {
    let cfg = resolve(c, Defaults { window: (-4, 4), grid_l: 8.0, grid_n: 1024 })?;
    let m = SpectralModel::new(cfg.hurst)?;
    let basis = HorizonBasis::new(&m, cfg.horizon, cfg.count, false, &cfg.quadrature)?;
    let g = gram_of(&m, &basis, &cfg.quadrature)?;
    match &cfg.out {
        Some(_) => {
            emit(&cfg, "finite_horizon_zeros", &basis.zeros_csv(), || {
                let pts = basis.points.iter().copied().zip(basis.norms.iter().copied()).collect();
                svg_plot(
                    &format!("Kernel basis points, H = {}, T = {}", cfg.hurst, cfg.horizon),
                    "2γ_n / T",
                    "kernel norm",
                    &[Series { label: "norm".into(), points: pts, style: Style::Stem, color: "#1f77b4" }],
                )
            })?;
            if cfg.format != Format::Svg {
                write_file(&cfg.out.as_ref().expect("checked").join("finite_horizon_gram.csv"), &gram_csv(&g))?;
            }
        }
        None => print!("{}", gram_csv(&g)),
    }
    let off = g
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, v)| v.abs()))
        .fold(0.0, f64::max);
    note(&cfg, &format!("# max off-diagonal {off:.3e}"));
    Ok(())
}

fn cmd_verify(v: &VerifyArgs) -> Outcome {
    let cfg = resolve(&v.common, Defaults { window: (-4, 4), grid_l: 8.0, grid_n: 1024 })?;
    let mut opts = VerifyOptions { quick: v.quick, quadrature: cfg.quadrature, ..VerifyOptions::default() };
    if let Some(seed) = v.common.seed {
        opts.seed = seed;
    }
    if let Some(paths) = v.common.paths {
        opts.paths = paths;
    }
    if v.mutate_outer {
        opts.outer = mutated_outer;
    }
    opts.out_dir = cfg.out.clone();
    let ids: Vec<u8> = if v.only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { v.only.clone() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(usage(format!("unknown criterion {bad}")));
    }
    let mut failed = false;
    for id in ids {
        let r = run_criterion(id, &opts);
        failed |= r.status == Status::Fail;
        println!("{r}");
    }
    if failed {
        Err(Failure::Verification)
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Coeffs(c) => cmd_coeffs(c),
        Command::ErrorCurve(c) => cmd_error_curve(c),
        Command::RenderPath(c) => cmd_render_path(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Gram(c) => cmd_gram(c),
        Command::FiniteHorizon(c) => cmd_finite_horizon(c),
        Command::Verify(v) => cmd_verify(v),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
