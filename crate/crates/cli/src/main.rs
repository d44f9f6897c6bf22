mod point;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geodisc::continuation::{ContinuationConfig, ContinuationError, SolveConfig, TracePoint, TRACE_HEADER};
use geodisc::disc::{grid, CoeffEntry, FourierDisc};
use geodisc::domain::DomainSpec;
use geodisc::factor::spectral_factorize;
use geodisc::metrics::{geodesic_consistency, kobayashi_royden, lempert_distance, MetricsError, Solved};
use geodisc::stationary::{verify_e, DiscBundle, EReport, StationaryDisc, StationaryError};
use geodisc::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use output::{csv_writer, num, to_json, write_json};
use point::{format_point, parse_point_dim, PointError};

#[derive(Parser)]
#[command(name = "geodisc", version, about = "Extremal discs and invariant metrics of strongly convex domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lempert function (--to) or Kobayashi-Royden metric (--dir) at a point
    Solve {
        domain: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "dir", required_unless_present = "dir")]
        to: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        dir: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Certificates of a stored disc
    Verify {
        domain: PathBuf,
        disc: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        probe: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Lempert function on all ordered pairs of a point grid
    Table {
        domain: PathBuf,
        /// number of grid points
        #[arg(long)]
        grid: usize,
        /// Minkowski radius of the sampled points
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        /// samples per disc in boundary.csv
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Spectral factorization of a matrix symbol file
    Factorize {
        symbol: PathBuf,
        #[arg(long, default_value_t = 64)]
        order: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// truncation order N
    #[arg(long = "order", default_value_t = 64)]
    order: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol_res: f64,
    #[arg(long, default_value_t = 0.1)]
    initial_step: f64,
    #[arg(long, default_value_t = 1e-6)]
    min_step: f64,
    #[arg(long, default_value_t = 0.2)]
    max_step: f64,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// format of the summary on stdout
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    order: usize,
    tol_res: f64,
    continuation: ContinuationConfig,
    seed_rng: u64,
    output: PathBuf,
    format: Format,
}

impl std::fmt::Debug for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

impl RunConfig {
    fn from_args(a: &RunArgs) -> Result<Self, CliError> {
        if a.order < 8 {
            return Err(CliError::Input(format!("order must be at least 8, got {}", a.order)));
        }
        for (name, v) in [
            ("tol-res", a.tol_res),
            ("initial-step", a.initial_step),
            ("min-step", a.min_step),
            ("max-step", a.max_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Input(format!("{name} must be positive, got {v}")));
            }
        }
        if a.min_step > a.max_step {
            return Err(CliError::Input("min-step exceeds max-step".into()));
        }
        Ok(RunConfig {
            order: a.order,
            tol_res: a.tol_res,
            continuation: ContinuationConfig {
                initial_step: a.initial_step.min(a.max_step),
                min_step: a.min_step,
                max_step: a.max_step,
                tol_res: a.tol_res,
                max_steps: a.max_steps,
            },
            seed_rng: a.seed,
            output: a.out.clone(),
            format: a.format,
        })
    }

    fn solve(&self) -> SolveConfig {
        SolveConfig { order: self.order, continuation: self.continuation }
    }
}

#[derive(Debug, Error)]
enum CliError {
    /// exit code 1
    #[error("input error: {0}")]
    Input(String),
    /// exit code 2
    #[error("solver failure: {0}")]
    Solver(String),
    /// exit code 2, certificates ran but did not pass
    #[error("certificates failed: {0}")]
    Uncertified(String),
}

impl From<PointError> for CliError {
    fn from(e: PointError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_domain(path: &Path) -> Result<DomainSpec, CliError> {
    DomainSpec::from_json(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn interior(domain: &DomainSpec, p: &[C64], what: &str) -> Result<(), CliError> {
    match domain.minkowski(&domain.to_internal(p)) {
        Ok(mu) if mu < 1.0 => Ok(()),
        Ok(mu) => Err(CliError::Input(format!("{what} is not interior (Minkowski functional {mu})"))),
        Err(e) => Err(CliError::Input(format!("{what}: {e}"))),
    }
}

fn write_trace(path: &Path, trace: &[TracePoint]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(TRACE_HEADER)?;
    for p in trace {
        w.write_record([num(p.t), num(p.step), p.newton_iters.to_string(), num(p.residual), num(p.xi_or_lambda), num(p.holder_c)])?;
    }
    w.flush()?;
    Ok(())
}

fn solver_error(e: MetricsError, out: &Path) -> CliError {
    if let MetricsError::Solve(ContinuationError::StepUnderflow { trace, disc, .. }) = &e {
        // partial artifacts: the last accepted disc and the path up to the failure
        let _ = write_trace(&out.join("trace.csv"), trace);
        let _ = write_json(&out.join("disc.json"), &disc.to_bundle(None));
    }
    match e {
        MetricsError::Solve(ContinuationError::Stationary(StationaryError::InvalidConstraint(m))) => CliError::Input(m),
        e => CliError::Solver(e.to_string()),
    }
}

#[derive(Serialize)]
struct ResultFile<'a> {
    #[serde(flatten)]
    result: &'a geodisc::metrics::MetricsResult,
    z: String,
    target: String,
    config: &'a RunConfig,
}

fn summary_csv(kind: &str, s: &Solved) -> String {
    let r = &s.result;
    format!(
        "kind,value,xi_or_lambda,certificate_gap,certified\n{kind},{},{},{},{}\n",
        num(r.value),
        num(r.xi_or_lambda),
        num(r.certificate_gap),
        r.certified
    )
}

fn cmd_solve(domain: &Path, from: &str, to: Option<&str>, dir: Option<&str>, run: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(run)?;
    let dom = load_domain(domain)?;
    let n = dom.n();
    let z = parse_point_dim(from, n)?;
    interior(&dom, &z, "--from")?;
    fs::create_dir_all(&cfg.output)?;
    let (solved, target_text, kind) = match (to, dir) {
        (Some(w), None) => {
            let w = parse_point_dim(w, n)?;
            interior(&dom, &w, "--to")?;
            if w == z {
                return Err(CliError::Input("--from and --to coincide".into()));
            }
            (lempert_distance(&dom, &z, &w, &cfg.solve()), format_point(&w), "two-point")
        }
        (None, Some(v)) => {
            let v = parse_point_dim(v, n)?;
            if v.iter().all(|c| c.norm() == 0.0) {
                return Err(CliError::Input("--dir must be nonzero".into()));
            }
            (kobayashi_royden(&dom, &z, &v, &cfg.solve()), format_point(&v), "infinitesimal")
        }
        _ => return Err(CliError::Input("exactly one of --to and --dir is required".into())),
    };
    let s = solved.map_err(|e| solver_error(e, &cfg.output))?;
    let file = ResultFile { result: &s.result, z: format_point(&z), target: target_text, config: &cfg };
    write_json(&cfg.output.join("result.json"), &file)?;
    write_json(&cfg.output.join("disc.json"), &s.disc.to_bundle(Some(s.result.residuals.clone())))?;
    write_trace(&cfg.output.join("trace.csv"), &s.trace)?;
    match cfg.format {
        Format::Json => println!("{}", to_json(&file)),
        Format::Csv => print!("{}", summary_csv(kind, &s)),
    }
    if s.result.certified {
        Ok(())
    } else {
        Err(CliError::Uncertified(failures(&s.result.residuals, s.result.certificate_gap)))
    }
}

fn failures(rep: &EReport, gap: f64) -> String {
    let mut f = rep.failures.clone();
    if !(gap < geodisc::metrics::GAP_TOL) {
        f.push(format!("certificate gap {gap:e}"));
    }
    f.join("; ")
}

#[derive(Serialize)]
struct VerifyReport {
    #[serde(flatten)]
    report: EReport,
    geodesic_gap: Option<f64>,
    residual_norm: f64,
    passed: bool,
}

fn cmd_verify(domain: &Path, disc: &Path, probe: &str, out: &Path) -> Result<(), CliError> {
    let dom = load_domain(domain)?;
    let p = parse_point_dim(probe, dom.n())?;
    interior(&dom, &p, "--probe")?;
    let bundle: DiscBundle = serde_json::from_str(&read(disc)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", disc.display())))?;
    let d = StationaryDisc::from_bundle(&bundle).map_err(|e| CliError::Uncertified(e.to_string()))?;
    if d.n() != dom.n() {
        return Err(CliError::Input(format!("disc has dimension {}, domain has {}", d.n(), dom.n())));
    }
    let report = verify_e(&dom, &d, &dom.to_internal(&p));
    let pairs = [(C64::new(0.0, 0.0), C64::new(0.3, 0.0)), (C64::new(0.0, 0.2), C64::new(-0.4, 0.1))];
    let geodesic_gap = geodesic_consistency(&d, &pairs).ok();
    let passed = report.passed && geodesic_gap.is_some_and(|g| g < geodisc::metrics::GAP_TOL);
    let mut failed = report.failures.clone();
    match geodesic_gap {
        None => failed.push("left inverse failed".into()),
        Some(g) if !(g < geodisc::metrics::GAP_TOL) => failed.push(format!("geodesic gap {g:e}")),
        _ => {}
    }
    let rep = VerifyReport { report, geodesic_gap, residual_norm: d.residual_norm, passed };
    fs::create_dir_all(out)?;
    write_json(&out.join("verify.json"), &rep)?;
    println!("{}", to_json(&rep));
    if passed {
        Ok(())
    } else {
        Err(CliError::Uncertified(failed.join("; ")))
    }
}

/// Deterministic points with Minkowski functional at most `radius`.
fn grid_points(dom: &DomainSpec, k: usize, radius: f64, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dom.n();
    (0..k)
        .map(|_| {
            let d: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let mu = dom.minkowski(&d).unwrap_or(1.0).max(f64::MIN_POSITIVE);
            let t = radius * rng.gen::<f64>().sqrt() / mu;
            dom.to_user(&d.iter().map(|a| a * t).collect::<Vec<_>>())
        })
        .collect()
}

struct Cell {
    i: usize,
    j: usize,
    /// `None` on the diagonal
    outcome: Option<Result<Solved, String>>,
}

fn cmd_table(domain: &Path, k: usize, radius: f64, samples: usize, run: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(run)?;
    let dom = load_domain(domain)?;
    if !(radius > 0.0 && radius < 1.0) {
        return Err(CliError::Input(format!("radius must lie in (0, 1), got {radius}")));
    }
    fs::create_dir_all(&cfg.output)?;
    let pts = grid_points(&dom, k, radius, cfg.seed_rng);
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let scfg = cfg.solve();
    // collect preserves the input order, so rows do not depend on scheduling
    let cells: Vec<Cell> = pairs
        .par_iter()
        .map(|&(i, j)| Cell {
            i,
            j,
            outcome: (i != j).then(|| lempert_distance(&dom, &pts[i], &pts[j], &scfg).map_err(|e| e.to_string())),
        })
        .collect();
    let mut table = csv_writer(&cfg.output.join("table.csv"))?;
    table.write_record(["i", "j", "z", "w", "value", "certificate_gap", "certified", "error"])?;
    let mut boundary = csv_writer(&cfg.output.join("boundary.csv"))?;
    let mut head = vec!["i".to_string(), "j".into(), "theta".into()];
    for l in 1..=dom.n() {
        head.push(format!("re_f{l}"));
        head.push(format!("im_f{l}"));
    }
    boundary.write_record(&head)?;
    let mut all_ok = true;
    for cell in &cells {
        let (zs, ws) = (format_point(&pts[cell.i]), format_point(&pts[cell.j]));
        match &cell.outcome {
            None => {
                table.write_record([cell.i.to_string(), cell.j.to_string(), zs, ws, num(0.0), num(0.0), "true".into(), String::new()])?;
            }
            Some(Ok(s)) => {
                let r = &s.result;
                all_ok &= r.certified;
                table.write_record([cell.i.to_string(), cell.j.to_string(), zs, ws, num(r.value), num(r.certificate_gap), r.certified.to_string(), String::new()])?;
                for (m, zeta) in grid(samples).into_iter().enumerate() {
                    let mut row = vec![cell.i.to_string(), cell.j.to_string(), num(2.0 * std::f64::consts::PI * m as f64 / samples as f64)];
                    for c in dom.to_user(&s.disc.f.eval_unchecked(zeta)) {
                        row.push(num(c.re));
                        row.push(num(c.im));
                    }
                    boundary.write_record(&row)?;
                }
            }
            Some(Err(e)) => {
                all_ok = false;
                table.write_record([cell.i.to_string(), cell.j.to_string(), zs, ws, String::new(), String::new(), "false".into(), e.clone()])?;
            }
        }
    }
    table.flush()?;
    boundary.flush()?;
    println!("{} pairs written to {}", k * k, cfg.output.join("table.csv").display());
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Uncertified("some grid cells failed".into()))
    }
}

/// Matrix symbol file: `size` and row-major coefficients in the dump format.
#[derive(Deserialize)]
struct SymbolFile {
    size: usize,
    coeffs: Vec<CoeffEntry>,
}

#[derive(Serialize)]
struct FactorFile {
    size: usize,
    h: Vec<CoeffEntry>,
    residual: f64,
    min_det: f64,
    det_winding: i64,
    iterations: usize,
}

fn cmd_factorize(symbol: &Path, order: usize, tol: f64, out: &Path) -> Result<(), CliError> {
    let sym: SymbolFile = serde_json::from_str(&read(symbol)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", symbol.display())))?;
    if sym.size == 0 {
        return Err(CliError::Input("size must be positive".into()));
    }
    if !(tol > 0.0) {
        return Err(CliError::Input("tol must be positive".into()));
    }
    let beta = FourierDisc::from_entries(&sym.coeffs, false).map_err(|e| CliError::Input(e.to_string()))?;
    if beta.m != sym.size * sym.size {
        return Err(CliError::Input(format!("entries have {} components, expected {}", beta.m, sym.size * sym.size)));
    }
    let f = spectral_factorize(&beta, sym.size, order, tol).map_err(|e| CliError::Solver(e.to_string()))?;
    let file = FactorFile {
        size: f.size,
        h: f.h.to_entries(),
        residual: f.residual,
        min_det: f.min_det,
        det_winding: f.det_winding,
        iterations: f.iterations,
    };
    fs::create_dir_all(out)?;
    write_json(&out.join("factor.json"), &file)?;
    println!("{}", to_json(&serde_json::json!({"residual": f.residual, "min_det": f.min_det, "det_winding": f.det_winding})));
    Ok(())
}

fn threads() {
    if let Some(k) = std::env::var("GEODISC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    threads();
    let res = match &cli.command {
        Command::Solve { domain, from, to, dir, run } => cmd_solve(domain, from, to.as_deref(), dir.as_deref(), run),
        Command::Verify { domain, disc, probe, out } => cmd_verify(domain, disc, probe, out),
        Command::Table { domain, grid, radius, samples, run } => cmd_table(domain, *grid, *radius, *samples, run),
        Command::Factorize { symbol, order, tol, out } => cmd_factorize(symbol, *order, *tol, out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geodisc: {e}");
            match e {
                CliError::Input(_) => ExitCode::from(1),
                CliError::Solver(_) | CliError::Uncertified(_) => ExitCode::from(2),
            }
        }
    }
}
