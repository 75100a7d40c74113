//! The `wsl` command line: `verify`, `induce` and `report`.
//!
//! Settings resolve in the order defaults, `--config` file, flags; the
//! `WSL_OUT` environment variable overrides the output directory last.
//!
//! Exit codes: 0 success, 2 numerical failure, 64 usage error, 66 missing
//! input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::calculus::DerivativeMode::Analytic;
use crate::config::{ReportFormat, RunConfig};
use crate::error::Error;
use crate::inducer::{
    fundamental_forms, gauss_curvature_difference, induce_surface, mean_curvature_closure, path_independence_report, write_surface_csv,
};
use crate::suites::{run_verification, write_outcomes, Check, SuiteOutcome, VerifyPlan};
use crate::tolerance::{Tolerance, EXACT};
use crate::weierstrass::{gaussian_curvature, weierstrass_residual};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_INPUT: i32 = 66;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "wsl", version, about = "Surfaces from the generalized Weierstrass system, with residual verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every applicable verification suite and write one JSON report per suite.
    Verify(Flags),
    /// Build the surface, export OBJ and CSV, and compare its curvature with the prescribed one.
    Induce(Flags),
    /// Merge suite reports into one summary table.
    Report(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// key = value settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long = "A", allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long = "H0", allow_hyphen_values = true)]
    h0: Option<String>,
    /// Samples as NXxNY.
    #[arg(long)]
    grid: Option<String>,
    /// xmin,xmax,ymin,ymax.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// x,y of the integration basepoint.
    #[arg(long, allow_hyphen_values = true)]
    basepoint: Option<String>,
    #[arg(long = "tol-scale")]
    tol_scale: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Exit {
    code: i32,
    message: String,
}

impl Exit {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Exit { code, message: message.into() }
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::InvalidGrid(_) | Error::Parse(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        };
        Exit::new(code, e.to_string())
    }
}

type CmdResult = std::result::Result<String, Exit>;

fn resolve(flags: &Flags, wsl_out: Option<OsString>) -> Result<RunConfig, Exit> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Exit::new(EXIT_NO_INPUT, format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let pairs: [(&str, &Option<String>); 11] = [
        ("family", &flags.family),
        ("lambda", &flags.lambda),
        ("A", &flags.a),
        ("H0", &flags.h0),
        ("grid", &flags.grid),
        ("domain", &flags.domain),
        ("basepoint", &flags.basepoint),
        ("tol-scale", &flags.tol_scale),
        ("levels", &flags.levels),
        ("jobs", &flags.jobs),
        ("format", &flags.format),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            cfg.set(key, v).map_err(|e| Exit::new(EXIT_USAGE, format!("--{key}: {e}")))?;
        }
    }
    if let Some(out) = &flags.out {
        cfg.out = out.clone();
    }
    if let Some(out) = wsl_out.filter(|o| !o.is_empty()) {
        cfg.out = PathBuf::from(out);
    }
    Ok(cfg)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Exit> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Exit::new(EXIT_NUMERICAL, format!("thread pool: {e}")))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Exit {
    Exit::new(EXIT_NUMERICAL, format!("cannot write {}: {e}", path.display()))
}

fn verify_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.join("verify").join(cfg.family.name())
}

fn fmt_ratio(r: &[Option<f64>]) -> String {
    match r.last() {
        Some(Some(v)) => format!("{v:.2}"),
        Some(None) => "exact".into(),
        None => "-".into(),
    }
}

fn cmd_verify(cfg: &RunConfig) -> CmdResult {
    cfg.validate()?;
    let family = cfg.family()?;
    let grid = cfg.grid_spec(&family)?;
    let plan = VerifyPlan { family, grid, levels: cfg.levels, tol_multiplier: cfg.tol_scale, basepoint: cfg.basepoint };
    let outcomes = pool(cfg.jobs)?.install(|| run_verification(&plan))?;
    let dir = verify_dir(cfg);
    if dir.is_dir() {
        for entry in std::fs::read_dir(&dir).map_err(|e| io_err(&dir, e))?.flatten() {
            if entry.path().extension().is_some_and(|x| x == "json") {
                std::fs::remove_file(entry.path()).map_err(|e| io_err(&entry.path(), e))?;
            }
        }
    }
    let meta = json!({
        "version": VERSION,
        "params": cfg.params(),
        "domain": [grid.x_min, grid.x_max, grid.y_min, grid.y_max],
        "tol_multiplier": cfg.tol_scale,
    });
    write_outcomes(&outcomes, &dir, &meta).map_err(|e| io_err(&dir, e))?;
    std::fs::write(dir.join("run.conf"), cfg.to_text()).map_err(|e| io_err(&dir, e))?;
    if cfg.format == ReportFormat::Csv {
        std::fs::write(dir.join("suites.csv"), summary_csv(&rows(&outcomes))).map_err(|e| io_err(&dir, e))?;
    }
    let mut out = String::new();
    for o in &outcomes {
        let verdict = verdict(o);
        let norm = o.finest().map_or(f64::NAN, |l| l.max_norm);
        writeln!(out, "{verdict:<4} {:<28} max {norm:>10.3e}  ratio {}", o.suite, fmt_ratio(&o.convergence_ratios)).ok();
    }
    let failed: Vec<&SuiteOutcome> = outcomes.iter().filter(|o| !o.passed).collect();
    writeln!(out, "{} suites, {} failed; reports in {}", outcomes.len(), failed.len(), dir.display()).ok();
    if let Some(first) = failed.first() {
        print!("{out}");
        let names: Vec<&str> = failed.iter().map(|o| o.suite.as_str()).collect();
        return Err(Exit::new(
            EXIT_NUMERICAL,
            format!("failing suites: {} ({}: {})", names.join(", "), first.suite, first.failure.as_deref().unwrap_or("")),
        ));
    }
    Ok(out)
}

fn verdict(o: &SuiteOutcome) -> &'static str {
    match (o.check, o.passed) {
        (Check::Info, true) => "INFO",
        (_, true) => "PASS",
        (_, false) => "FAIL",
    }
}

fn cmd_induce(cfg: &RunConfig) -> CmdResult {
    cfg.validate()?;
    let family = cfg.family()?;
    let grid = cfg.grid_spec(&family)?;
    let base = match cfg.basepoint {
        Some((x, y)) => grid.nearest(x, y).ok_or_else(|| Exit::new(EXIT_USAGE, "basepoint outside the domain"))?,
        None => grid.center(),
    };
    let spinor = family.spinor(&grid)?;
    if spinor.is_zero() {
        return Err(Error::Degenerate("the spinor vanishes identically and the surface is a point".into()).into());
    }
    let mut out = String::new();
    let system = weierstrass_residual(&spinor, &family.mean_curvature(&grid)?, Analytic)?;
    if system.max_norm > EXACT {
        writeln!(out, "warning: spinor misses the system by {:.3e}; coordinates may depend on the path", system.max_norm).ok();
    }
    let (srf, ff, h, k, path) = pool(cfg.jobs)?.install(|| -> crate::error::Result<_> {
        let srf = induce_surface(&spinor, base)?;
        let ff = fundamental_forms(&srf)?;
        let h = mean_curvature_closure(&ff, &family.mean_curvature(&grid)?)?;
        let k = gauss_curvature_difference(&ff, &gaussian_curvature(&spinor, Analytic)?)?;
        let corner = (if base.0 < grid.nx / 2 { grid.nx - 1 } else { 0 }, if base.1 < grid.ny / 2 { grid.ny - 1 } else { 0 });
        let path = path_independence_report(&spinor, base, corner)?;
        Ok((srf, ff, h, k, path))
    })?;
    if ff.degenerate_points() > 0 {
        return Err(Error::Degenerate(format!("{} points with EG − F² ≤ 0", ff.degenerate_points())).into());
    }
    let dir = cfg.out.join("induce").join(cfg.family.name());
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let mesh = srf.to_mesh()?;
    mesh.write_obj(dir.join("surface.obj")).map_err(|e| io_err(&dir, e))?;
    write_surface_csv(&srf, &ff, dir.join("surface.csv")).map_err(|e| io_err(&dir, e))?;
    let hh = grid.h();
    let h_tol = Tolerance::for_suite("mean_curvature_closure").scaled(cfg.tol_scale).at(hh);
    let k_tol = Tolerance::for_suite("gauss_curvature_consistency").scaled(cfg.tol_scale).at(hh);
    let passed = h.passes(h_tol) && k.passes(k_tol);
    let doc = json!({
        "version": VERSION,
        "family": cfg.family.name(),
        "params": cfg.params(),
        "domain": [grid.x_min, grid.x_max, grid.y_min, grid.y_max],
        "grid": { "nx": grid.nx, "ny": grid.ny, "h": hh },
        "basepoint": [grid.x(base.0), grid.y(base.1)],
        "vertices": mesh.vertices.len(),
        "triangles": mesh.faces.len(),
        "imaginary_residue": srf.imaginary_residue(),
        "branch_consistency": srf.branch_consistency(),
        "h_closure_interior_max": h.max_norm,
        "h_tolerance": h_tol,
        "k_closure_interior_max": k.max_norm,
        "k_tolerance": k_tol,
        "passed": passed,
        "mean_curvature": h,
        "gauss_curvature": k,
        "path_independence": path,
    });
    let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    std::fs::write(dir.join("curvature.json"), text).map_err(|e| io_err(&dir, e))?;
    writeln!(out, "surface: {} vertices, {} triangles -> {}", mesh.vertices.len(), mesh.faces.len(), dir.join("surface.obj").display()).ok();
    writeln!(out, "max interior ||H_num| - |H||  {:.3e} (tol {h_tol:.3e})", h.max_norm).ok();
    writeln!(out, "max interior |K_num - K|      {:.3e} (tol {k_tol:.3e})", k.max_norm).ok();
    writeln!(out, "imaginary residue {:.3e}, path discrepancy {:.3e}", srf.imaginary_residue(), path.max_norm).ok();
    if !passed {
        print!("{out}");
        return Err(Exit::new(EXIT_NUMERICAL, "curvature closure exceeds tolerance"));
    }
    Ok(out)
}

/// One row of the consolidated summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: String,
    pub suite: String,
    pub max_norm: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: String,
    pub convergence_ratio: Option<f64>,
}

fn rows(outcomes: &[SuiteOutcome]) -> Vec<SummaryRow> {
    outcomes
        .iter()
        .map(|o| SummaryRow {
            family: o.family.clone(),
            suite: o.suite.clone(),
            max_norm: o.finest().map(|l| l.max_norm),
            tolerance: o.finest().and_then(|l| l.tolerance),
            verdict: verdict(o).to_string(),
            convergence_ratio: o.convergence_ratios.last().copied().flatten(),
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:e}"))
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("family,suite,max_norm,tolerance,verdict,convergence_ratio\n");
    for r in rows {
        writeln!(s, "{},{},{},{},{},{}", r.family, r.suite, opt(r.max_norm), opt(r.tolerance), r.verdict, opt(r.convergence_ratio)).ok();
    }
    s
}

/// Suite reports found under `<out>/verify/<family>/`, sorted by path.
pub fn collect_reports(out: &Path) -> std::io::Result<Vec<SuiteOutcome>> {
    let root = out.join("verify");
    let mut files = Vec::new();
    if root.is_dir() {
        for fam in std::fs::read_dir(&root)?.flatten() {
            if fam.path().is_dir() {
                for f in std::fs::read_dir(fam.path())?.flatten() {
                    if f.path().extension().is_some_and(|x| x == "json") {
                        files.push(f.path());
                    }
                }
            }
        }
    }
    files.sort();
    Ok(files.iter().filter_map(|p| serde_json::from_str(&std::fs::read_to_string(p).ok()?).ok()).collect())
}

fn cmd_report(cfg: &RunConfig) -> CmdResult {
    let outcomes = collect_reports(&cfg.out).map_err(|e| Exit::new(EXIT_NO_INPUT, format!("cannot read {}: {e}", cfg.out.display())))?;
    if outcomes.is_empty() {
        return Err(Exit::new(EXIT_NO_INPUT, format!("no reports found under {}", cfg.out.join("verify").display())));
    }
    let rows = rows(&outcomes);
    let failed = rows.iter().filter(|r| r.verdict == "FAIL").count();
    let overall = if failed == 0 { "PASS" } else { "FAIL" };
    let path = match cfg.format {
        ReportFormat::Json => {
            let p = cfg.out.join("summary.json");
            let doc = json!({ "version": VERSION, "overall": overall, "suites": rows.len(), "failed": failed, "rows": rows });
            std::fs::write(&p, serde_json::to_string_pretty(&doc).expect("json") + "\n").map_err(|e| io_err(&p, e))?;
            p
        }
        ReportFormat::Csv => {
            let p = cfg.out.join("summary.csv");
            std::fs::write(&p, summary_csv(&rows)).map_err(|e| io_err(&p, e))?;
            p
        }
    };
    let mut out = format!("{:<12} {:<28} {:>11} {:>11} {:>7}  verdict\n", "family", "suite", "max_norm", "tolerance", "ratio");
    let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3e}"));
    for r in &rows {
        let ratio = r.convergence_ratio.map_or("-".to_string(), |v| format!("{v:.2}"));
        writeln!(out, "{:<12} {:<28} {:>11} {:>11} {ratio:>7}  {}", r.family, r.suite, num(r.max_norm), num(r.tolerance), r.verdict).ok();
    }
    writeln!(out, "overall {overall}: {} suites, {failed} failed; summary in {}", rows.len(), path.display()).ok();
    if failed > 0 {
        print!("{out}");
        return Err(Exit::new(EXIT_NUMERICAL, "overall FAIL"));
    }
    Ok(out)
}

/// Runs the command line with an explicit `WSL_OUT` value.
pub fn run_with_env<I, T>(args: I, wsl_out: Option<OsString>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (flags, cmd): (&Flags, fn(&RunConfig) -> CmdResult) = match &cli.command {
        Command::Verify(f) => (f, cmd_verify),
        Command::Induce(f) => (f, cmd_induce),
        Command::Report(f) => (f, cmd_report),
    };
    match resolve(flags, wsl_out).and_then(|cfg| cmd(&cfg)) {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs the command line, reading `WSL_OUT` from the environment.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var_os("WSL_OUT"))
}
