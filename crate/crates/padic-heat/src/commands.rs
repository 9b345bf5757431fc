//! Command-line front end. Data (CSV, JSON, JSONL) goes to `--out` or
//! stdout; PASS/FAIL lines and diagnostics go to stderr, followed by a
//! one-line JSON summary (also written to `--summary` when given).
//!
//! Exit codes: 0 success, 1 a selected check failed or a computation
//! failed, 2 usage or input error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use padic_heat_core::diffusion::{SimConfig, StateWindow};
use padic_heat_core::elliptic::{generate_strongly_elliptic, is_elliptic_mod_p, is_strongly_elliptic, norm_identity_check};
use padic_heat_core::kernel::{radial_cdf, z_tent, KernelParams};
use padic_heat_core::num::{powi_p, sphere_volume};
use padic_heat_core::{PAdicPoint, Radius};

use crate::cache::KernelCache;
use crate::checks::{kernel_suites, run_acceptance, CheckResult, SUITE_COUNT};
use crate::io::{fmt_f64, load_poly, load_problem, poly_to_json, IoError, PolyDisplay};
use crate::sim::{simulate_parallel, write_csv, write_jsonl};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "PADIC_HEAT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "padic-heat", version, about = "Heat kernels, Cauchy problems and diffusions on Q_p^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format for data (default: csv for tables, json for the rest).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Also write the JSON summary to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radial table and cdf of the heat kernel at one time.
    Kernel(KernelArgs),
    /// Solve a Cauchy problem read from JSON.
    Solve(SolveArgs),
    /// Simulate paths of the associated jump process.
    Simulate(SimulateArgs),
    /// Check or generate strongly elliptic polynomials.
    #[command(subcommand)]
    Elliptic(EllipticCommand),
    /// Run the acceptance suites.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// The prime p.
    #[arg(long, value_parser = parse_prime)]
    pub p: u32,
    /// Dimension n.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub n: u32,
    /// Order α of the operator.
    #[arg(long, value_parser = parse_positive)]
    pub alpha: f64,
    /// Diffusion coefficient a.
    #[arg(long, value_parser = parse_positive)]
    pub a: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<KernelParams, Failure> {
        KernelParams::new(self.p, self.n, self.alpha, self.a).map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Time t > 0.
    #[arg(long, value_parser = parse_positive)]
    pub t: f64,
    /// Sphere exponents to tabulate, inclusive.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-10, 10])]
    pub m_range: Vec<i32>,
    /// Run the normalization, representation, semigroup and heat-equation suites.
    #[arg(long)]
    pub check: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem JSON (`-` for stdin).
    #[arg(long, short = 'f', value_name = "PATH")]
    pub problem: PathBuf,
    /// Evaluation times (default: the horizon T).
    #[arg(long, value_parser = parse_positive, num_args = 1..)]
    pub t: Vec<f64>,
    /// Sphere exponents of the evaluation points; the origin is always included.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-3, 3])]
    pub m_range: Vec<i32>,
    /// Also compute the equation residual at every row.
    #[arg(long)]
    pub residual: bool,
    /// Residual tolerance for the PASS/FAIL line.
    #[arg(long, default_value_t = 1e-5, value_parser = parse_positive)]
    pub tol: f64,
    /// Finite-difference step in t for the residual.
    #[arg(long, default_value_t = 1e-4, value_parser = parse_positive)]
    pub h: f64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_parser = parse_positive)]
    pub dt: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Valuation window of the state space: digits kept from p^LO to p^HI.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub window: Option<Vec<i32>>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EllipticCommand {
    /// Strong ellipticity and the norm identity for a polynomial JSON file.
    Check(EllipticCheckArgs),
    /// Generate a strongly elliptic polynomial in n variables.
    Gen(EllipticGenArgs),
}

#[derive(Debug, Args)]
pub struct EllipticCheckArgs {
    #[arg(short = 'f', long = "file", value_name = "PATH")]
    pub file: PathBuf,
    /// Random points for the norm identity.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Digits per coordinate.
    #[arg(long, default_value_t = 24)]
    pub width: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EllipticGenArgs {
    #[arg(long, value_parser = parse_prime)]
    pub p: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=8))]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Suites to run (1-13); all when omitted.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..=SUITE_COUNT as i64))]
    pub only: Vec<u32>,
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {s}"))
    }
}

fn parse_prime(s: &str) -> Result<u32, String> {
    let p: u32 = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if padic_heat_core::padic::is_prime(p) {
        Ok(p)
    } else {
        Err(format!("{p} is not prime"))
    }
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or input files: exit 2.
    Usage(String),
    /// A computation failed: exit 1.
    Runtime(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Unsupported(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<padic_heat_core::Error> for Failure {
    fn from(e: padic_heat_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("write failed: {e}"))
    }
}

impl From<crate::sim::WriteError> for Failure {
    fn from(e: crate::sim::WriteError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// What a command reports once it has run.
struct Report {
    summary: Value,
    passed: bool,
}

/// Runs a parsed command; returns the exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Kernel(a) => with_output(a.out.as_ref(), stdout, |out| cmd_kernel(a, cli.format, out, stderr)),
        Command::Solve(a) => with_output(a.out.as_ref(), stdout, |out| cmd_solve(a, cli.format, out, stderr)),
        Command::Simulate(a) => with_output(a.out.as_ref(), stdout, |out| cmd_simulate(a, cli.format, out)),
        Command::Elliptic(EllipticCommand::Check(a)) => with_output(a.out.as_ref(), stdout, |out| cmd_elliptic_check(a, out, stderr)),
        Command::Elliptic(EllipticCommand::Gen(a)) => with_output(a.out.as_ref(), stdout, |out| cmd_elliptic_gen(a, out, stderr)),
        Command::Check(a) => cmd_check(a, stderr),
    };
    let (code, summary) = match result {
        Ok(r) => (if r.passed { 0 } else { 1 }, r.summary),
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            (2, json!({ "error": m }))
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            (1, json!({ "error": m }))
        }
    };
    let mut summary = summary;
    if let Value::Object(map) = &mut summary {
        map.insert("exit_code".into(), json!(code));
    }
    let line = summary.to_string();
    let _ = writeln!(stderr, "{line}");
    if let Some(path) = &cli.summary {
        if let Err(e) = std::fs::write(path, format!("{line}\n")) {
            let _ = writeln!(stderr, "error: cannot write summary {}: {e}", path.display());
            return code.max(1);
        }
    }
    code
}

fn with_output<F>(path: Option<&PathBuf>, stdout: &mut dyn Write, f: F) -> Result<Report, Failure>
where
    F: FnOnce(&mut dyn Write) -> Result<Report, Failure>,
{
    match path {
        None => {
            let r = f(stdout)?;
            stdout.flush()?;
            Ok(r)
        }
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            let r = f(&mut w)?;
            w.flush()?;
            Ok(r)
        }
    }
}

fn range(v: &[i32]) -> Result<(i32, i32), Failure> {
    match *v {
        [lo, hi] if lo <= hi => Ok((lo, hi)),
        [lo, hi] => Err(Failure::Usage(format!("empty range {lo}..{hi}"))),
        _ => Err(Failure::Usage("a range needs two values".into())),
    }
}

fn print_checks(results: &[CheckResult], stderr: &mut dyn Write) -> std::io::Result<bool> {
    for r in results {
        writeln!(stderr, "{r}")?;
    }
    Ok(results.iter().all(|r| r.passed))
}

#[derive(Serialize)]
struct KernelRow {
    m: i32,
    radius: f64,
    z_value: f64,
    sphere_mass: f64,
    cdf: f64,
}

fn cmd_kernel(a: &KernelArgs, format: Option<Format>, out: &mut dyn Write, stderr: &mut dyn Write) -> Result<Report, Failure> {
    let k = a.model.params()?;
    let (lo, hi) = range(&a.m_range)?;
    let rows = (lo..=hi)
        .map(|m| {
            let z = z_tent(Radius::Sphere(m), a.t, &k)?;
            Ok(KernelRow {
                m,
                radius: powi_p(k.prime, m),
                z_value: z,
                sphere_mass: z * sphere_volume(k.prime, k.dim, m),
                cdf: radial_cdf(m, a.t, &k)?,
            })
        })
        .collect::<padic_heat_core::Result<Vec<_>>>()?;
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["m", "radius", "z_value", "sphere_mass", "cdf"])?;
            for r in &rows {
                w.write_record([r.m.to_string(), fmt_f64(r.radius), fmt_f64(r.z_value), fmt_f64(r.sphere_mass), fmt_f64(r.cdf)])?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer(&mut *out, &rows)?;
            writeln!(out)?;
        }
    }
    let mut summary = json!({
        "command": "kernel",
        "params": { "p": k.prime, "n": k.dim, "alpha": k.alpha, "a": k.a, "t": a.t },
        "rows": rows.len(),
        "z_origin": z_tent(Radius::Origin, a.t, &k)?,
    });
    let mut passed = true;
    if a.check {
        let results = kernel_suites(&k, a.t);
        passed = print_checks(&results, stderr)?;
        summary["checks"] = serde_json::to_value(&results)?;
    }
    summary["passed"] = json!(passed);
    Ok(Report { summary, passed })
}

fn cmd_solve(a: &SolveArgs, format: Option<Format>, out: &mut dyn Write, stderr: &mut dyn Write) -> Result<Report, Failure> {
    let prob = load_problem(&a.problem)?;
    let (lo, hi) = range(&a.m_range)?;
    let times = if a.t.is_empty() { vec![prob.horizon] } else { a.t.clone() };
    if let Some(&t) = times.iter().find(|&&t| t > prob.horizon || (a.residual && t + a.h > prob.horizon)) {
        return Err(Failure::Usage(format!(
            "time {t} is past the horizon T = {}{}",
            prob.horizon,
            if a.residual { " once the difference step is added; pass --t below T - h" } else { "" }
        )));
    }
    let (p, n) = (prob.params.prime, prob.params.dim as usize);
    let cache = KernelCache::new(prob.params);
    let field = padic_heat_core::cauchy::solve(&prob, &cache)?;
    let points: Vec<(Option<i32>, PAdicPoint)> =
        std::iter::once((None, PAdicPoint::zero(p, n))).chain((lo..=hi).map(|m| (Some(m), PAdicPoint::on_sphere(p, n, m)))).collect();
    let xs: Vec<PAdicPoint> = points.iter().map(|(_, x)| x.clone()).collect();

    #[derive(Serialize)]
    struct Row {
        x_id: usize,
        m: Option<i32>,
        t: f64,
        re_u: f64,
        im_u: f64,
        residual: Option<f64>,
    }
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &t in &times {
        let residuals = if a.residual { Some(field.residual_check(&xs, &[t], a.h)?) } else { None };
        for (i, (m, x)) in points.iter().enumerate() {
            let u = field.evaluate(x, t)?;
            let res = residuals.as_ref().and_then(|r| r.samples.iter().find(|s| &s.x == x && s.t == t)).map(|s| s.residual.norm());
            if let Some(r) = res {
                worst = worst.max(r);
            }
            rows.push(Row { x_id: i, m: *m, t, re_u: u.re, im_u: u.im, residual: res });
        }
    }
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["x_id", "m", "t", "re_u", "im_u", "residual"])?;
            for r in &rows {
                w.write_record([
                    r.x_id.to_string(),
                    r.m.map_or(String::new(), |m| m.to_string()),
                    fmt_f64(r.t),
                    fmt_f64(r.re_u),
                    fmt_f64(r.im_u),
                    r.residual.map_or(String::new(), fmt_f64),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer(&mut *out, &rows)?;
            writeln!(out)?;
        }
    }
    let cert = field.certificate();
    let mut summary = json!({
        "command": "solve",
        "problem": a.problem.display().to_string(),
        "rows": rows.len(),
        "growth": { "lambda": cert.lambda, "constant": cert.constant },
    });
    let mut passed = true;
    if a.residual {
        passed = worst < a.tol;
        writeln!(stderr, "{} residual: max |∂u/∂t + aD^αu - f| = {worst:.3e} (< {:.0e})", if passed { "PASS" } else { "FAIL" }, a.tol)?;
        summary["residual_max"] = json!(worst);
    }
    summary["passed"] = json!(passed);
    Ok(Report { summary, passed })
}

fn cmd_simulate(a: &SimulateArgs, format: Option<Format>, out: &mut dyn Write) -> Result<Report, Failure> {
    let k = a.model.params()?;
    let mut cfg = SimConfig::new(k, a.dt, a.steps, a.paths, a.seed);
    if let Some(w) = &a.window {
        let (lo, hi) = range(w)?;
        cfg.window = StateWindow::new(lo, hi).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let law = cfg.law()?;
    let trajectories = simulate_parallel(&cfg)?;
    match format.unwrap_or(Format::Json) {
        Format::Json => write_jsonl(out, &trajectories)?,
        Format::Csv => write_csv(out, &trajectories)?,
    }
    let clipped: usize = trajectories.iter().map(|t| t.clipped.iter().filter(|&&c| c).count()).sum();
    let summary = json!({
        "command": "simulate",
        "params": { "p": k.prime, "n": k.dim, "alpha": k.alpha, "a": k.a },
        "dt": a.dt, "steps": a.steps, "paths": a.paths, "seed": a.seed,
        "window": [cfg.window.lo, cfg.window.hi],
        "clipped_mass": law.clipped_mass,
        "clipped_draws": clipped,
        "passed": true,
    });
    Ok(Report { summary, passed: true })
}

fn cmd_elliptic_check(a: &EllipticCheckArgs, out: &mut dyn Write, stderr: &mut dyn Write) -> Result<Report, Failure> {
    let f = load_poly(&a.file)?;
    let mod_p = is_elliptic_mod_p(&f)?;
    let (strong, witness) = is_strongly_elliptic(&f)?;
    let norm = if strong { Some(norm_identity_check(&f, a.samples, a.width, a.seed)?) } else { None };
    let violations = norm.as_ref().map_or(0, |r| r.violations.len());
    let passed = strong && violations == 0;
    writeln!(stderr, "f = {}", PolyDisplay(&f))?;
    writeln!(stderr, "{} strongly elliptic mod {}", if strong { "PASS" } else { "FAIL" }, f.prime())?;
    if let Some(w) = &witness {
        writeln!(stderr, "     root {:?} on the stratum {:?}", w.point, w.subset.iter().map(|i| i + 1).collect::<Vec<_>>())?;
    }
    if let Some(r) = &norm {
        writeln!(stderr, "{} norm identity: {} violations in {} points", if violations == 0 { "PASS" } else { "FAIL" }, violations, r.checked)?;
    }
    let report = json!({
        "polynomial": poly_to_json(&f),
        "elliptic_mod_p": mod_p,
        "strongly_elliptic": strong,
        "witness": witness.map(|w| json!({ "subset": w.subset, "point": w.point })),
        "norm_identity": norm.as_ref().map(|r| json!({ "checked": r.checked, "violations": r.violations.len() })),
    });
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    let summary = json!({ "command": "elliptic check", "strongly_elliptic": strong, "violations": violations, "passed": passed });
    Ok(Report { summary, passed })
}

fn cmd_elliptic_gen(a: &EllipticGenArgs, out: &mut dyn Write, stderr: &mut dyn Write) -> Result<Report, Failure> {
    let f = generate_strongly_elliptic(a.p, a.n as usize, a.seed)?;
    writeln!(stderr, "f = {}", PolyDisplay(&f))?;
    serde_json::to_writer(&mut *out, &poly_to_json(&f))?;
    writeln!(out)?;
    let summary = json!({ "command": "elliptic gen", "p": a.p, "n": a.n, "degree": f.degree(), "terms": f.monomials().len(), "passed": true });
    Ok(Report { summary, passed: true })
}

fn cmd_check(a: &CheckArgs, stderr: &mut dyn Write) -> Result<Report, Failure> {
    let ids: Vec<u32> = if a.only.is_empty() { (1..=SUITE_COUNT).collect() } else { a.only.clone() };
    let mut results = Vec::new();
    for id in ids {
        let r = run_acceptance(id).ok_or_else(|| Failure::Usage(format!("no suite {id}")))?;
        writeln!(stderr, "{r}")?;
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    let summary = json!({ "command": "check", "checks": serde_json::to_value(&results)?, "passed": passed });
    Ok(Report { summary, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let cli = Cli::try_parse_from(std::iter::once("padic-heat").chain(args.iter().copied())).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(&cli, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_are_rejected_by_the_parser() {
        for args in [
            vec!["kernel", "--p", "2", "--n", "1", "--alpha", "1", "--a", "1", "--t", "0"],
            vec!["kernel", "--p", "4", "--n", "1", "--alpha", "1", "--a", "1", "--t", "1"],
            vec!["kernel", "--p", "2", "--n", "1", "--alpha", "1", "--a", "1", "--t", "1", "--bogus"],
        ] {
            let e = Cli::try_parse_from(std::iter::once("padic-heat").chain(args)).unwrap_err();
            assert_eq!(e.exit_code(), 2);
        }
    }

    #[test]
    fn kernel_table_rows() {
        let (code, out, _) = run_args(&["kernel", "--p", "2", "--n", "1", "--alpha", "1", "--a", "1", "--t", "1", "--m-range", "-10", "10"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "m,radius,z_value,sphere_mass,cdf");
        assert_eq!(lines.len(), 22);
        assert!(lines[1].starts_with("-10,9.7656250000000000e-4,"));
    }

    #[test]
    fn elliptic_gen_then_check() {
        let (code, out, err) = run_args(&["elliptic", "gen", "--p", "3", "--n", "2"]);
        assert_eq!(code, 0, "{err}");
        assert!(err.contains("x1^2 - 2*x2^2"), "{err}");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        std::fs::write(&path, out).unwrap();
        let (code, _, err) = run_args(&["elliptic", "check", "-f", path.to_str().unwrap(), "--samples", "200"]);
        assert_eq!(code, 0, "{err}");
        assert!(err.contains("PASS strongly elliptic"));
        let (code, _, _) = run_args(&["elliptic", "gen", "--p", "2", "--n", "2"]);
        assert_eq!(code, 1);
    }
}
