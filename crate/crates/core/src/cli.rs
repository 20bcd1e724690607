//! Command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::hill::{determinant_grid, LambdaGrid};
use crate::history::{parse_history, ForcingConfig, ForcingEvaluator, ForcingMethod};
use crate::integrator::simulate_system;
use crate::io::{fmt_f64, write_csv, write_csv_file, RunManifest};
use crate::reproduce::{reproduce_figures, trajectory_header, ReproduceOptions};
use crate::spectral::{
    classify_lti, find_eigenvalues, reconstruct_floquet, verify_floquet, FloquetClass, LtiCase, SearchStrip,
};
use crate::specfun::{mittag_leffler, MLParams};
use crate::system::{parse_system, SystemSpec};

#[derive(Debug, Parser)]
#[command(name = "frachill", version, about = "Stability of periodic solutions of fractional-order ODEs")]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved; nothing is random yet.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Analytic,
    Quadrature,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate E_{α,β}(z).
    Ml {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        im: f64,
    },
    /// Liouville-Weyl simulation of an LTP system.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        history: PathBuf,
        #[arg(long = "t-end")]
        t_end: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forcing term of a history at the given times.
    Forcing {
        #[arg(long)]
        history: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        times: String,
        #[arg(long, value_enum, default_value = "analytic")]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// log|det H_N(λ)| and σ_min over a grid.
    HillDet {
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "N")]
        n: usize,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        re: String,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        im: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Roots of the Hill determinant.
    Eig {
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// re0:re1:im0:im1
        #[arg(long, allow_hyphen_values = true)]
        strip: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Floquet-form solution of the root with the largest real part.
    Floquet {
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "t-end")]
        t_end: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, allow_hyphen_values = true)]
        strip: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare each valid Floquet solution against simulation.
    Verify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "t-end")]
        t_end: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, allow_hyphen_values = true)]
        strip: Option<String>,
    },
    /// Classify the eigenvalues of a constant matrix.
    Lti {
        #[arg(long)]
        alpha: f64,
        /// JSON array of rows.
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Regenerate all example datasets and the threshold report.
    Reproduce {
        #[arg(long)]
        outdir: PathBuf,
        #[arg(long = "grid-points", default_value_t = 201)]
        grid_points: usize,
    },
}

/// Exit status for a library error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Schema(_)
        | Error::Json(_)
        | Error::SymmetryViolation(_)
        | Error::DimensionMismatch(_)
        | Error::InvalidParameter(_) => 2,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::GammaPole(_) => "gamma_pole",
        Error::AccuracyNotReached { .. } => "accuracy_not_reached",
        Error::NonDiagonalizable(_) => "non_diagonalizable",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Schema(_) => "schema",
        Error::SymmetryViolation(_) => "symmetry_violation",
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::OutOfDomain { .. } => "out_of_domain",
        Error::Kink(_) => "kink",
        Error::DivergentForcing(_) => "divergent_forcing",
        Error::SingularForcing(_) => "singular_forcing",
        Error::NonFinite { .. } => "non_finite",
        Error::Quadrature(_) => "quadrature",
        Error::IterationFailure(_) => "iteration_failure",
        Error::InvalidClassification(_) => "invalid_classification",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

fn init_logging() {
    let level = match std::env::var("FRACHILL_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // fails harmlessly if the pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let msg = json!({"error": error_kind(&e), "message": e.to_string(), "exit_code": code});
            eprintln!("{msg}");
            code
        }
    }
}

fn parse_range(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidParameter(format!("expected start:stop:count, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() || b < a {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn parse_strip(s: &str) -> Result<SearchStrip> {
    let bad = || Error::InvalidParameter(format!("expected re0:re1:im0:im1, got '{s}'"));
    let v: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    if v.len() != 4 || v[1] < v[0] || v[3] < v[2] || v.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(SearchStrip { re: (v[0], v[1]), im: (v[2], v[3]) })
}

fn load_system(path: &Path) -> Result<SystemSpec> {
    parse_system(&fs::read_to_string(path)?)
}

fn params(pairs: &[(&str, serde_json::Value)]) -> BTreeMap<String, serde_json::Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// CSV to `path` with a manifest, or to `stdout` when no path is given.
#[allow(clippy::too_many_arguments)]
fn emit(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    command: &str,
    parameters: BTreeMap<String, serde_json::Value>,
    inputs: &[&Path],
    started: Instant,
) -> Result<()> {
    match out {
        Some(path) => {
            write_csv_file(path, &header, &rows)?;
            RunManifest::new(command, parameters, inputs, path, started.elapsed().as_secs_f64())?.write(path)?;
            Ok(())
        }
        None => write_csv(stdout, &header, &rows),
    }
}

fn strip_json(s: &Option<SearchStrip>) -> serde_json::Value {
    match s {
        Some(s) => json!([s.re.0, s.re.1, s.im.0, s.im.1]),
        None => serde_json::Value::Null,
    }
}

fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<()> {
    let started = Instant::now();
    match cmd {
        Command::Ml { alpha, beta, re, im } => {
            let v = mittag_leffler(MLParams::new(*alpha, *beta)?, Complex64::new(*re, *im))?;
            writeln!(stdout, "re,im")?;
            writeln!(stdout, "{},{}", fmt_f64(v.re), fmt_f64(v.im))?;
        }
        Command::Simulate { system, history, t_end, dt, out } => {
            let spec = load_system(system)?;
            let hist = parse_history(&fs::read_to_string(history)?)?;
            let tr = simulate_system(&spec, &hist, *t_end, *dt)?;
            let rows = tr
                .times
                .iter()
                .zip(&tr.values)
                .map(|(t, v)| std::iter::once(fmt_f64(*t)).chain(v.iter().map(|x| fmt_f64(*x))).collect())
                .collect();
            let p = params(&[("t_end", json!(t_end)), ("dt", json!(dt)), ("scheme", json!(tr.scheme))]);
            emit(out.as_deref(), stdout, trajectory_header(tr.dim()), rows, "simulate", p, &[system, history], started)?;
        }
        Command::Forcing { history, alpha, times, method, out } => {
            let hist = parse_history(&fs::read_to_string(history)?)?;
            let method = match method {
                MethodArg::Analytic => ForcingMethod::Analytic,
                MethodArg::Quadrature => ForcingMethod::Quadrature,
            };
            let dim = hist.dim();
            let fe = ForcingEvaluator::with_config(hist, *alpha, ForcingConfig { method, ..ForcingConfig::default() })?;
            let grid = parse_range(times)?;
            let ts = LambdaGrid { re: grid, im: (0.0, 0.0, 1) }.points();
            let mut rows = Vec::with_capacity(ts.len());
            for t in ts {
                let f = fe.forcing(t.re)?;
                rows.push(std::iter::once(fmt_f64(t.re)).chain(f.iter().map(|x| fmt_f64(*x))).collect());
            }
            let header = std::iter::once("t".to_string()).chain((1..=dim).map(|i| format!("f{i}"))).collect();
            let p = params(&[("alpha", json!(alpha)), ("times", json!(times)), ("method", json!(format!("{method:?}")))]);
            emit(out.as_deref(), stdout, header, rows, "forcing", p, &[history], started)?;
        }
        Command::HillDet { system, n, re, im, out } => {
            let spec = load_system(system)?;
            let grid = LambdaGrid { re: parse_range(re)?, im: parse_range(im)? };
            let evals = determinant_grid(&spec, *n, &grid)?;
            let rows = evals
                .iter()
                .map(|e| vec![fmt_f64(e.lambda.re), fmt_f64(e.lambda.im), fmt_f64(e.log_abs_det), fmt_f64(e.sigma_min)])
                .collect();
            let header = ["re", "im", "log_abs_det", "sigma_min"].map(String::from).to_vec();
            let p = params(&[("N", json!(n)), ("re", json!(re)), ("im", json!(im))]);
            emit(out.as_deref(), stdout, header, rows, "hill-det", p, &[system], started)?;
        }
        Command::Eig { system, n, tol, strip, out } => {
            let spec = load_system(system)?;
            let strip = strip.as_deref().map(parse_strip).transpose()?;
            let eigs = find_eigenvalues(&spec, *n, strip, *tol)?;
            let rows = eigs
                .iter()
                .map(|e| {
                    vec![
                        fmt_f64(e.lambda.re),
                        fmt_f64(e.lambda.im),
                        fmt_f64(e.residual),
                        e.classification.as_str().to_string(),
                    ]
                })
                .collect();
            let header = ["re", "im", "residual", "classification"].map(String::from).to_vec();
            let p = params(&[("N", json!(n)), ("tol", json!(tol)), ("strip", strip_json(&strip))]);
            emit(out.as_deref(), stdout, header, rows, "eig", p, &[system], started)?;
        }
        Command::Floquet { system, n, t_end, dt, tol, strip, out } => {
            let spec = load_system(system)?;
            let strip = strip.as_deref().map(parse_strip).transpose()?;
            let eigs = find_eigenvalues(&spec, *n, strip, *tol)?;
            let ep = eigs
                .iter()
                .rfind(|e| e.classification == FloquetClass::ValidFloquet)
                .ok_or_else(|| Error::InvalidParameter("no root with Re >= 0 in the search strip".into()))?;
            let steps = ((t_end / dt).round() as usize).max(1);
            let times: Vec<f64> = (0..=steps).map(|j| j as f64 * dt).collect();
            let rec = reconstruct_floquet(ep, &spec, &times)?;
            log::info!("imaginary residue of the reconstruction: {:.3e}", rec.imag_residue);
            let tr = rec.trajectory;
            let rows = tr
                .times
                .iter()
                .zip(&tr.values)
                .map(|(t, v)| std::iter::once(fmt_f64(*t)).chain(v.iter().map(|x| fmt_f64(*x))).collect())
                .collect();
            let p = params(&[
                ("N", json!(n)),
                ("t_end", json!(t_end)),
                ("dt", json!(dt)),
                ("lambda", json!([ep.lambda.re, ep.lambda.im])),
                ("strip", strip_json(&strip)),
            ]);
            emit(out.as_deref(), stdout, trajectory_header(tr.dim()), rows, "floquet", p, &[system], started)?;
        }
        Command::Verify { system, n, t_end, dt, tol, strip } => {
            let spec = load_system(system)?;
            let strip = strip.as_deref().map(parse_strip).transpose()?;
            let eigs = find_eigenvalues(&spec, *n, strip, *tol)?;
            writeln!(stdout, "lambda_re,lambda_im,max_rel_err")?;
            for ep in eigs.iter().filter(|e| e.classification == FloquetClass::ValidFloquet) {
                let err = verify_floquet(ep, &spec, *t_end, *dt)?;
                writeln!(stdout, "{},{},{}", fmt_f64(ep.lambda.re), fmt_f64(ep.lambda.im), fmt_f64(err))?;
            }
        }
        Command::Lti { alpha, matrix } => {
            let rows: Vec<Vec<f64>> = serde_json::from_str(&fs::read_to_string(matrix)?)?;
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Schema("matrix must be a non-empty square array of rows".into()));
            }
            let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            let cls = classify_lti(&a, *alpha)?;
            writeln!(stdout, "mu_re,mu_im,arg,case,s_re,s_im")?;
            for e in cls.entries {
                let case = match e.case {
                    LtiCase::A => "a",
                    LtiCase::B => "b",
                    LtiCase::C => "c",
                    LtiCase::Boundary => "boundary",
                };
                let (sr, si) = e.s.map_or((String::new(), String::new()), |s| (fmt_f64(s.re), fmt_f64(s.im)));
                writeln!(stdout, "{},{},{},{case},{sr},{si}", fmt_f64(e.mu.re), fmt_f64(e.mu.im), fmt_f64(e.arg))?;
            }
        }
        Command::Reproduce { outdir, grid_points } => {
            let report = reproduce_figures(outdir, &ReproduceOptions { grid_points: *grid_points })?;
            write!(stdout, "{}", report.render())?;
            if !report.all_passed() {
                return Err(Error::InvalidParameter("some checks failed; see report.txt".into()));
            }
        }
    }
    Ok(())
}
