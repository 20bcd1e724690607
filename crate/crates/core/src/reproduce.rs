//! Regenerates every dataset of the worked examples into one directory and
//! checks the headline thresholds.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::error::Result;
use crate::hill::{determinant_grid, LambdaGrid};
use crate::history::HistoryFunction;
use crate::integrator::{simulate_system, Trajectory};
use crate::io::{fmt_f64, write_csv_file, RunManifest};
use crate::spectral::{
    find_eigenvalues, floquet_comparison, gershgorin, max_relative_error, Eigenpair, FloquetClass, SearchStrip,
    DEFAULT_TOL,
};
use crate::system::SystemSpec;

pub const MATHIEU_ALPHA: f64 = 0.9;
pub const MATHIEU_C: f64 = 1.0;
pub const MATHIEU_D: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproduceOptions {
    /// Points per axis of the determinant heat maps.
    pub grid_points: usize,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self { grid_points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceReport {
    pub checks: Vec<Check>,
    /// Every CSV written, in order.
    pub files: Vec<PathBuf>,
}

impl ReproduceReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        s
    }
}

pub fn scalar_example(b: f64) -> SystemSpec {
    SystemSpec::scalar_sinusoid(0.5, 1.0, -1.0, b).expect("valid parameters")
}

pub fn mathieu_example() -> SystemSpec {
    SystemSpec::mathieu(MATHIEU_ALPHA, 1.0, MATHIEU_C, MATHIEU_D).expect("valid parameters")
}

fn trajectory_rows(tr: &Trajectory) -> Vec<Vec<String>> {
    tr.times
        .iter()
        .zip(&tr.values)
        .map(|(t, v)| std::iter::once(fmt_f64(*t)).chain(v.iter().map(|x| fmt_f64(*x))).collect())
        .collect()
}

pub fn trajectory_header(dim: usize) -> Vec<String> {
    std::iter::once("t".to_string()).chain((1..=dim).map(|i| format!("y{i}"))).collect()
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn system(&self, name: &str, spec: &SystemSpec) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(&spec.to_document())?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    fn csv(
        &mut self,
        name: &str,
        header: Vec<String>,
        rows: Vec<Vec<String>>,
        params: BTreeMap<String, serde_json::Value>,
        inputs: &[&Path],
        started: Instant,
    ) -> Result<()> {
        let path = self.dir.join(name);
        write_csv_file(&path, &header, &rows)?;
        RunManifest::new("reproduce", params, inputs, &path, started.elapsed().as_secs_f64())?.write(&path)?;
        self.files.push(path);
        Ok(())
    }
}

fn eig_rows(label: &str, eigs: &[Eigenpair]) -> Vec<Vec<String>> {
    eigs.iter()
        .map(|e| {
            vec![
                label.to_string(),
                fmt_f64(e.lambda.re),
                fmt_f64(e.lambda.im),
                fmt_f64(e.residual),
                e.classification.as_str().to_string(),
            ]
        })
        .collect()
}

/// Writes the trajectory, determinant, eigenvalue and verification datasets
/// plus `report.txt` into `outdir`.
pub fn reproduce_figures(outdir: &Path, opts: &ReproduceOptions) -> Result<ReproduceReport> {
    fs::create_dir_all(outdir)?;
    let mut w = Writer { dir: outdir, files: Vec::new() };
    let mut checks = Vec::new();
    let n_scan = 20;

    // trajectories and determinant maps for the scalar example
    let constant = HistoryFunction::constant(&[1.0], 0.0)?;
    for (b, tag) in [(1.0, "b1"), (2.5, "b2.5")] {
        let spec = scalar_example(b);
        let sys = w.system(&format!("scalar_{tag}.json"), &spec)?;

        let started = Instant::now();
        let tr = simulate_system(&spec, &constant, 50.0, 0.01)?;
        let y_end = tr.last().map_or(f64::NAN, |(_, v)| v[0]);
        let params = BTreeMap::from([
            ("b".to_string(), json!(b)),
            ("t_end".to_string(), json!(50.0)),
            ("dt".to_string(), json!(0.01)),
            ("history".to_string(), json!("constant 1")),
        ]);
        w.csv(&format!("trajectory_{tag}.csv"), trajectory_header(1), trajectory_rows(&tr), params, &[&sys], started)?;

        let started = Instant::now();
        let m = opts.grid_points.max(2);
        let grid = LambdaGrid { re: (0.0, 1.0, m), im: (-0.5, 0.5, m) };
        let evals = determinant_grid(&spec, n_scan, &grid)?;
        let rows = evals
            .iter()
            .map(|e| vec![fmt_f64(e.lambda.re), fmt_f64(e.lambda.im), fmt_f64(e.log_abs_det), fmt_f64(e.sigma_min)])
            .collect();
        let params = BTreeMap::from([
            ("b".to_string(), json!(b)),
            ("N".to_string(), json!(n_scan)),
            ("re".to_string(), json!([0.0, 1.0, m])),
            ("im".to_string(), json!([-0.5, 0.5, m])),
        ]);
        let header = ["re", "im", "log_abs_det", "sigma_min"].map(String::from).to_vec();
        w.csv(&format!("hill_det_{tag}.csv"), header, rows, params, &[&sys], started)?;

        let eigs = find_eigenvalues(&spec, n_scan, None, DEFAULT_TOL)?;
        let check = if b < 2.0 {
            let none = eigs.iter().all(|e| e.lambda.re < 0.0);
            Check {
                name: format!("stable case b = {b}"),
                passed: none && y_end.abs() < 0.1,
                detail: format!("{} roots with Re >= 0, |y(50)| = {:.6e} (< 0.1)", eigs.len(), y_end.abs()),
            }
        } else {
            let good = eigs.iter().filter(|e| e.lambda.re > 0.0 && e.residual < DEFAULT_TOL).count();
            Check {
                name: format!("unstable case b = {b}"),
                passed: good >= 1 && y_end.abs() > 10.0,
                detail: format!("{good} roots with Re > 0, |y(50)| = {:.6e} (> 10)", y_end.abs()),
            }
        };
        checks.push(check);
    }

    // root locations for both examples
    let started = Instant::now();
    let spec3 = scalar_example(2.5);
    let sys3 = outdir.join("scalar_b2.5.json");
    let r3 = gershgorin(&spec3, n_scan).max_real_part();
    let eig3 = find_eigenvalues(&spec3, n_scan, Some(SearchStrip { re: (-1.0, r3), im: (-0.5, 0.5) }), DEFAULT_TOL)?;
    let spec4 = mathieu_example();
    let sys4 = w.system("mathieu.json", &spec4)?;
    let eig4 = find_eigenvalues(&spec4, 10, Some(SearchStrip { re: (-1.0, 1.0), im: (-0.5, 0.5) }), DEFAULT_TOL)?;
    let mut rows = eig_rows("scalar_b2.5", &eig3);
    rows.extend(eig_rows("mathieu", &eig4));
    let params = BTreeMap::from([
        ("scalar".to_string(), json!({"b": 2.5, "N": n_scan, "strip": [-1.0, r3, -0.5, 0.5]})),
        (
            "mathieu".to_string(),
            json!({"alpha": MATHIEU_ALPHA, "c": MATHIEU_C, "d": MATHIEU_D, "N": 10, "strip": [-1.0, 1.0, -0.5, 0.5]}),
        ),
    ]);
    let header = ["example", "re", "im", "residual", "classification"].map(String::from).to_vec();
    w.csv("eigenvalues.csv", header, rows, params, &[&sys3, &sys4], started)?;
    let unstable = eig4.iter().filter(|e| e.classification == FloquetClass::ValidFloquet && e.lambda.re > 0.0).count();
    let invalid = eig4.iter().filter(|e| e.classification == FloquetClass::InvalidNegativeRe).count();
    checks.push(Check {
        name: "Mathieu-type groups".into(),
        passed: eig4.len() == 2 && unstable == 1 && invalid == 1,
        detail: format!("{} groups in the fundamental strip, {unstable} with Re > 0, {invalid} with Re < 0", eig4.len()),
    });

    // Floquet form against simulation
    let started = Instant::now();
    let spec = scalar_example(2.2);
    let sys = w.system("scalar_b2.2.json", &spec)?;
    let eigs = find_eigenvalues(&spec, 10, None, DEFAULT_TOL)?;
    let best = eigs.iter().rfind(|e| e.classification == FloquetClass::ValidFloquet);
    match best {
        Some(ep) => {
            let t_end = 4.0 * PI;
            let (sim, hill) = floquet_comparison(ep, &spec, t_end, 1e-3)?;
            let err = max_relative_error(&sim, &hill);
            let rows = sim
                .times
                .iter()
                .zip(hill.values.iter().zip(&sim.values))
                .map(|(t, (h, s))| vec![fmt_f64(*t), fmt_f64(h[0]), fmt_f64(s[0])])
                .collect();
            let params = BTreeMap::from([
                ("b".to_string(), json!(2.2)),
                ("N".to_string(), json!(10)),
                ("t_end".to_string(), json!(t_end)),
                ("dt".to_string(), json!(1e-3)),
                ("lambda".to_string(), json!([ep.lambda.re, ep.lambda.im])),
            ]);
            let header = ["t", "y_hill", "y_sim"].map(String::from).to_vec();
            w.csv("floquet_vs_simulation.csv", header, rows, params, &[&sys], started)?;
            checks.push(Check {
                name: "Hill vs simulation b = 2.2".into(),
                passed: err <= 0.05,
                detail: format!("lambda = {:.10}, max relative error {:.6e} (<= 0.05)", ep.lambda.re, err),
            });
        }
        None => checks.push(Check {
            name: "Hill vs simulation b = 2.2".into(),
            passed: false,
            detail: "no root with Re >= 0 found".into(),
        }),
    }

    let report = ReproduceReport { checks, files: w.files };
    fs::write(outdir.join("report.txt"), report.render())?;
    Ok(report)
}
