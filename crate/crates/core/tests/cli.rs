use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use frachill::io::{manifest_path, sha256_file, RunManifest};
use frachill::reproduce::scalar_example;
use frachill::system::SystemSpec;

fn frachill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frachill"))
        .args(args)
        .env("FRACHILL_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn write_system(dir: &Path, name: &str, spec: &SystemSpec) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(&spec.to_document()).unwrap()).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn eig_unstable_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let unstable = write_system(dir.path(), "b2.5.json", &scalar_example(2.5));
    let stable = write_system(dir.path(), "b1.json", &scalar_example(1.0));

    let out = dir.path().join("eigs.csv");
    let o = frachill(&["eig", "--system", unstable.to_str().unwrap(), "--N", "20", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert!(rows.iter().any(|r| r[0].parse::<f64>().unwrap() > 0.0));
    assert!(rows.iter().all(|r| r[3] == "valid-floquet" || r[3] == "invalid-negative-re"));

    let manifest = RunManifest::read(&manifest_path(&out)).unwrap();
    assert_eq!(manifest.command, "eig");
    assert_eq!(manifest.output.sha256, sha256_file(&out).unwrap());
    assert_eq!(manifest.inputs.len(), 1);
    assert_eq!(manifest.inputs[0].sha256, sha256_file(&unstable).unwrap());
    assert_eq!(manifest.parameters["N"], 20);

    let o = frachill(&["eig", "--system", stable.to_str().unwrap(), "--N", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, "re,im,residual,classification\n");
}

#[test]
fn usage_errors_exit_two() {
    let o = frachill(&["simulate", "--t-end", "1", "--dt", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(frachill(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(frachill(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"alpha": 0.5}"#).unwrap();
    let o = frachill(&["eig", "--system", bad.to_str().unwrap(), "--N", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);

    let sys = write_system(dir.path(), "s.json", &scalar_example(1.0));
    let o = frachill(&["hill-det", "--system", sys.to_str().unwrap(), "--N", "2", "--re", "0:1", "--im", "0:0:1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_one() {
    // a regular file where a directory is expected fails even for root
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let outdir = blocker.join("out");
    let o = frachill(&["reproduce", "--outdir", outdir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "io");

    let sys = write_system(dir.path(), "s.json", &scalar_example(1.0));
    let o = frachill(&[
        "hill-det",
        "--system",
        sys.to_str().unwrap(),
        "--N",
        "1",
        "--re",
        "0:1:2",
        "--im",
        "0:0:1",
        "--out",
        blocker.join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_and_forcing_with_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_system(dir.path(), "s.json", &scalar_example(1.0));
    let hist = dir.path().join("h.json");
    fs::write(&hist, r#"{"kind": "constant", "value": [1.0]}"#).unwrap();
    let out = dir.path().join("traj.csv");
    let o = frachill(&[
        "simulate",
        "--system",
        sys.to_str().unwrap(),
        "--history",
        hist.to_str().unwrap(),
        "--t-end",
        "1",
        "--dt",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.0);
    let m = RunManifest::read(&manifest_path(&out)).unwrap();
    let hashes: Vec<_> = m.inputs.iter().map(|h| h.sha256.clone()).collect();
    assert_eq!(hashes, vec![sha256_file(&sys).unwrap(), sha256_file(&hist).unwrap()]);

    let ramp = dir.path().join("ramp.json");
    fs::write(&ramp, r#"{"kind": "ramp", "far_value": [0.0], "ramp_start": -1.0}"#).unwrap();
    let o = frachill(&["forcing", "--history", ramp.to_str().unwrap(), "--alpha", "0.5", "--times", "0:2:3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("t,f1\n"));
}

#[test]
fn ml_and_lti() {
    let o = frachill(&["ml", "--alpha", "1", "--re", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let re: f64 = text.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((re - 1f64.exp()).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("a.json");
    fs::write(&m, "[[1.0, 0.0], [0.0, -1.0]]").unwrap();
    let o = frachill(&["lti", "--alpha", "0.5", "--matrix", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let cases: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    let mut sorted = cases.clone();
    sorted.sort();
    assert_eq!(sorted, ["a", "c"]);

    fs::write(&m, "[[1.0, 0.0]]").unwrap();
    assert_eq!(frachill(&["lti", "--alpha", "0.5", "--matrix", m.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_and_floquet_commands() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_system(dir.path(), "b2.2.json", &scalar_example(2.2));
    let o = frachill(&["verify", "--system", sys.to_str().unwrap(), "--N", "10", "--t-end", "6.28", "--dt", "1e-2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda_re,lambda_im,max_rel_err");
    assert_eq!(lines.len(), 2);
    let err: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(err <= 0.05);

    let out = dir.path().join("fl.csv");
    let o = frachill(&[
        "floquet",
        "--system",
        sys.to_str().unwrap(),
        "--N",
        "10",
        "--t-end",
        "2",
        "--dt",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 5);
    assert!(manifest_path(&out).exists());
}
