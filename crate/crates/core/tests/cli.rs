use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_minsupport"));
    cmd.env("RUST_LOG", "error");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the A3 fixture (with its spanning columns) and returns its path.
fn a3_pair(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("a3.json");
    let out = run(&["verify-appendix", "a3", "--pair-out", path_str(&path)]);
    assert_eq!(out.status.code(), Some(0));
    path
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

/// Lines spanned by `(e1 + e2)/√2` and `(e1 − e2)/√2` in `C³`.
fn line_pair(dir: &TempDir) -> PathBuf {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let body = format!(
        r#"{{"n": 3,
            "V": {{"rows": 3, "cols": 1, "entries": [[{h}, 0.0], [{h}, 0.0], [0.0, 0.0]]}},
            "W": {{"rows": 3, "cols": 1, "entries": [[{h}, 0.0], [-{h}, 0.0], [0.0, 0.0]]}}}}"#
    );
    write(dir, "lines.json", &body)
}

#[test]
fn verify_appendix_reports_the_printed_coefficients() {
    for which in ["a3", "b4", "c5"] {
        let out = run(&["verify-appendix", which]);
        assert_eq!(out.status.code(), Some(0), "{which}");
        let v = json(&out);
        assert_eq!(v["valid"], true, "{which}");
        assert!(v["max_abs_error"].as_f64().unwrap() < 1e-12, "{which}");
    }
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&[]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["adequacy"]).status.code(), Some(64));
    assert_eq!(run(&["verify-appendix", "d6"]).status.code(), Some(64));
    let dir = TempDir::new().unwrap();
    let pair = a3_pair(&dir);
    let p = path_str(&pair);
    assert_eq!(
        run(&["adequacy", "--pair", p, "--step", "1.5"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        run(&["perturb", "--pair", p, "--eps", "-1"]).status.code(),
        Some(64)
    );
    assert_eq!(
        run(&["sweep", "--pair", p, "--dx", "0"]).status.code(),
        Some(64)
    );
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(
        run(&["adequacy", "--pair", path_str(&missing)])
            .status
            .code(),
        Some(2)
    );
    let garbage = write(&dir, "garbage.json", "{ not json");
    assert_eq!(
        run(&["adequacy", "--pair", path_str(&garbage)])
            .status
            .code(),
        Some(2)
    );
    // V and W share a direction.
    let overlapping = write(
        &dir,
        "overlap.json",
        r#"{"n": 2,
            "V": {"rows": 2, "cols": 1, "entries": [[1.0, 0.0], [0.0, 0.0]]},
            "W": {"rows": 2, "cols": 1, "entries": [[1.0, 0.0], [0.0, 0.0]]}}"#,
    );
    assert_eq!(
        run(&["oracle", "--pair", path_str(&overlapping)])
            .status
            .code(),
        Some(2)
    );
    // Perturbation campaigns need the spanning columns.
    let lines = line_pair(&dir);
    assert_eq!(
        run(&["perturb", "--pair", path_str(&lines), "--eps", "0.001"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn strict_mode_reports_non_convergence() {
    let dir = TempDir::new().unwrap();
    let pair = a3_pair(&dir);
    let args = [
        "adequacy",
        "--pair",
        path_str(&pair),
        "--max-iters",
        "1",
        "--no-refine",
    ];
    let loose = run(&args);
    assert_eq!(loose.status.code(), Some(0));
    assert_eq!(json(&loose)["converged"], false);
    let strict: Vec<&str> = std::iter::once("--strict").chain(args).collect();
    assert_eq!(run(&strict).status.code(), Some(3));
}

#[test]
fn identical_arguments_give_identical_output() {
    let dir = TempDir::new().unwrap();
    let pair = a3_pair(&dir);
    let p = path_str(&pair);
    for args in [
        vec!["--seed", "5", "adequacy", "--pair", p, "--restarts", "4"],
        vec![
            "--seed",
            "5",
            "--threads",
            "2",
            "perturb",
            "--pair",
            p,
            "--eps",
            "0.01",
            "--trials",
            "20",
        ],
        vec!["--seed", "5", "minimal", "--pair", p, "--samples", "50"],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.status.code(), Some(0), "{args:?}");
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn composed_pairs_are_supports() {
    let dir = TempDir::new().unwrap();
    let composed = dir.path().join("composed.json");
    let out = run(&[
        "compose",
        "--h",
        "1",
        "--k",
        "1",
        "--l",
        "0",
        "--out",
        path_str(&composed),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&composed).unwrap()).unwrap();
    assert_eq!(file["n"], 7);
    assert_eq!(file["summary"]["certificate"]["valid"], true);

    let out = run(&["adequacy", "--pair", path_str(&composed)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["converged"], true);
    assert!(v["delta"].as_f64().unwrap() < 1e-10);

    let out = run(&[
        "perturb",
        "--pair",
        path_str(&composed),
        "--eps",
        "0.001",
        "--trials",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["valid"], 10);
}

#[test]
fn oracle_agrees_with_descent_on_disjoint_lines() {
    let dir = TempDir::new().unwrap();
    let lines = line_pair(&dir);
    let p = path_str(&lines);
    let fw = json(&run(&["oracle", "--pair", p]));
    let gd = json(&run(&["adequacy", "--pair", p]));
    assert_eq!(fw["converged"], true);
    let (d_fw, d_gd) = (fw["delta"].as_f64().unwrap(), gd["delta"].as_f64().unwrap());
    assert!(d_gd >= d_fw - fw["fw_gap"].as_f64().unwrap() - 1e-12);
    assert!((d_fw - d_gd).abs() < 1e-6);
}

#[test]
fn critical_points_from_descent_on_lines() {
    let dir = TempDir::new().unwrap();
    let lines = line_pair(&dir);
    let out = run(&["critical", "--pair", path_str(&lines), "--from-descent"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rank_one"], true);
    assert_eq!(v["report"]["ii_pass"], true);
    assert_eq!(v["report"]["iii_pass"], true);
}

#[test]
fn sweep_writes_a_csv_table() {
    let dir = TempDir::new().unwrap();
    let pair = a3_pair(&dir);
    let csv = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--pair",
        path_str(&pair),
        "--steps",
        "4",
        "--restarts",
        "2",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,delta,grad_norm,converged"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let delta: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(delta >= 0.0);
    }
}

#[test]
fn minimal_matrices_of_a_certified_support() {
    let dir = TempDir::new().unwrap();
    let pair = a3_pair(&dir);
    let out = run(&["minimal", "--pair", path_str(&pair), "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["evidence"], "certificate");
    assert_eq!(v["probe"]["violations"], 0);
    // Z = P_V − P_W has spectrum {−1, 1, 1} when dim V = 2, dim W = 1.
    let spectrum: Vec<f64> = v["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (got, want) in spectrum.iter().zip([-1.0, 1.0, 1.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn unwritable_output_exits_1() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("no-such-dir").join("out.json");
    assert_eq!(
        run(&["verify-appendix", "a3", "--out", path_str(&target)])
            .status
            .code(),
        Some(1)
    );
}
