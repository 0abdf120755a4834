use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fermigauss::bounds::{epsilon_family, family_cm};
use fermigauss::channels::{pure_loss, validate_channel};
use fermigauss::format::{write_channel, write_cm};
use fermigauss::matalg::AntisymmetricMatrix;
use fermigauss::DMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fermigauss"));
    c.env_remove("FERMIGAUSS_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn family_file(dir: &TempDir, k1: usize, k2: usize) -> PathBuf {
    put(
        dir,
        &format!("family_{k1}_{k2}.cm"),
        &write_cm(family_cm(k1, k2).cm().matrix(), Some((1, 1))),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_cm_vacuum_and_family() {
    let dir = TempDir::new().unwrap();
    let vac = put(&dir, "vac.cm", "modes 1\nmatrix\n0 1\n-1 0\n");
    let out = run(&["check-cm", s(&vac)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["valid"], true);
    assert_eq!(v["pure"], true);
    assert_eq!(v["lambdas"].as_array().unwrap().len(), 1);
    assert!((v["lambdas"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = run(&["check-cm", s(&family_file(&dir, 2, 2))]);
    let v = json(&out);
    assert_eq!(v["pure"], false);
    let spec: Vec<f64> = v["spectrum"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let r = 0.5_f64.sqrt();
    for (g, w) in spec.iter().zip([-r, -r, r, r]) {
        assert!((g - w).abs() < 1e-10);
    }
}

#[test]
fn check_cm_exit_codes() {
    let dir = TempDir::new().unwrap();
    let asym = put(&dir, "asym.cm", "modes 1\nmatrix\n0 1\n-0.5 0\n");
    assert_eq!(run(&["check-cm", s(&asym)]).status.code(), Some(3));
    let big = put(&dir, "big.cm", "modes 1\nmatrix\n0 1.5\n-1.5 0\n");
    let out = run(&["check-cm", s(&big)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["valid"], false);
    let missing = dir.path().join("missing.cm");
    assert_eq!(run(&["check-cm", s(&missing)]).status.code(), Some(3));
}

#[test]
fn extendible_family_and_emitted_files() {
    let dir = TempDir::new().unwrap();
    let f = family_file(&dir, 2, 2);
    let ext = dir.path().join("ext.cm");
    let wit = dir.path().join("wit.cm");
    let out = run(&["extendible", s(&f), "2", "2", "--emit-extension", s(&ext), "--emit-witness", s(&wit)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "feasible");
    assert!(v["margin"].as_f64().unwrap() >= -1e-7);
    let back = run(&["check-cm", s(&ext)]);
    assert_eq!(back.status.code(), Some(0));
    assert_eq!(json(&back)["modes"], 4);
    assert!(std::fs::read_to_string(&wit).unwrap().starts_with("modes 2\nsplit 1 1\n"));

    let out = run(&["extendible", s(&f), "3", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["status"].as_str().unwrap().starts_with("infeasible"));
}

#[test]
fn extendible_epsilon_certificate() {
    let dir = TempDir::new().unwrap();
    let b = epsilon_family(0.1).unwrap();
    let f = put(&dir, "eps.cm", &write_cm(b.cm().matrix(), Some((1, 1))));
    let out = run(&["extendible", s(&f), "1", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "infeasible_certified");
    let cert = v["certificate"].as_str().unwrap();
    assert!(cert.starts_with("column-sum row "), "{cert}");
    assert!(cert.ends_with(": 1.0025 > 1"), "{cert}");
}

#[test]
fn extendible_needs_a_split() {
    let dir = TempDir::new().unwrap();
    let f = put(&dir, "nosplit.cm", "modes 1\nmatrix\n0 1\n-1 0\n");
    assert_eq!(run(&["extendible", s(&f), "2", "1"]).status.code(), Some(3));
}

#[test]
fn stalled_solver_exit_code() {
    let dir = TempDir::new().unwrap();
    let f = family_file(&dir, 2, 2);
    let out = run(&["--max-iters", "1", "extendible", s(&f), "2", "2"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bounds_records() {
    let v = json(&run(&["bounds", "1", "1", "2", "2"]));
    assert_eq!(v["T"], 1.0);
    assert_eq!(v["er_upper"], 2.0);
    assert_eq!(v["esq_upper"], 1.0);
    assert_eq!(json(&run(&["bounds", "1", "1", "1", "1"]))["T"], 2.0);

    let dir = TempDir::new().unwrap();
    let f = family_file(&dir, 3, 3);
    let v = json(&run(&["bounds", "--cm", s(&f), "3", "3"]));
    assert!((v["trace_lower"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-8);
    assert!((v["trace_upper_cm"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-10);

    assert_eq!(run(&["bounds", "1", "1", "2"]).status.code(), Some(3));
}

#[test]
fn family_table_has_one_line_per_tuple() {
    let out = run(&["--format", "table", "family", "--max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(
        lines[0],
        "k1\tk2\tnA\tnB\tT\ttrace_upper\ttrace_upper_cm\ttrace_lower\ter_upper\tesq_upper"
    );
    assert!(lines[1..].iter().all(|l| l.split('\t').count() == 10));
}

#[test]
fn output_is_deterministic_across_runs_and_job_counts() {
    let a = run(&["family", "--max", "4"]);
    let b = run(&["family", "--max", "4", "--jobs", "1"]);
    let c = run(&["family", "--max", "4", "--jobs", "3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let x = run(&["--seed", "9", "oracle-verify", "sandwich", "--trials", "20"]);
    let y = run(&["--seed", "9", "oracle-verify", "sandwich", "--trials", "20", "--jobs", "1"]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn channel_actions() {
    let dir = TempDir::new().unwrap();
    let lossy = |lam: f64, name: &str| put(&dir, name, &write_channel(&pure_loss(lam).unwrap()));
    let c4 = lossy(0.4, "l4.ch");
    let c6 = lossy(0.6, "l6.ch");
    assert_eq!(run(&["channel", s(&c4), "antidegradable"]).status.code(), Some(0));
    assert_eq!(run(&["channel", s(&c6), "antidegradable"]).status.code(), Some(1));
    assert_eq!(run(&["channel", s(&c4), "k-ext", "2"]).status.code(), Some(0));
    assert_eq!(run(&["channel", s(&c6), "k-ext", "2"]).status.code(), Some(1));
    assert_eq!(run(&["channel", s(&c4), "validate"]).status.code(), Some(0));

    let n = AntisymmetricMatrix::from_row_slice(2, &[0.0, 0.3, -0.3, 0.0]).unwrap();
    let rep = validate_channel(&DMatrix::zeros(2, 2), &n).unwrap();
    let r = put(&dir, "rep.ch", &write_channel(&rep));
    let out = run(&["--format", "table", "channel", s(&r), "eb"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("entanglement-breaking: true"));
    assert_eq!(run(&["channel", s(&c4), "eb"]).status.code(), Some(1));

    let out = run(&["--format", "table", "channel", s(&c4), "choi"]);
    let choi = put(&dir, "choi.cm", &String::from_utf8(out.stdout).unwrap());
    assert_eq!(run(&["check-cm", s(&choi)]).status.code(), Some(0));

    let not_cp = put(&dir, "bad.ch", "n_in 1\nn_out 1\nx_matrix\n1.1 0\n0 1.1\nn_matrix\n0 0\n0 0\n");
    assert_eq!(run(&["channel", s(&not_cp), "validate"]).status.code(), Some(2));
}

#[test]
fn oracle_suites_pass() {
    for suite in ["roundtrip", "wick", "sandwich"] {
        let out = run(&["oracle-verify", suite, "--n-max", "3", "--trials", "30"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
        assert_eq!(json(&out)["passed"], true);
    }
    let out = run(&["oracle-verify", "roundtrip", "--n-max", "3", "--trials", "100"]);
    assert!(json(&out)["max_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(run(&["oracle-verify", "wick", "--n-max", "13"]).status.code(), Some(3));
}

#[test]
fn config_file_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = put(&dir, "run.toml", "output_format = \"table\"\nmax_iters = 1\n");
    let f = family_file(&dir, 2, 2);
    let out = bin()
        .env("FERMIGAUSS_CONFIG", &cfg)
        .args(["bounds", "1", "1", "2", "2"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("k1\tk2"));
    let out = bin()
        .env("FERMIGAUSS_CONFIG", &cfg)
        .args(["extendible", s(&f), "2", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let out = bin()
        .env("FERMIGAUSS_CONFIG", &cfg)
        .args(["--max-iters", "20000", "--format", "json", "extendible", s(&f), "2", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let bad = put(&dir, "bad.toml", "eps_psd = -1\n");
    let out = run(&["--config", s(&bad), "bounds", "1", "1", "2", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let unknown = put(&dir, "unknown.toml", "colour = 1\n");
    assert_eq!(run(&["--config", s(&unknown), "bounds", "1", "1", "2", "2"]).status.code(), Some(3));
}
