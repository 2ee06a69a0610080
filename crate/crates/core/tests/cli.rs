use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_soliton-forge"));
    c.env_remove("SOLITON_FORGE_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn synth_then_analyze_recovers_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"eigenvalues":[1.0,0.5],"symmetric_with_phases":[0.7,0.0]}"#);
    let csv = path(dir.path(), "q.csv");
    let r = report(&run(&["synth", "--spectrum", &spec, "--out", &csv]));
    assert!(r["symmetry_residual"].as_f64().unwrap() < 1e-6);
    assert!((r["energy"].as_f64().unwrap() - 6.0).abs() < 1e-6);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,re_q,im_q\n"));

    let a = report(&run(&["analyze", "--pulse", &csv]));
    let spectrum = a["spectrum"].as_array().unwrap();
    assert_eq!(spectrum.len(), 2);
    for (entry, (sigma, abs, phase)) in spectrum.iter().zip([(0.5, 3.0, 0.0), (1.0, 6.0, 0.7)]) {
        assert!((entry["sigma"].as_f64().unwrap() - sigma).abs() < 1e-6);
        assert!((entry["abs"].as_f64().unwrap() - abs).abs() < 1e-3 * abs);
        assert!((entry["phase"].as_f64().unwrap() - phase).abs() < 1e-3);
    }
    assert!(a["continuous_residual"].as_f64().unwrap() < 1e-4);
}

#[test]
fn single_soliton_peak_and_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"eigenvalues":[0.5],"amplitudes":[{"abs":1.0,"phase":1.5707963267948966}]}"#);
    let csv = path(dir.path(), "q.csv");
    let r = report(&run(&["synth", "--spectrum", &spec, "--out", &csv]));
    assert!((r["peak"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let a = report(&run(&["analyze", "--pulse", &csv, "--epsilon", "1e-4"]));
    assert!((a["eigenvalues"][0].as_f64().unwrap() - 0.5).abs() < 1e-6);
    let t_w = a["t_w"].as_f64().unwrap();
    assert!((t_w - (2e4f64).ln()).abs() < 0.01 * t_w);
}

#[test]
fn zero_pulse_has_no_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("t,re_q,im_q\n");
    for i in 0..201 {
        text.push_str(&format!("{},0,0\n", -10.0 + 0.1 * i as f64));
    }
    let csv = write(dir.path(), "zero.csv", &text);
    let a = report(&run(&["analyze", "--pulse", &csv]));
    assert_eq!(a["eigenvalues"].as_array().unwrap().len(), 0);
}

#[test]
fn validation_failures_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"eigenvalues\": [0.5,\n  }");
    let out = run(&["synth", "--spectrum", &bad, "--out", &path(dir.path(), "x.csv")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");

    let dup = write(dir.path(), "dup.json", r#"{"eigenvalues":[0.5,0.5],"symmetric_with_phases":[0,0]}"#);
    let out = run(&["synth", "--spectrum", &dup, "--out", &path(dir.path(), "x.csv")]);
    assert_eq!(out.status.code(), Some(2));

    let spec = write(dir.path(), "s.json", r#"{"eigenvalues":[0.5],"symmetric_with_phases":[0]}"#);
    let out = run(&["gallery", "--spectrum", &spec, "--phase-samples", "0", "--out", &path(dir.path(), "g.csv")]);
    assert_eq!(out.status.code(), Some(2));

    let empty = write(dir.path(), "p.json", r#"{"eigenvalues":[0.5,1.0],"epsilons":[1e-4],"etas":[]}"#);
    let out = run(&["sweep", "eta", "--params", &empty, "--out", &path(dir.path(), "t.csv")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn propagation_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"eigenvalues":[0.5,1.0],"symmetric_with_phases":[0,0]}"#);
    let r = report(&run(&["propagate", "--spectrum", &spec, "--z", "0.3", "--method", "both"]));
    assert!(r["max_discrepancy"].as_f64().unwrap() < 1e-4);

    let one = write(dir.path(), "one.json", r#"{"eigenvalues":[1.0],"symmetric_with_phases":[0]}"#);
    let r = report(&run(&["propagate", "--spectrum", &one, "--z", "0.7853981633974483", "--method", "spectral"]));
    assert!((r["rotation"][0]["factor_re"].as_f64().unwrap() + 1.0).abs() < 1e-12);

    let out = run(&["propagate", "--spectrum", &one, "--z", "0.3", "--method", "ssfm", "--dt", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gallery_writes_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"eigenvalues":[0.5],"symmetric_with_phases":[0]}"#);
    let csv = path(dir.path(), "g.csv");
    let r = report(&run(&["gallery", "--spectrum", &spec, "--phase-samples", "3", "--out", &csv]));
    assert_eq!(r["traces"], 3);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phase_index,t,abs_q"));
    let n = r["samples"].as_u64().unwrap() as usize;
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * n);
    // |q| does not depend on the phase of a single soliton.
    for i in 0..n {
        let a = rows[i].split_once(',').unwrap().1;
        let c = rows[2 * n + i].split_once(',').unwrap().1;
        assert_eq!(a, c);
    }
}

const PARAMS: &str = r#"{"eigenvalues":[0.5,1.0],"epsilons":[1e-4],"eta_logspace":{"min":1e-3,"max":1.0,"points":7},"coarse_n":16}"#;

#[test]
fn sweeps_resume_and_ignore_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let params = write(dir.path(), "p.json", PARAMS);
    let (a, b) = (path(dir.path(), "a.csv"), path(dir.path(), "b.csv"));
    report(&run(&["sweep", "eta", "--params", &params, "--out", &a, "--workers", "1"]));
    let r = report(&bin().args(["sweep", "eta", "--params", &params, "--out", &b]).env("SOLITON_FORGE_WORKERS", "3").output().unwrap());
    assert_eq!(r["computed"], 7);
    let full = std::fs::read_to_string(&a).unwrap();
    assert_eq!(full, std::fs::read_to_string(&b).unwrap());
    assert!(full.starts_with("sigma_ratios;etas;epsilon;t_max;b_max;tb_per_eig;tb_ratio;error\n"));

    // Interrupted run: three finished rows and a torn fourth.
    let cut: Vec<&str> = full.lines().take(5).collect();
    let torn = format!("{}\n{}", cut[..4].join("\n"), &cut[4][..20]);
    std::fs::write(&b, torn).unwrap();
    let r = report(&run(&["sweep", "eta", "--params", &params, "--out", &b]));
    assert_eq!(r["reused"], 3);
    assert_eq!(r["computed"], 4);
    assert_eq!(full, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn out_of_range_epsilon_is_rejected_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let params = write(dir.path(), "p.json", r#"{"eigenvalues":[0.5],"epsilons":[1e-4,1.5],"etas":[[1.0]]}"#);
    let out = run(&["sweep", "eta", "--params", &params, "--out", &path(dir.path(), "t.csv")]);
    assert_eq!(out.status.code(), Some(2));
}
