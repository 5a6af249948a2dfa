use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_star-spectral"));
    c.env_remove("STAR_SPECTRAL_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const PROBLEM: &str = r#"{"schema_version":1,"m":3,"h":[[0,0],[1,0],[2,0]],
  "p":[[[0.5,0],[0.3,-0.2]],[[-0.2,0.1],[0,0],[0.25,0]],[[0.1,0],[0,0.2]]]}"#;

#[test]
fn forward_unperturbed_two_edges() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "p.json", r#"{"schema_version":1,"m":2,"h":[[0,0],[1,0]]}"#);
    let out = dir.path().join("s.json");
    let o = run(&["forward", "--problem", &prob, "--shells", "10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json_file(&out);
    assert_eq!(s["entries"].as_array().unwrap().len(), 20);
    assert!(s["provenance"]["max_relative_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn single_edge_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "p.json", r#"{"schema_version":1,"m":1,"h":[[0,0]]}"#);
    let out = dir.path().join("s.json");
    let o = run(&["forward", "--problem", &prob, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
}

#[test]
fn repeated_h_warns_and_inverse_refuses_without_sums() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(
        dir.path(),
        "p.json",
        r#"{"schema_version":1,"m":3,"h":[[0,0],[0,0],[1,0]],"p":[[[0.3,0],[0.2,0]],[[-0.1,0]],[[0.2,0.1]]]}"#,
    );
    let spec = dir.path().join("s.json");
    let o = run(&["forward", "--problem", &prob, "--shells", "100", "--out", spec.to_str().unwrap(), "--require-star"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let out = dir.path().join("r.json");
    let o = run(&["inverse", "--spectrum", spec.to_str().unwrap(), "--h", &prob, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sums"));

    let o = run(&[
        "inverse",
        "--spectrum",
        spec.to_str().unwrap(),
        "--h",
        &prob,
        "--sums",
        "--shells",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_file(&out);
    let g = &r["groups"][0];
    assert_eq!(g["edges"], serde_json::json!([1, 2]));
    // p_1 + p_2 = 0.2 + 0.2 cos x
    let c0 = &g["sum"][0];
    let c1 = &g["sum"][1];
    assert!((c0[0].as_f64().unwrap() - 0.2).abs() < 1e-4);
    assert!((c1[0].as_f64().unwrap() - 0.2).abs() < 1e-4);
}

#[test]
fn inverse_round_trip_with_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "p.json", PROBLEM);
    let spec = dir.path().join("s.json");
    let o = run(&["forward", "--problem", &prob, "--shells", "300", "--out", spec.to_str().unwrap()]);
    assert!(o.status.success());
    let out = dir.path().join("r.json");
    let rep = dir.path().join("rep.json");
    let o = run(&[
        "inverse",
        "--spectrum",
        spec.to_str().unwrap(),
        "--h",
        &prob,
        "--method",
        "both",
        "--out",
        out.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
        "--truth",
        &prob,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_file(&rep);
    for key in ["easy_error", "riesz_error"] {
        for e in r[key].as_array().unwrap() {
            assert!(e.as_f64().unwrap() <= 1e-4, "{key}: {e}");
        }
    }
    assert_eq!(r["cross_method_distance"].as_array().unwrap().len(), 3);
    let rec = json_file(&out);
    assert_eq!(rec["m"], 3);
}

#[test]
fn adjoint_and_products_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(
        dir.path(),
        "p.json",
        r#"{"schema_version":1,"m":2,"h":[[0,0.5],[1,-0.3]],"p":[[[0.5,0.2],[0.3,-0.2]],[[-0.2,0.1],[0,0.4]]]}"#,
    );
    let o = run(&["adjoint-check", "--problem", &prob]);
    assert!(o.status.success());
    assert!(stdout_json(&o)["max_conjugacy_deviation"].as_f64().unwrap() <= 1e-8);
    let o = run(&["products-check", "--m", "3"]);
    assert!(o.status.success());
    assert!(stdout_json(&o)["max_relative_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn roundtrip_is_deterministic() {
    let a = run(&["roundtrip", "--seed", "11", "--m", "2", "--shells", "200", "--method", "easy"]);
    let b = run(&["roundtrip", "--seed", "11", "--m", "2", "--shells", "200", "--method", "easy"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["roundtrip", "--seed", "12", "--m", "2", "--shells", "200", "--method", "easy"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn spectrum_file_is_byte_stable_through_reading() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "p.json", PROBLEM);
    let spec = dir.path().join("s.json");
    assert!(run(&["forward", "--problem", &prob, "--shells", "20", "--out", spec.to_str().unwrap()])
        .status
        .success());
    let text = std::fs::read_to_string(&spec).unwrap();
    let again = star_spectral::io::SpectrumFile::from_json(&text).unwrap().to_json().unwrap();
    assert_eq!(text, again);
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"n_low": "three"}"#);
    let prob = write(dir.path(), "p.json", PROBLEM);
    let out = dir.path().join("s.json");
    let o = bin()
        .env("STAR_SPECTRAL_CONFIG", &cfg)
        .args(["forward", "--problem", &prob, "--shells", "5", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn emit_plot_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "p.json", PROBLEM);
    let out = dir.path().join("d.csv");
    let o = run(&["emit-plot", "--kind", "delta", "--problem", &prob, "--points", "11", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,abs_delta,re_delta,im_delta");
    assert_eq!(lines.len(), 12);
}
