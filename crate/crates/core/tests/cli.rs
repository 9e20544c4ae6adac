use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn lieconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lieconf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn problem(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const WAVE3: &str = "\
[chart]
coords: t, x, y

[metric]
diag: -1, 1, 1

[symmetries]
H: xi = t, x, y; eta = -1/2*u
X_C^1: xi = (t^2 + x^2 + y^2)/2, t*x, t*y; eta = -1/2*t*u

[pde]
kind: laplace
";

#[test]
fn classify_minkowski4_counts() {
    let out = lieconf(&["classify", "--space", "minkowski4", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let rows = r["classifications"].as_array().unwrap();
    assert_eq!(rows.len(), 15);
    let count = |c: &str| rows.iter().filter(|r| r["class"] == c).count();
    assert_eq!(count("Killing"), 10);
    assert_eq!(count("Homothetic"), 1);
    assert_eq!(count("SpecialCKV"), 4);
    assert!(rows
        .iter()
        .all(|r| r["residual"].is_f64() && r["tol"] == 1e-9));
    assert_eq!(r["structure_constants"]["closed"], true);
}

#[test]
fn reduce_reports_type_ii_hidden_symmetries() {
    let out = lieconf(&[
        "reduce",
        "--space",
        "minkowski4",
        "--pde",
        "laplace",
        "--by",
        "K_G^z",
        "--mu",
        "0",
        "--output",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let red = &json(&out)["reduction"];
    let hidden: Vec<&str> = red["type_ii"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        hidden,
        ["reduced:X_C^1", "reduced:X_C^y1", "reduced:X_C^y2"]
    );
    assert!(red["inherited"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| !c["name"].as_str().unwrap().contains("X_C")));
}

#[test]
fn verify_passes_then_fails_when_perturbed() {
    let good = problem(WAVE3);
    let out = lieconf(&["verify", "--input", good.path().to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );

    let bad = problem(&WAVE3.replace("eta = -1/2*t*u", "eta = -1/2*t*u + t^2"));
    let out = lieconf(&[
        "verify",
        "--input",
        bad.path().to_str().unwrap(),
        "--output",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let rows = json(&out)["verifications"].as_array().unwrap().clone();
    assert_eq!(rows[0]["holds"], true);
    assert_eq!(rows[1]["holds"], false);
    assert!(rows[1]["residual"].as_f64().unwrap() > 1e-9);
}

#[test]
fn input_errors_exit_two_with_position() {
    let bad = problem("[chart]\ncoords: x, y\n[metric]\ndiag: 1, q\n");
    let out = lieconf(&["classify", "--input", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4, column 10"), "{err}");

    assert_eq!(
        lieconf(&["classify", "--space", "nowhere"]).status.code(),
        Some(2)
    );
    assert_eq!(lieconf(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lieconf(&["classify"]).status.code(), Some(2));
    assert_eq!(lieconf(&["--help"]).status.code(), Some(0));
}

#[test]
fn same_seed_gives_identical_json() {
    let args = [
        "reduce", "--space", "les3", "--by", "C_S", "--seed", "9", "--output", "json",
    ];
    let a = lieconf(&args);
    let b = lieconf(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn catalog_exports_parse_back() {
    let out = lieconf(&["catalog", "--space", "hsphere2", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = json(&out)["catalog"]["problem_text"]
        .as_str()
        .unwrap()
        .to_string();
    let f = problem(&text);
    let out = lieconf(&[
        "classify",
        "--input",
        f.path().to_str().unwrap(),
        "--output",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out)["classifications"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.iter().filter(|r| r["class"] == "ProperCKV").count(), 3);
}

#[test]
fn run_options_come_from_the_file_and_flags_override() {
    let f = problem(&format!("{WAVE3}\n[run]\nseed: 5\ntrials: 7\n"));
    let p = f.path().to_str().unwrap();
    let r = json(&lieconf(&["verify", "--input", p, "--output", "json"]));
    assert_eq!(r["settings"]["seed"], 5);
    assert_eq!(r["settings"]["trials"], 7);
    let r = json(&lieconf(&[
        "verify", "--input", p, "--trials", "3", "--output", "json",
    ]));
    assert_eq!(r["settings"]["trials"], 3);
}
