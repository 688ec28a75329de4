use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsp-phases"))
        .args(args)
        .env_remove("QSP_GRID")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth_to(dir: &TempDir, signal: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.path().join("phases.json");
    let mut args = vec!["synth", s(signal), "--out", s(&out)];
    args.extend_from_slice(extra);
    (run(&args), out)
}

fn csv_responses(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let (x, r) = l.split_once(',').unwrap();
            (x.parse().unwrap(), r.parse().unwrap())
        })
        .collect()
}

fn phases_of(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    qsp_phases_json(&text)
}

/// Reads the phases array by hand so the test does not depend on the library parser.
fn qsp_phases_json(text: &str) -> Vec<f64> {
    let start = text.find("\"phases\": [").unwrap() + "\"phases\": [".len();
    let end = start + text[start..].find(']').unwrap();
    text[start..end]
        .split(',')
        .map(|t| t.trim().trim_matches('"').parse().unwrap())
        .collect()
}

#[test]
fn zero_signal_gives_zero_phases() {
    let dir = TempDir::new().unwrap();
    let sig = write(&dir, "zero.json", r#"{"chebyshev": [0.0]}"#);
    let (out, phases) = synth_to(&dir, &sig, &["--grid", "64"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(phases_of(&phases).iter().all(|&p| p == 0.0));
}

#[test]
fn constant_signal_recovers_arcsin() {
    let dir = TempDir::new().unwrap();
    let sig = write(&dir, "c.json", r#"{"chebyshev": [0.3]}"#);
    let (out, phases) = synth_to(&dir, &sig, &["--grid", "256", "--tol", "1e-8"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let psi = phases_of(&phases);
    assert!((psi[0] - 0.3f64.asin()).abs() < 1e-8, "{psi:?}");
    let eval = run(&["eval", s(&phases), "--x", "0,0.25,1"]);
    assert_eq!(code(&eval), 0);
    for (_, r) in csv_responses(&stdout(&eval)) {
        assert!((r - 0.3).abs() <= 1e-8);
    }
}

#[test]
fn oversized_signal_is_rejected() {
    let dir = TempDir::new().unwrap();
    let sig = write(&dir, "big.json", r#"{"chebyshev": [0.8]}"#);
    let (out, _) = synth_to(&dir, &sig, &["--grid", "64"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("2^(-1/2)"), "{}", stderr(&out));
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let both = write(&dir, "both.json", r#"{"samples": [0.1], "chebyshev": [0.1]}"#);
    assert_eq!(code(&synth_to(&dir, &both, &[]).0), 1);
    let junk = write(&dir, "junk.json", "not json");
    assert_eq!(code(&run(&["eval", s(&junk)])), 1);
    assert_eq!(code(&run(&["verify", s(&junk)])), 1);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["eval", s(&missing)])), 1);
}

#[test]
fn not_converged_exits_two() {
    let dir = TempDir::new().unwrap();
    let sig = write(&dir, "x.json", r#"{"chebyshev": [0.0, 0.4]}"#);
    let (out, phases) = synth_to(&dir, &sig, &["--grid", "256", "--dmax", "8", "--tol", "1e-8"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(phases.exists());
}

#[test]
fn grid_from_environment() {
    let dir = TempDir::new().unwrap();
    let sig = write(&dir, "c.json", r#"{"chebyshev": [0.1]}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_qsp-phases"))
        .args(["synth", s(&sig)])
        .env("QSP_GRID", "32")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("\"grid\": 32"));
}

#[test]
fn eval_trivial_phase_files() {
    let dir = TempDir::new().unwrap();
    let zeros = write(
        &dir,
        "z.json",
        r#"{"schema_version": 1, "epsilon": "0.1", "grid": 16, "degree": 2,
            "phases": ["0", "0", "0"], "plancherel_lhs": "0", "plancherel_rhs": "0", "residual": "0"}"#,
    );
    let out = run(&["eval", s(&zeros)]);
    assert_eq!(code(&out), 0);
    let rows = csv_responses(&stdout(&out));
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|&(_, r)| r == 0.0));

    let single = write(
        &dir,
        "s.json",
        r#"{"schema_version": 1, "epsilon": "0.1", "grid": 16, "degree": 0,
            "phases": ["0.25"], "plancherel_lhs": "0", "plancherel_rhs": "0", "residual": "0"}"#,
    );
    let out = run(&["eval", s(&single), "--grid", "32"]);
    for (_, r) in csv_responses(&stdout(&out)) {
        assert!((r - 0.25f64.sin()).abs() < 1e-15);
    }
    assert_eq!(code(&run(&["eval", s(&single), "--degree", "3"])), 1);
    assert_eq!(code(&run(&["eval", s(&single), "--x", "-0.5"])), 1);
}

#[test]
fn linear_signal_end_to_end() {
    let dir = TempDir::new().unwrap();
    let n = 8192;
    let samples: Vec<String> = (0..n)
        .map(|j| format!("{:e}", 0.4 * (std::f64::consts::PI * j as f64 / n as f64).cos().abs()))
        .collect();
    let sig = write(&dir, "lin.json", &format!("{{\"samples\": [{}]}}", samples.join(",")));
    let (out, phases) = synth_to(&dir, &sig, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let eval = run(&["eval", s(&phases)]);
    assert_eq!(code(&eval), 0);
    let rows = csv_responses(&stdout(&eval));
    assert_eq!(rows.len(), n / 2 + 1);
    // Full-grid norm: the half grid's interior nodes stand for two samples each.
    let sum: f64 = rows
        .iter()
        .enumerate()
        .map(|(j, &(x, r))| {
            let w = if j == 0 || j == n / 2 { 1.0 } else { 2.0 };
            w * (r - 0.4 * x).powi(2)
        })
        .sum();
    let rms = (sum / n as f64).sqrt();
    assert!(rms <= 1e-6, "rms {rms:e}");

    let verify = run(&["verify", s(&phases), "--signal", s(&sig)]);
    assert_eq!(code(&verify), 0, "{}", stdout(&verify));
    assert_eq!(stdout(&verify).matches(": pass").count(), 5);

    // Perturb one phase: the Plancherel check must catch it.
    let text = std::fs::read_to_string(&phases).unwrap();
    let psi = qsp_phases_json(&text);
    let old = format!("\"{:.16e}\"", psi[1]);
    let new = format!("\"{:.16e}\"", psi[1] + 1e-2);
    let bad = write(&dir, "bad.json", &text.replacen(&old, &new, 1));
    let verify = run(&["verify", s(&bad)]);
    assert_eq!(code(&verify), 3);
    assert!(stdout(&verify).contains("plancherel: FAIL"));
}

#[test]
fn verify_rejects_out_of_domain_phase() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "p.json",
        r#"{"schema_version": 1, "epsilon": "0.1", "grid": 16, "degree": 0,
            "phases": ["1.6"], "plancherel_lhs": "0", "plancherel_rhs": "0", "residual": "0"}"#,
    );
    let out = run(&["verify", s(&p)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn roundtrip_modes() {
    let out = run(&["roundtrip", "--width", "0"]);
    assert_eq!(code(&out), 0);
    let out = run(&["roundtrip", "--width", "50", "--norm-cap", "0.2", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).starts_with("max recovery error"));
    let again = run(&["roundtrip", "--width", "50", "--norm-cap", "0.2", "--seed", "3"]);
    assert_eq!(out.stdout, again.stdout);
    let out = run(&["roundtrip", "--width", "50", "--grid", "64"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn roundtrip_large_cap_reports() {
    let out = run(&["roundtrip", "--width", "50", "--norm-cap", "5.0", "--seed", "1"]);
    let c = code(&out);
    assert!(c == 0 || c == 3, "{}", stderr(&out));
    if stderr(&out).contains("NonOuter") {
        assert!(stderr(&out).contains("Plancherel gap"));
    }
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let sig = write(&dir, "q.json", r#"{"chebyshev": [0.1, 0.0, 0.2]}"#);
    let a = run(&["synth", s(&sig), "--grid", "512"]);
    let b = run(&["synth", s(&sig), "--grid", "512"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
