use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_idealsum"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn generate(dir: &Path, name: &str, n: usize) -> PathBuf {
    let p = dir.join(format!("{name}.txt"));
    let out = bin().args(["generate", name, "--n", &n.to_string(), "--output"]).arg(&p).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    p
}

fn run(config: &Path, input: &Path, output: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg("--config").arg(config).arg("--input").arg(input).arg("--output").arg(output).args(extra).output().unwrap()
}

fn report(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn generate_examples() {
    let text = |args: &[&str]| String::from_utf8(bin().arg("generate").args(args).output().unwrap().stdout).unwrap();
    assert_eq!(text(&["squares", "--n", "10"]).lines().collect::<Vec<_>>(), ["1", "0", "0", "1", "0", "0", "0", "0", "1", "0"]);
    assert_eq!(text(&["periodic2", "--n", "4"]).lines().collect::<Vec<_>>(), ["1", "0", "1", "0"]);
    let drift: Vec<f64> = text(&["harmonic_drift", "--n", "50"]).lines().map(|l| l.parse().unwrap()).collect();
    for (k, v) in drift.iter().enumerate() {
        assert_eq!(*v, 0.3 + 1.0 / (k + 1) as f64);
    }
    assert_eq!(text(&["random_bounded(5)", "--n", "20"]), text(&["random_bounded", "--seed", "5", "--n", "20"]));
    let out = bin().args(["generate", "fibonacci", "--n", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown corpus"));
}

#[test]
fn statistical_squares_holds() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "squares", 10_000);
    let cfg = write(dir.path(), "c.json", r#"{"mode":"statistical","matrix":{"kind":"cesaro"}}"#);
    let out_path = dir.path().join("r.json");
    let out = run(&cfg, &input, &out_path, &["--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out_path);
    assert_eq!(r["status"], "holds_at_scale");
    assert_eq!(r["verdicts"]["statistical"]["estimate"]["value"], 0.0);
    assert_eq!(r["scale"]["n"], 10_000);
    assert_eq!(r["series"]["density"].as_array().unwrap().len(), 10_000);
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("n,density\n1,1\n2,0.5\n"));
}

#[test]
fn alternating_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "alternating", 10_000);
    let cfg = write(dir.path(), "c.json", r#"{"mode":"statistical","target":0}"#);
    let out_path = dir.path().join("r.json");
    assert_eq!(run(&cfg, &input, &out_path, &[]).status.code(), Some(1));
    assert_eq!(report(&out_path)["status"], "fails_at_scale");
}

#[test]
fn errors_exit_above_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "squares", 200);
    let out_path = dir.path().join("r.json");
    let neg = write(dir.path(), "neg.json", r#"{"mode":"statistical","matrix":{"kind":"scaled","inner":{"kind":"cesaro"},"factor":-1}}"#);
    assert_eq!(run(&neg, &input, &out_path, &[]).status.code(), Some(3));
    let bad_cfg = write(dir.path(), "bad.json", r#"{"mode":"statistical","scale":{"n":"x"}}"#);
    let out = run(&bad_cfg, &input, &out_path, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));
    let cfg = write(dir.path(), "c.json", r#"{"mode":"statistical"}"#);
    let bad_input = write(dir.path(), "bad.txt", "1\n0\nzero\n");
    let out = run(&cfg, &bad_input, &out_path, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert!(!out_path.exists());
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "density_half", 3000);
    let cfg = write(dir.path(), "c.json", r#"{"mode":"precauchy","alpha":0.25,"beta":0.75}"#);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    run(&cfg, &input, &a, &["--seed", "4"]);
    run(&cfg, &input, &b, &["--seed", "4"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn theorem_modes_list_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let drift = generate(dir.path(), "harmonic_drift", 4000);
    let squares = generate(dir.path(), "squares", 4000);
    let cfg = write(dir.path(), "t.json", r#"{"mode":"tauberian"}"#);
    let out_path = dir.path().join("r.json");
    assert_eq!(run(&cfg, &drift, &out_path, &[]).status.code(), Some(0));
    let r = report(&out_path);
    assert!(r["theorem"]["hypotheses"].as_array().unwrap().len() >= 8);
    assert_eq!(run(&cfg, &squares, &out_path, &[]).status.code(), Some(2));
    let r = report(&out_path);
    assert!(r["theorem"]["conclusion"].is_null());

    let cfg = write(dir.path(), "l.json", r#"{"mode":"limsup","target":0}"#);
    assert_eq!(run(&cfg, &squares, &out_path, &["--scale-N", "2000"]).status.code(), Some(0));
    assert_eq!(report(&out_path)["scale"]["n"], 2000);
}

#[test]
fn decompose_and_cluster_modes() {
    let dir = tempfile::tempdir().unwrap();
    let squares = generate(dir.path(), "squares", 10_000);
    let out_path = dir.path().join("r.json");
    let cfg = write(dir.path(), "d.json", r#"{"mode":"decompose","target":0}"#);
    assert_eq!(run(&cfg, &squares, &out_path, &[]).status.code(), Some(0));
    let r = report(&out_path);
    assert!(r["series"]["t"].as_array().unwrap().iter().all(|v| v == 0.0));
    let alt = generate(dir.path(), "alternating", 2000);
    let cfg = write(dir.path(), "c.json", r#"{"mode":"cluster","target":-1}"#);
    assert_eq!(run(&cfg, &alt, &out_path, &[]).status.code(), Some(0));
    let cfg = write(dir.path(), "c0.json", r#"{"mode":"cluster","target":0}"#);
    assert_eq!(run(&cfg, &alt, &out_path, &[]).status.code(), Some(1));
}

#[test]
fn simons_mode_on_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = (1..=100).map(|n| format!("{},0.5\n", if n % 2 == 0 { 1 } else { -1 })).collect();
    let input = write(dir.path(), "v.txt", &text);
    let cfg = write(dir.path(), "s.json", r#"{"mode":"simons","space":{"kind":"pnorm","p":"inf","d":2},"samples":2000}"#);
    let out_path = dir.path().join("r.json");
    assert_eq!(run(&cfg, &input, &out_path, &[]).status.code(), Some(0));
    let r = report(&out_path);
    assert!(r["detail"]["gap"].as_f64().unwrap() <= 1e-6);
    let smooth = write(dir.path(), "e.json", r#"{"mode":"simons","space":{"kind":"pnorm","p":2,"d":2}}"#);
    assert_eq!(run(&smooth, &input, &out_path, &[]).status.code(), Some(3));
}

#[test]
fn top_level_flags_run_without_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "periodic2", 1000);
    let cfg = write(dir.path(), "c.json", r#"{"mode":"summable","matrix":{"kind":"shift_of","inner":{"kind":"cesaro"},"i_max":8}}"#);
    let out = bin().arg("--config").arg(&cfg).arg("--input").arg(&input).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verdicts"]["summable"]["estimate"]["value"], 0.5);
}
