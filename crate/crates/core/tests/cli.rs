use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mpshrink"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}=");
    text.lines()
        .rev()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no `{key}=` in:\n{text}"))
}

fn num(text: &str, key: &str) -> f64 {
    value(text, key).parse().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const TOY: &str = "+1 1:1\n-1 1:-1\n";
const SMALL: &str = "\
+1 1:0.9 2:0.1
+1 1:0.7 2:-0.4
+1 1:0.5 3:0.3
-1 1:-0.8 2:0.2
-1 1:-0.6 2:-0.5
-1 1:-0.4 3:-0.1
";

#[test]
fn train_then_eval_reproduces_margin() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "small.txt", SMALL);
    let model = dir.path().join("m.txt");
    for algo in [
        vec!["--algo", "mpvs", "--n", "2"],
        vec!["--algo", "mpcs", "--lambda", "0.01"],
        vec!["--algo", "perceptron"],
    ] {
        let mut args = vec!["train", data.as_str(), "--model-out", model.to_str().unwrap()];
        args.extend(algo.iter().copied());
        let t = run(&args);
        assert_eq!(t.status.code(), Some(0), "{}", String::from_utf8_lossy(&t.stderr));
        let train_out = stdout(&t);
        let e = run(&["eval", "--model-in", model.to_str().unwrap(), data.as_str()]);
        assert_eq!(e.status.code(), Some(0));
        let eval_out = stdout(&e);
        let (a, b) = (num(&train_out, "gamma_prime"), num(&eval_out, "gamma_prime"));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        assert_eq!(value(&eval_out, "errors_positive"), "0");
        assert_eq!(value(&eval_out, "errors_negative"), "0");
        assert_eq!(value(&train_out, "argmin_pattern"), value(&eval_out, "argmin_pattern"));
    }
}

#[test]
fn b_auto_is_radius_squared() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "small.txt", SMALL);
    let out = stdout(&run(&["train", &data]));
    let r = num(&out, "R");
    assert!((num(&out, "b") - r * r).abs() <= 1e-12 * r * r);
}

#[test]
fn toy_trace_and_certificate() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "toy.txt", TOY);
    let out = stdout(&run(&["train", &data, "--n", "0", "--eta", "1", "--b", "0.5", "--with-oracle"]));
    assert_eq!(value(&out, "t_c"), "2");
    assert_eq!(num(&out, "gamma_prime"), 1.0);
    assert_eq!(num(&out, "f_after"), 1.0);
    assert_eq!(num(&out, "gamma_d_oracle"), 1.0);
}

#[test]
fn csv_report_has_header_and_row() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "toy.txt", TOY);
    let out = stdout(&run(&["train", &data, "--report", "csv"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    assert!(lines[1].starts_with("mpvs,2,"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "small.txt", SMALL);
    // budget
    let o = run(&["train", &data, "--max-updates", "1", "--lup", "1"]);
    assert_eq!(o.status.code(), Some(2));
    // configuration
    assert_eq!(run(&["train", &data, "--algo", "mpcs"]).status.code(), Some(3));
    assert_eq!(run(&["train", &data, "--eta", "-1"]).status.code(), Some(3));
    assert_eq!(run(&["train", &data, "--lambda", "1e9", "--algo", "mpcs"]).status.code(), Some(3));
    assert_eq!(run(&["train"]).status.code(), Some(3));
    assert_eq!(run(&["autotune", &data, "--algo", "perceptron"]).status.code(), Some(3));
    // I/O and parse
    let missing = dir.path().join("nope.txt");
    assert_eq!(run(&["train", missing.to_str().unwrap()]).status.code(), Some(4));
    let bad = write(&dir, "bad.txt", "+1 1:x\n");
    assert_eq!(run(&["train", &bad]).status.code(), Some(4));
    let empty = write(&dir, "empty.txt", "");
    assert_eq!(run(&["train", &empty]).status.code(), Some(4));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn eval_rejects_wider_data() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "toy.txt", TOY);
    let model = dir.path().join("m.txt");
    run(&["train", &data, "--model-out", model.to_str().unwrap()]);
    let wide = write(&dir, "wide.txt", "+1 1:1 5:1\n");
    let o = run(&["eval", "--model-in", model.to_str().unwrap(), &wide]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn autotune_stages() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "small.txt", SMALL);
    // a low target is met by the first stage
    let o = run(&["autotune", &data, "--algo", "mpcs", "--target-f", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("stage=")).count(), 1);
    assert_eq!(value(&out, "reached"), "true");

    let o = run(&["autotune", &data, "--algo", "mpcs", "--target-f", "0.99", "--max-stages", "40"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(num(&stdout(&o), "f_after") >= 0.99);

    // unreachable in one stage: budget exit, best model still written
    let model = dir.path().join("best.txt");
    let o = run(&[
        "autotune", &data, "--algo", "mpcs", "--target-f", "0.999999", "--max-stages", "1",
        "--model-out", model.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(Path::new(&model).exists());
}

#[test]
fn oracle_outputs() {
    let dir = TempDir::new().unwrap();
    let toy = write(&dir, "toy.txt", TOY);
    let out = stdout(&run(&["oracle", &toy, "--witness"]));
    assert!((num(&out, "gamma_d") - 1.0).abs() < 1e-12);
    assert_eq!(value(&out, "separable"), "true");
    assert!(out.lines().any(|l| l.starts_with("u 1 1.0")));

    // one pattern [3, 4]: the margin is its norm
    let one = write(&dir, "one.txt", "+1 1:3\n");
    let out = stdout(&run(&["oracle", &one, "--rho", "4"]));
    assert!((num(&out, "gamma_d") - 5.0).abs() < 1e-12);

    // segment from [2, 1] to [0, -1]; nearest point [0.5, -0.5]
    let seg = write(&dir, "seg.txt", "+1 1:2\n-1 1:0\n");
    let out = stdout(&run(&["oracle", &seg]));
    assert!((num(&out, "gamma_d") - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn summary_and_selftest() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "small.txt", SMALL);
    let o = run(&["summary", &data]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).is_empty());
    let o = run(&["selftest", "--n-max", "4", "--t-max", "200"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| l.starts_with("pass ")));
}
