use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn predlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_predlab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("scenarios.toml");
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn sigma_column(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn sigma_ma1_matches_closed_form() {
    let o = predlab(&["--n", "100", "sigma", "ma1:b=1,sigma2=1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = sigma_column(&stdout(&o));
    assert_eq!(s.len(), 101);
    for (n, v) in s.iter().enumerate() {
        let want = (n as f64 + 2.0) / (n as f64 + 1.0);
        assert!(((v - want) / want).abs() < 1e-14, "n = {n}: {v}");
    }
}

#[test]
fn malformed_density_is_a_parse_error() {
    let o = predlab(&["sigma", "pollaczekk:a=1"]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("line 1, column 1") && e.contains("pollaczekk"), "{e}");
}

#[test]
fn budget_violation_names_required_bits() {
    let o = predlab(&["--n", "200", "--precision", "128", "sigma", "arc:base=const(1),arcs=[(pi/2,pi/4)]"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("needs at least 1173 bits, got 128"), "{}", stderr(&o));
}

#[test]
fn degeneracy_exits_with_three() {
    let o = predlab(&["--n", "200", "--precision", "64", "--override-budget", "sigma", "arc:base=const(1),arcs=[(pi/2,pi/4)]"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    // the trace up to the stop is still reported
    let s = sigma_column(&stdout(&o));
    assert!(s.len() > 5 && s.len() < 201);
}

#[test]
fn tau_reports_value_or_bracket() {
    let o = predlab(&["--format", "json", "tau", "[(pi/2,pi/4)]"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["method"], "closed-form-arc");
    assert!((v["value"].as_f64().unwrap() - (std::f64::consts::PI / 8.0).sin()).abs() < 1e-15);
    assert!(v.get("bracket").is_none());

    let o = predlab(&["--format", "json", "tau", "[(1,0.5),(-1,0.3)]"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let b = v["bracket"].as_array().unwrap();
    let (lo, hi) = (b[0].as_f64().unwrap(), b[1].as_f64().unwrap());
    let est = v["value"].as_f64().unwrap();
    assert!(lo <= est && est <= hi);
    assert!(v["n_points"].as_u64().is_some());
}

#[test]
fn geomean_closed_form() {
    let o = predlab(&["--format", "json", "geomean", "ma1:b=0.5,sigma2=1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let g: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!((g - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
    assert_eq!(v["classification"], "nondeterministic");
}

#[test]
fn eigen_tridiagonal() {
    let o = predlab(&["--n", "30", "eigen", "ma1:b=1"]);
    assert_eq!(code(&o), 0);
    for l in stdout(&o).lines().skip(1) {
        let f: Vec<&str> = l.split(',').collect();
        let n: f64 = f[0].parse().unwrap();
        let lam: f64 = f[1].parse().unwrap();
        let want = 2.0 - 2.0 * (std::f64::consts::PI / (n + 2.0)).cos();
        assert!((lam - want).abs() < 1e-10, "n = {n}");
    }
}

#[test]
fn verify_writes_verdict_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = predlab(&["--out", out.to_str().unwrap(), "verify", "inoue"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("inoue.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert!(fs::read_to_string(out.join("inoue.csv")).unwrap().starts_with("n,value,ln_value,nth_root,ratio\n"));
}

#[test]
fn failing_verdict_exits_with_one() {
    let o = predlab(&["--n", "8", "--precision", "128", "verify", "rosenblatt1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unknown_verification_is_usage_error() {
    let o = predlab(&["verify", "kolmogorov"]);
    assert_eq!(code(&o), 2);
}

const PASSING: &str = r#"
out = "reports"

[[scenarios]]
id = "ma1-b1"
density = "ma1:b=1"
n_max = 100
verify = "none"

[[scenarios]]
id = "arc-half"
density = "arc:base=const(1),arcs=[(pi/2,pi/2)]"
n_max = 200
precision = 512
verify = ["rosenblatt1", "davisson"]

[[scenarios]]
id = "arfima"
density = "arfima:d=0.25"
n_max = 500
verify = ["inoue"]
"#;

#[test]
fn config_with_passing_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PASSING);
    let out = dir.path().join("r");
    let o = predlab(&["--out", out.to_str().unwrap(), "run", &cfg]);
    assert_eq!(code(&o), 0, "{}\n{}", stdout(&o), stderr(&o));
    let table = stdout(&o);
    let ids: Vec<&str> = table.lines().skip(1).map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(ids, ["arc-half", "arfima", "ma1-b1"]);
    let s = sigma_column(&fs::read_to_string(out.join("ma1-b1/trace.csv")).unwrap());
    assert!(((s[100] - 102.0 / 101.0) / s[100]).abs() < 1e-14);
    for f in ["trace.csv", "trace.json", "rates.json", "summary.txt", "rosenblatt1.json", "davisson.json"] {
        assert!(out.join("arc-half").join(f).exists(), "{f}");
    }
    // atomic writes leave no temporaries behind
    for e in fs::read_dir(out.join("ma1-b1")).unwrap() {
        assert!(!e.unwrap().file_name().to_string_lossy().ends_with(".tmp"));
    }
}

#[test]
fn config_with_one_failing_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[[scenarios]]
id = "a"
density = "ma1:b=1"
n_max = 50

[[scenarios]]
id = "b"
density = "arc:base=const(1),arcs=[(pi/2,pi/2)]"
n_max = 8
precision = 128
verify = "rosenblatt1"

[[scenarios]]
id = "c"
density = "white:sigma2=2"
n_max = 20
"#;
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("r");
    let o = predlab(&["--out", out.to_str().unwrap(), "run", &cfg]);
    assert_eq!(code(&o), 1);
    let t = stdout(&o);
    assert_eq!(t.lines().filter(|l| l.contains(" pass ")).count(), 2, "{t}");
    assert!(t.lines().any(|l| l.starts_with("b ") && l.contains("fail")));
}

#[test]
fn empty_config_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenarios = []\n");
    let o = predlab(&["run", &cfg]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn config_density_error_points_into_file() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[[scenarios]]\nid = \"x\"\ndensity = \"ma1:b=1,sigma3=1\"\n";
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("r");
    let o = predlab(&["--out", out.to_str().unwrap(), "run", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("line 3, column"), "{}", stdout(&o));
}

#[test]
fn config_validation() {
    let dir = tempfile::tempdir().unwrap();
    let dup = "[[scenarios]]\nid = \"x\"\ndensity = \"ma1:b=1\"\n[[scenarios]]\nid = \"x\"\ndensity = \"ma1:b=1\"\n";
    let o = predlab(&["run", &write_config(dir.path(), dup)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("duplicate scenario id"));
    let big = "[[scenarios]]\nid = \"x\"\ndensity = \"ma1:b=1\"\nn_max = 5001\n";
    assert_eq!(code(&predlab(&["run", &write_config(dir.path(), big)])), 2);
    let low = "[[scenarios]]\nid = \"x\"\ndensity = \"ma1:b=1\"\nprecision = 32\n";
    assert_eq!(code(&predlab(&["run", &write_config(dir.path(), low)])), 2);
    let syntax = "[[scenarios]\nid = 1\n";
    let o = predlab(&["run", &write_config(dir.path(), syntax)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn budget_violation_in_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[[scenarios]]\nid = \"x\"\ndensity = \"arc:base=const(1),arcs=[(0,pi/8)]\"\nn_max = 300\nprecision = 256\n";
    let out = dir.path().join("r");
    let o = predlab(&["--out", out.to_str().unwrap(), "run", &write_config(dir.path(), body)]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("needs at least"), "{}", stdout(&o));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PASSING);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&predlab(&["--out", a.to_str().unwrap(), "run", &cfg])), 0);
    assert_eq!(code(&predlab(&["--out", b.to_str().unwrap(), "run", "--jobs", "1", &cfg])), 0);
    for id in ["ma1-b1", "arc-half", "arfima"] {
        let mut names: Vec<_> = fs::read_dir(a.join(id)).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 4);
        for n in names {
            assert_eq!(fs::read(a.join(id).join(&n)).unwrap(), fs::read(b.join(id).join(&n)).unwrap(), "{id}/{n:?}");
        }
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[[scenarios]]\nid = \"x\"\ndensity = \"ma1:b=1\"\nn_max = 100\n";
    let out = dir.path().join("r");
    let o = predlab(&["--out", out.to_str().unwrap(), "--n", "12", "--format", "json", "run", &write_config(dir.path(), body)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["id"], "x");
    assert_eq!(sigma_column(&fs::read_to_string(out.join("x/trace.csv")).unwrap()).len(), 13);
}
