use std::path::Path;
use std::process::{Command, Output};

fn relaysim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaysim"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.toml", "n_slots = 10\ncolour = 3\n");
    assert_eq!(relaysim(&["run", "--config", &unknown]).status.code(), Some(1));
    let bad = write(dir.path(), "b.json", r#"{"fairness": 2.0}"#);
    assert_eq!(relaysim(&["run", "--config", &bad]).status.code(), Some(1));
    assert_eq!(
        relaysim(&[
            "sweep",
            "--sweep-start",
            "0",
            "--sweep-stop",
            "10",
            "--sweep-step",
            "-1"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(relaysim(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(
        relaysim(&["run", "--config", "/definitely/missing.toml"]).status.code(),
        Some(2)
    );
    let out = dir.path().join("missing-dir").join("x.csv");
    assert_eq!(
        relaysim(&["trace", "--n-slots", "5", "--trace-csv", out.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(relaysim(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_prints_json_summary() {
    let out = relaysim(&["run", "--n-slots", "20000", "--gamma-db", "10", "--seed", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["r_sum_analytic"].as_f64().unwrap(), 0.9048374180359594);
    assert_eq!(v["n_slots"].as_u64().unwrap(), 20_000);
    assert_eq!(v["warmup"].as_u64().unwrap(), 200);
    assert!((v["report"]["r_sum"].as_f64().unwrap() - 0.905).abs() < 0.05);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "n_slots = 5000\nschemes = [\"tdbc\"]\n[sweep]\nstart = 0\nstop = 20\nstep = 10\n",
    );
    let out = relaysim(&["sweep", "--config", &cfg, "--schemes", "twoway,proposed", "--seed", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("0.0,proposed,"));
    assert!(lines[2].starts_with("0.0,twoway,"));
    assert!(lines[6].ends_with(",5000,9"));
}

#[test]
fn bench_skips_the_proposed_scheme() {
    let out = relaysim(&["bench", "--n-slots", "2000", "--gamma-db", "40"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let schemes: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(schemes, ["twoway", "tdbc", "mabc"]);
}

#[test]
fn trace_and_run_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let json = dir.path().join("r.json");
    let out = relaysim(&[
        "run",
        "--n-slots",
        "100",
        "--trace",
        "--trace-csv",
        trace.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(rows.lines().count(), 101);
    assert!(rows.starts_with("slot,gamma1,gamma2,region,mode,q1,q2,delivered12,delivered21,starved\n"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["totals"]["slots"].as_u64().unwrap(), 100);
    assert_eq!(relaysim(&["run", "--n-slots", "100", "--trace"]).status.code(), Some(1));
}

#[test]
fn verify_passes_and_reports_json() {
    let out = relaysim(&[
        "verify",
        "--points-per-branch",
        "20",
        "--region-samples",
        "50000",
        "--short-traces",
        "24",
        "--long-traces",
        "3",
        "--long-length",
        "500",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], serde_json::Value::Bool(true));
    assert_eq!(v["suites"].as_array().unwrap().len(), 4);
    assert_eq!(v["suites"][0]["cases"].as_u64().unwrap(), 160);
}
