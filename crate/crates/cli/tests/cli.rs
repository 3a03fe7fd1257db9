use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wind-cournot"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "exactly one stderr line, got {text:?}");
    serde_json::from_str(lines[0]).expect("stderr is JSON")
}

#[test]
fn duopoly_solve_reports_phi() {
    let cfg = configs().join("duopoly.json");
    let o = run(&["duopoly", "solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["phi"], serde_json::json!(1.08));
}

#[test]
fn flags_override_config() {
    let cfg = configs().join("duopoly.json");
    let o = run(&["duopoly", "solve", "--config", cfg.to_str().unwrap(), "--d", "0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["phi"], serde_json::json!(1.0));
}

#[test]
fn assumption_failure_exits_three() {
    let o = run(&["duopoly", "sweep", "--s", "3", "--beta", "0.5", "--low", "1.2", "--high", "2", "--over", "d", "--steps", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["exit_code"], 3);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.ends_with("assumption_violated")));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"beta": 0.5, "typo": 1}"#).unwrap();
    let o = run(&["duopoly", "solve", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "config_error");

    let o = run(&["duopoly", "solve", "--s", "3", "--beta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    stderr_json(&o);

    let o = run(&["duopoly", "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    stderr_json(&o);

    let o = run(&["duopoly", "solve", "--s", "3", "--beta", "1.5", "--d", "0.5", "--low", "0.6", "--high", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_mixture_passes() {
    let o = run(&["validate", "--family", "mixture", "--n", "3", "--beta", "0.5", "--d-grid", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let mut rows = csv.lines();
    let header = rows.next().unwrap();
    assert_eq!(header.split(',').count(), 13);
    let body: Vec<&str> = rows.collect();
    assert_eq!(body.len(), 22);
    assert!(!csv.contains("fail"));
    assert_eq!(csv.matches("pass").count(), 2 * 55);
}

#[test]
fn verify_passes_on_example_configs() {
    for name in ["duopoly.json", "duopoly_quadratic.json", "mixed.json"] {
        let cfg = configs().join(name);
        let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--grid", "4000"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["all_pass"], true);
    }
}

#[test]
fn sweeps_are_deterministic_and_rectangular() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["duopoly", "sweep", "--config", "duopoly_sweep.json"],
        &["mixed", "sweep", "--config", "mixed.json", "--steps", "11"],
        &["collusion", "sweep", "--config", "collusion.json"],
        &["info-sharing", "sweep", "--config", "info_sharing.json"],
    ];
    for (i, case) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{i}-{k}.csv"));
            let mut args: Vec<String> = case.iter().map(|s| s.to_string()).collect();
            args[3] = configs().join(case[3]).to_string_lossy().into_owned();
            args.extend(["--out".into(), path.to_string_lossy().into_owned()]);
            let o = bin().args(&args).output().unwrap();
            assert_eq!(o.status.code(), Some(0), "{case:?}: {}", String::from_utf8_lossy(&o.stderr));
            assert!(o.stdout.is_empty());
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{case:?}");
        let text = String::from_utf8(outputs.remove(0)).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let width = reader.headers().unwrap().len();
        for rec in reader.records() {
            assert_eq!(rec.unwrap().len(), width);
        }
    }
}

#[test]
fn collusion_assess_worked_point() {
    let cfg = configs().join("collusion.json");
    let o = run(&["collusion", "assess", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let lo = v["interval"][0].as_f64().unwrap();
    let hi = v["interval"][1].as_f64().unwrap();
    assert!((lo - 0.215).abs() < 1e-12 && (hi - 0.423125).abs() < 1e-12);
    assert!((v["gamma_hat"]["value"].as_f64().unwrap() - 0.00867188).abs() < 1e-8);
}

#[test]
fn json_sweep_output() {
    let o = run(&["multi", "sweep", "--s", "3", "--n", "3", "--beta", "0.5", "--low", "0.3", "--high", "2", "--steps", "5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    assert_eq!(v[4]["status"], "ok");
}
