use std::process::{Command, Output};

use serde_json::Value;

fn extremal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extremal"))
        .arg("--quiet")
        .args(args)
        .env_remove("EXTREMAL_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn subgroup_criterion_holds_for_rational_matrix() {
    let o = extremal(&["criterion", "--n", "2", "--s", "1", "--j", "1", "--bound", "2", "--a", "1/2;1/3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["violated"], false);
}

#[test]
fn liouville_hyperplane_exits_with_violation() {
    let o = extremal(&["--format", "csv", "hyperplane", "--a", "liouville:10:4", "--a", "0", "--Q", "100", "--v", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# config: {\"command\":\"hyperplane\""));
    assert_eq!(lines[2], "# violated: true");
    assert_eq!(lines[3], "I,w,lhs,rhs");
    assert!(lines[4].contains("q0=1000000"));
}

#[test]
fn bad_input_exits_with_error() {
    let o = extremal(&["exponent", "--y", "pi"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn coarse_truncation_is_refused() {
    let o = extremal(&["--precision", "16", "hyperplane", "--a", "golden", "--a", "sqrt2", "--Q", "10", "--v", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too coarse"));
}

#[test]
fn config_file_reproduces_command_line_run() {
    let dir = std::env::temp_dir().join(format!("extremal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command":"line","parameters":{"b":["1/3","golden"],"Q":30,"v":"4"},"seed":3,"output":{"format":"csv"}}"#,
    )
    .unwrap();
    let from_file = extremal(&["--config", cfg.to_str().unwrap()]);
    let from_flags = extremal(&["--seed", "3", "--format", "csv", "line", "--b", "1/3", "--b", "golden", "--Q", "30", "--v", "4"]);
    assert_eq!(from_file.status.code(), from_flags.status.code());
    assert_eq!(stdout(&from_file), stdout(&from_flags));

    let out = dir.join("out.csv");
    let o = extremal(&["--config", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.lines().next().unwrap().contains("out.csv"));
    let body = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&written), body(&stdout(&from_flags)));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = std::env::temp_dir().join(format!("extremal-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, r#"{"command":"line","parameters":{"b":["1/3"],"Q":30,"v":"3"},"sede":3}"#).unwrap();
    assert_eq!(extremal(&["--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seeded_runs_are_deterministic() {
    let args = ["--seed", "11", "measure48", "--Qs", "16", "--samples", "500"];
    let a = extremal(&args);
    let b = extremal(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let c = extremal(&["--seed", "12", "measure48", "--Qs", "16", "--samples", "500"]);
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn decimal_flag_adds_columns() {
    let o = extremal(&["--format", "csv", "--decimal", "exponent", "--y", "liouville:10:3", "--Q", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("quality,quality_decimal"));
}

#[test]
fn strong_verdict_flags_single_liouville_coordinate() {
    let o = extremal(&["strong", "--a", "liouville:10:4", "--a", "0", "--Q", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["summary"]["threshold"], 1);
    assert_eq!(doc["summary"]["not_strongly_extremal_evidence"], true);
}

#[test]
fn goodness_profile_of_monomial_is_near_one() {
    let o = extremal(&["goodness", "--f", "monomial:3", "--alpha", "1/3", "--ball=-1:1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = doc["summary"]["c_hat"][0]["c_hat"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 1e-6, "{c}");
}
