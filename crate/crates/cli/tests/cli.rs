use std::path::PathBuf;
use std::process::{Command, Output};

use dsfrob_core::registry::{load_registry, Registry, REGISTRY_ENV};
use serde_json::Value;

fn dsfrob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsfrob"))
        .args(args)
        .env_remove(REGISTRY_ENV)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, text: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("dsfrob-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn list_shows_e7a4() {
    let o = dsfrob(&["list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().find(|l| l.contains("E7(a4)")).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[2], "6");
    assert!(row.ends_with("u(1)² ⊕ su(2) ⊕ su(3)²"), "{row}");
}

#[test]
fn list_json_round_trips() {
    let o = dsfrob(&["list", "--format", "json"]);
    assert!(o.status.success());
    let reg = load_registry(&stdout(&o)).unwrap();
    assert_eq!(reg.as_slice(), Registry::builtin().records());
}

#[test]
fn empty_registry_lists_nothing() {
    let p = temp_file("empty.reg", "");
    let o = dsfrob(&["--registry", p.to_str().unwrap(), "list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn registry_from_env() {
    let p = temp_file("env.reg", "");
    let o = Command::new(env!("CARGO_BIN_EXE_dsfrob"))
        .arg("list")
        .env(REGISTRY_ENV, &p)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn validate_d4a1_reports_pairing() {
    let o = dsfrob(&["validate", "D4(a1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("U(w) = [1, 2], pairs sum to 3"));
}

#[test]
fn corrupted_registry_names_failing_check() {
    let o = dsfrob(&["list", "--format", "json"]);
    let mut v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let classes = v["classes"].as_array_mut().unwrap();
    classes.retain(|c| c["label"] == "D4(a1)");
    // exponents of the Coxeter class in place of 1 1 3 3; 5 is not a weight
    classes[0]["exponents"] = serde_json::json!([1, 3, 3, 5]);
    let p = temp_file("bad.json", &v.to_string());
    let o = dsfrob(&["--registry", p.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("D4(a1) FAIL"), "{out}");
    assert!(out.lines().any(|l| l.trim_start().starts_with("FAIL") && l.contains("inclusion")), "{out}");
}

#[test]
fn unreadable_registry_is_usage_error() {
    let o = dsfrob(&["--registry", "/nonexistent/dsfrob.reg", "list"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_class_exits_two() {
    for cmd in ["validate", "frobenius", "rgroup"] {
        let o = dsfrob(&[cmd, "Z9(q)"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("unknown class"));
    }
}

#[test]
fn rgroup_refuses_f4a1_without_flag() {
    let o = dsfrob(&["rgroup", "F4(a1)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("--experimental"));
}

#[test]
fn frobenius_a2_passes() {
    let o = dsfrob(&["frobenius", "A2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("d = 1/3"));
    assert!(out.contains("ok    wdvv"));
}

#[test]
fn frobenius_json_is_an_array() {
    let o = dsfrob(&["--format", "json", "frobenius", "A1", "A2", "--level", "fast"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let a = v.as_array().unwrap();
    assert_eq!(a.len(), 2);
    assert!(a.iter().all(|r| r["passed"] == true));
}

#[test]
fn rgroup_a3_is_s4() {
    let o = dsfrob(&["--format", "json", "rgroup", "A3"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["order"], 24);
}

#[test]
fn bad_window_is_rejected() {
    let o = dsfrob(&["frobenius", "A2", "--window", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["--jobs", "4", "frobenius", "A1", "A2", "A3", "--level", "fast"];
    let a = dsfrob(&args);
    let b = dsfrob(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = dsfrob(&["--jobs", "1", "frobenius", "A1", "A2", "A3", "--level", "fast"]);
    assert_eq!(a.stdout, c.stdout);
}
