//! End-to-end CLI checks: the documented command surface, exit codes, and
//! byte-identical output on repeated runs.

use std::process::Command;

fn weilform(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_weilform"))
        .args(args)
        .env_remove("WEILFORM_CONFIG")
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn fqm_info_matches_documented_example() {
    let (stdout, _, code) = weilform(&["fqm", "info", "--spec", "L:3:1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["order"], 3);
    assert_eq!(v["level"], 3);
    assert_eq!(v["nondegenerate"], true);
}

#[test]
fn dim_critical_via_matrix_file() {
    let dir = std::env::temp_dir().join("weilform-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f1.json");
    std::fs::write(&path, r#"{"twoF": [[2]]}"#).unwrap();
    let arg = format!("@{}", path.display());
    let (stdout, _, code) = weilform(&["dim", "critical", "--matrix", &arg]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["total"], 0);
}

#[test]
fn exit_codes_by_error_class() {
    // usage errors exit 2
    let (_, stderr, code) = weilform(&["fqm", "info", "--spec", "Q:3"]);
    assert_eq!(code, 2, "stderr: {stderr}");
    let (_, _, code) = weilform(&["nonsense"]);
    assert_eq!(code, 2);
    // resource budget violations exit 3
    let (_, _, code) = weilform(&[
        "inv",
        "--spec",
        "H:90",
        "--budget",
        "max_module_order=100",
    ]);
    assert_eq!(code, 3);
}

#[test]
fn verify_suite_exits_zero_and_reports() {
    let (stdout, _, code) = weilform(&["verify", "milgram"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["suite"], "milgram");
    assert_eq!(v["failures"], 0);
    assert_eq!(v["checks"].as_array().unwrap().len(), 20);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["qexp", "block", "--eta", "-1", "--args", "2,1,3", "--order", "6"];
    let (a, _, _) = weilform(&args);
    let (b, _, _) = weilform(&args);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["meta"]["weight"], "1/1");
    assert_eq!(v["meta"]["index"], "7/1");
    assert_eq!(v["meta"]["char"], 8);
}

#[test]
fn config_file_budgets_are_honored() {
    let dir = std::env::temp_dir().join("weilform-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, r#"{"max_module_order": 10}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_weilform"))
        .args(["fqm", "info", "--spec", "D:36"])
        .env("WEILFORM_CONFIG", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "order 72 must exceed the configured budget");
}
