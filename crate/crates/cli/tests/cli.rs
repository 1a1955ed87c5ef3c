//! End-to-end tests of the binary: exit codes, JSON shape, and the
//! file-based subcommands.

use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermat-mirror"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn milnor_number_of_the_cubic() {
    let out = run(&["weights", "--exponents", "3,3,3", "--emit", "milnor"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["milnor"], json!(8));
    assert_eq!(doc["schema"]["name"], json!("weights"));
    assert_eq!(doc["schema"]["version"], json!(1));
}

#[test]
fn gkz_residuals_vanish() {
    let out = run(&["ifunc", "lg", "--exponents", "3,3,3", "--order", "2", "--emit", "gkz"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["all_residuals_zero"], json!(true));
    assert_eq!(doc["nonzero_residuals"], json!([]));
}

#[test]
fn non_calabi_yau_exponents_are_a_config_error() {
    let out = run(&["ifunc", "lg", "--exponents", "3,3", "--order", "2", "--emit", "gkz"]);
    assert_eq!(code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("Calabi-Yau"), "stderr should explain the rejection: {msg}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["weights", "--exponents", "3,3,3", "--no-such-flag"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_emission_is_a_config_error() {
    let out = run(&["weights", "--exponents", "3,3,3", "--emit", "nonsense"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn injected_failure_exits_one_and_names_the_identity() {
    let out = run(&[
        "check-suite",
        "--profile",
        "fast",
        "--inject-failure",
        "milnor-numbers",
    ]);
    assert_eq!(code(&out), 1);
    let doc = stdout_json(&out);
    assert_eq!(doc["all_passed"], json!(false));
    let failed: Vec<&Value> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == json!(false))
        .collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["name"], json!("milnor-numbers"));
    assert!(failed[0]["detail"].as_str().unwrap().contains("Milnor number"));
}

#[test]
fn series_emission_round_trips_through_the_canonical_encoding() {
    let out = run(&[
        "ifunc", "gw", "--exponents", "3,3,3", "--q-order", "2", "--t-order", "0",
        "--emit", "mirror-map",
    ]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    for component in doc["components"].as_array().unwrap() {
        let series = series_core::json::series_from_json(component).expect("round-trip");
        assert_eq!(series_core::json::series_to_json(&series), *component);
    }
}

fn temp_file(name: &str, contents: &Value) -> PathBuf {
    let path = std::env::temp_dir().join(format!("fermat-mirror-test-{}-{name}", std::process::id()));
    std::fs::write(&path, serde_json::to_string(contents).unwrap()).unwrap();
    path
}

#[test]
fn quantize_acts_on_a_file_potential() {
    let r_matrix = temp_file(
        "r.json",
        &json!({
            "gram": [["1", "0"], ["0", "1"]],
            "mats": [
                [["1", "0"], ["0", "1"]],
                [["0", "1/2"], ["-1/2", "0"]],
            ],
        }),
    );
    let potential = temp_file(
        "f.json",
        &json!({
            "rank": 2,
            "genus_cap": 2,
            "gram": [["1", "0"], ["0", "1"]],
            "unit": ["1", "0"],
            "terms": [
                { "genus": 0, "key": [[0, 0], [0, 0], [0, 0]], "value": "1" },
                { "genus": 1, "key": [[1, 1]], "value": "1/2" },
            ],
        }),
    );
    let out = run(&[
        "quantize",
        "--rank", "2",
        "--r-matrix", r_matrix.to_str().unwrap(),
        "--potential", potential.to_str().unwrap(),
        "--genus-cap", "2",
    ]);
    std::fs::remove_file(&r_matrix).ok();
    std::fs::remove_file(&potential).ok();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["potential"]["rank"], json!(2));
    assert!(!doc["potential"]["terms"].as_array().unwrap().is_empty());
}

#[test]
fn ancestor_assembles_the_point_potential() {
    let data = temp_file(
        "d.json",
        &json!({
            "u": ["0"],
            "delta": ["1"],
            "psi": [["1"]],
            "r_mats": [
                [["1"]], [["0"]], [["0"]], [["0"]], [["0"]],
                [["0"]], [["0"]], [["0"]], [["0"]], [["0"]],
            ],
        }),
    );
    let out = run(&[
        "ancestor",
        "--data", data.to_str().unwrap(),
        "--genus-cap", "2",
        "--jet-cap", "4",
    ]);
    std::fs::remove_file(&data).ok();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    let terms = doc["potential"]["terms"].as_array().unwrap();
    // <tau_1>_1 = 1/24 must appear among the assembled coefficients
    let has_tau1 = terms.iter().any(|t| {
        t["genus"] == json!(1)
            && t["key"] == json!([[1, 0]])
            && t["value"]["num"] == json!("1")
            && t["value"]["den"] == json!("24")
    });
    assert!(has_tau1, "missing <tau_1> term: {terms:?}");
}

#[test]
fn monodromy_reads_a_waypoint_file() {
    let path = temp_file(
        "loop.json",
        &json!([[0.1, 0.0], [0.0, 0.1], [-0.1, 0.0], [0.0, -0.1], [0.1, 0.0]]),
    );
    let out = run(&["e6", "--order", "30", "--emit", &format!("monodromy:{}", path.display())]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["snapped"], json!([[1, 3], [0, 1]]));
    assert_eq!(doc["level_three"], json!(true));
}
