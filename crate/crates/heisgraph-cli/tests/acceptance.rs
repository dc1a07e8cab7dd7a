//! End-to-end runs of the binary: every command must be deterministic
//! (byte-identical outputs for identical config and seed) and exit codes
//! must separate diagnostic failures from configuration errors.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_heisgraph")
}

fn write_config(dir: &Path, name: &str, body: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(body).unwrap()).unwrap();
    path
}

fn run(subcommand: &str, config: &Path, out: &Path) -> i32 {
    let status = Command::new(bin())
        .arg(subcommand)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    status.code().unwrap_or(-1)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name().into_string().unwrap();
        out.push((name, std::fs::read(entry.path()).unwrap()));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn assert_deterministic(subcommand: &str, config_body: serde_json::Value) {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "config.json", &config_body);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let code_a = run(subcommand, &config, &out_a);
    let code_b = run(subcommand, &config, &out_b);
    assert_eq!(code_a, 0, "{subcommand} first run failed");
    assert_eq!(code_b, 0, "{subcommand} second run failed");
    let a = dir_bytes(&out_a);
    let b = dir_bytes(&out_b);
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty(), "{subcommand} produced no files");
    for ((na, ba), (nb, bb)) in a.iter().zip(b.iter()) {
        assert_eq!(na, nb);
        assert_eq!(ba, bb, "{subcommand}: {na} differs between runs");
    }
}

#[test]
fn acceptance_11_determinism_construct() {
    assert_deterministic(
        "construct",
        serde_json::json!({
            "command": "construct",
            "surface": {"zoo": "herringbone", "params": {"a": 1.0}},
            "domain": {"x0": 0.0, "x1": 1.0, "z0": -1.0, "z1": 1.0},
            "resolution": {"nx": 33, "nz": 65},
            "section": {"x": 0.5},
            "seed": 7,
        }),
    );
    assert_deterministic(
        "construct",
        serde_json::json!({
            "command": "construct",
            "surface": {"zoo": "lambda_k", "params": {"cantor": {"depth": 3, "alpha": 1.0}}},
            "domain": {"x0": -1.0, "x1": 1.0, "z0": -1.0, "z1": 1.0},
            "resolution": {"nx": 33, "nz": 33},
            "seed": 7,
        }),
    );
    println!("ACCEPTANCE 11a determinism (construct): PASS");
}

#[test]
fn acceptance_11_determinism_analysis_commands() {
    assert_deterministic(
        "analyze",
        serde_json::json!({
            "command": "analyze",
            "surface": {"zoo": "parabola", "params": {}},
            "resolution": {"nx": 65, "nz": 65},
            "seed": 3,
        }),
    );
    assert_deterministic(
        "calibrate",
        serde_json::json!({
            "command": "calibrate",
            "k": {"cantor": {"depth": 2, "alpha": 1.0}},
            "resolution": {"nx": 65, "nz": 65},
            "calibrate": {"boxes": 12, "box_h": 0.02, "div_h": 1e-3},
            "seed": 3,
        }),
    );
    assert_deterministic(
        "vary",
        serde_json::json!({
            "command": "vary",
            "surface": {"zoo": "parabola", "params": {}},
            "resolution": {"nx": 33, "nz": 33},
            "potential": {
                "u0": "0.1*exp(-8*(x*x+z*z))",
                "u1": "0",
                "support": {"x0": -0.9, "x1": 0.9, "z0": -0.9, "z1": 0.9},
            },
            "t": 0.001,
            "seed": 3,
        }),
    );
    assert_deterministic(
        "limits",
        serde_json::json!({
            "command": "limits",
            "surface": {"zoo": "herringbone", "params": {"a": 1.0}},
            "domain": {"x0": 0.0, "x1": 1.0, "z0": -1.0, "z1": 1.0},
            "resolution": {"nx": 33, "nz": 129},
            "stretch": {"r_list": [2.0, 4.0, 8.0, 16.0]},
            "indicator": {"eps_list": [0.4, 0.2], "resolution": 32},
            "seed": 3,
        }),
    );
    println!("ACCEPTANCE 11b determinism (analyze/calibrate/vary/limits): PASS");
}

#[test]
fn grid_files_round_trip_between_commands() {
    // construct writes grid.json; analyze consumes it through grid_file and
    // reproduces the zoo-built report
    let tmp = tempfile::tempdir().unwrap();
    let construct = write_config(
        tmp.path(),
        "construct.json",
        &serde_json::json!({
            "command": "construct",
            "surface": {"zoo": "plane", "params": {"m": 1.0}},
            "domain": {"x0": 0.0, "x1": 1.0, "z0": 0.0, "z1": 1.0},
            "resolution": {"nx": 33, "nz": 33},
        }),
    );
    let out = tmp.path().join("files");
    assert_eq!(run("construct", &construct, &out), 0);
    let grid_path = out.join("grid.json");
    let analyze = write_config(
        tmp.path(),
        "analyze.json",
        &serde_json::json!({
            "command": "analyze",
            "surface": {"grid_file": grid_path.to_str().unwrap()},
            "domain": {"x0": 0.0, "x1": 1.0, "z0": 0.0, "z1": 1.0},
            "resolution": {"nx": 33, "nz": 33},
        }),
    );
    let out2 = tmp.path().join("analysis");
    assert_eq!(run("analyze", &analyze, &out2), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out2.join("report.json")).unwrap()).unwrap();
    let energy = report["energy"].as_f64().unwrap();
    assert!((energy - 0.5).abs() < 1e-9, "unit-slope plane energy {energy}");
}

#[test]
fn exit_codes_separate_failure_kinds() {
    let tmp = tempfile::tempdir().unwrap();
    // malformed surface spec: usage/config error
    let bad = write_config(
        tmp.path(),
        "bad.json",
        &serde_json::json!({
            "command": "construct",
            "surface": {"zoo": "no_such_surface", "params": {}},
        }),
    );
    assert_eq!(run("construct", &bad, &tmp.path().join("o1")), 2);

    // unknown keys are rejected
    let unknown = write_config(
        tmp.path(),
        "unknown.json",
        &serde_json::json!({
            "command": "construct",
            "surface": {"zoo": "plane", "params": {"m": 1.0}},
            "bogus_key": 1,
        }),
    );
    assert_eq!(run("construct", &unknown, &tmp.path().join("o2")), 2);

    // command/subcommand mismatch
    let mismatch = write_config(
        tmp.path(),
        "mismatch.json",
        &serde_json::json!({
            "command": "analyze",
            "surface": {"zoo": "plane", "params": {"m": 1.0}},
        }),
    );
    assert_eq!(run("construct", &mismatch, &tmp.path().join("o3")), 2);

    // perturbed calibration: diagnostics must fail with exit 1
    let perturbed = write_config(
        tmp.path(),
        "perturbed.json",
        &serde_json::json!({
            "command": "calibrate",
            "k": {"cantor": {"depth": 2, "alpha": 1.0}},
            "resolution": {"nx": 33, "nz": 33},
            "calibrate": {
                "boxes": 8,
                "box_h": 0.02,
                "div_h": 1e-3,
                "perturb": {"wedge": 1, "amount": 0.05},
            },
            "seed": 5,
        }),
    );
    assert_eq!(run("calibrate", &perturbed, &tmp.path().join("o4")), 1);

    // non-compact potential support: configuration error
    let loose = write_config(
        tmp.path(),
        "loose.json",
        &serde_json::json!({
            "command": "vary",
            "surface": {"zoo": "parabola", "params": {}},
            "resolution": {"nx": 17, "nz": 17},
            "potential": {
                "u0": "0.1*x",
                "support": {"x0": -2.0, "x1": 2.0, "z0": -2.0, "z1": 2.0},
            },
        }),
    );
    assert_eq!(run("vary", &loose, &tmp.path().join("o5")), 2);
}
