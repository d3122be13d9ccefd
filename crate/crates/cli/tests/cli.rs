use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metastab_cli::output::{read_csv, read_json, Cell};

fn metastab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metastab")).args(args).output().unwrap()
}

fn succeed(args: &[&str]) {
    let out = metastab(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn num(cell: &Cell) -> f64 {
    match cell {
        Cell::Num(x) => *x,
        other => panic!("not a number: {other:?}"),
    }
}

const LAMBDA_FIG2: &str = r#"
[model]
kind = "lambda"
omega = 0.01
gamma = 1e-5
"#;

#[test]
fn undriven_steady_state_is_the_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "steady.toml",
        r#"
[model]
kind = "lambda"
omega = 0.0
gamma = 1e-3
gamma_v = 1e-3

[task]
kind = "steady"
"#,
    );
    let out = dir.path().join("out");
    succeed(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let table = read_csv(&out.join("steady_state.csv")).unwrap();
    let row = table.rows.iter().find(|r| r[0] == Cell::Text("rho_1_1".into())).unwrap();
    assert_eq!(num(&row[1]), 1.0);
    assert_eq!(num(&row[2]), 0.0);
}

#[test]
fn spectrum_reports_metastability_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "spectrum.toml", &format!("{LAMBDA_FIG2}\n[task]\nkind = \"spectrum\"\n"));
    let out = dir.path().join("out");
    succeed(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "json"]);
    let text = fs::read_to_string(out.join("metastability.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["is_metastable"], serde_json::Value::Bool(true));
    assert!(value["gap_ratio"].as_f64().unwrap() >= 1e3);
    assert_eq!(value["ratio_threshold"].as_f64().unwrap(), 100.0);
}

#[test]
fn negative_rate_is_rejected_with_the_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}\n[task]\nkind = \"steady\"\n", LAMBDA_FIG2.replace("gamma = 1e-5", "gamma = -1e-5"));
    let config = write_config(dir.path(), "bad.toml", &text);
    let out = metastab(&["run", "--config", config.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("model.gamma"), "{stderr}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{LAMBDA_FIG2}omgea = 0.1\n[task]\nkind = \"steady\"\n");
    let config = write_config(dir.path(), "typo.toml", &text);
    let out = metastab(&["run", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("omgea"), "{stderr}");
}

#[test]
fn module_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{LAMBDA_FIG2}\n[task]\nkind = \"evolve\"\ninitial = \"W\"\ntimes = {{ values = [0.0, 1.0] }}\n"
    );
    let config = write_config(dir.path(), "label.toml", &text);
    let out = metastab(&["run", "--config", config.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("task.initial"));
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{LAMBDA_FIG2}\n[task]\nkind = \"evolve\"\ninitial = \"1\"\ntimes = {{ start = 1.0, stop = 1e8, points = 25, spacing = \"log\" }}\n"
    );
    let config = write_config(dir.path(), "evolve.toml", &text);
    let (csv_dir, json_dir) = (dir.path().join("csv"), dir.path().join("json"));
    succeed(&["run", "--config", config.to_str().unwrap(), "--out", csv_dir.to_str().unwrap()]);
    succeed(&["run", "--config", config.to_str().unwrap(), "--out", json_dir.to_str().unwrap(), "--format", "json"]);
    let a = read_csv(&csv_dir.join("evolution.csv")).unwrap();
    let b = read_json(&json_dir.join("evolution.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 25);
    assert_eq!(a.columns[..4], ["t", "rho_1_1", "rho_2_2", "rho_V_V"]);
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .filter(|(name, _)| name != "manifest.json")
        .collect();
    files.sort();
    files
}

#[test]
fn preset_rerun_is_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    succeed(&["figure", "fig3a", "--out", first.to_str().unwrap(), "--seed", "7"]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([7]));
    assert_eq!(manifest["config"]["task"]["name"], "fig3a");
    assert_eq!(manifest["reference_rate"]["name"], "delta_v");

    let second = dir.path().join("second");
    succeed(&["rerun", "--manifest", first.join("manifest.json").to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(files_of(&first), files_of(&second));

    let other = dir.path().join("other");
    succeed(&["figure", "fig3a", "--out", other.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(files_of(&first), files_of(&other));
}

#[test]
fn trajectory_seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[model]
kind = "lambda"
omega = 0.1
gamma = 1e-3

[task]
kind = "trajectories"
initial = "1"
n_traj = 50
dt = 10.0
seed = 1
single = true
times = { start = 0.0, stop = 2e4, points = 11 }
"#;
    let config = write_config(dir.path(), "traj.toml", text);
    let out = dir.path().join("out");
    succeed(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "42"]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["task"]["seed"], 42);
    assert_eq!(manifest["seeds"], serde_json::json!([42]));
    let ensemble = read_csv(&out.join("ensemble.csv")).unwrap();
    assert_eq!(num(ensemble.column("jump_free_fraction").unwrap()[0]), 1.0);
    assert!(out.join("trajectory.csv").exists() && out.join("jumps.csv").exists());

    let again = dir.path().join("again");
    succeed(&["rerun", "--manifest", out.join("manifest.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(files_of(&out), files_of(&again));
}

#[test]
fn every_preset_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    for (name, file, columns) in [
        ("fig2a", "fig2a.csv", vec!["t_gamma", "rho22_numeric", "rhovv_numeric", "rho22_analytic", "rhovv_analytic", "rhovv_numeric_gamma_v_eq_gamma"]),
        ("fig2bc", "fig2c_spectrum.csv", vec!["k", "re_gamma", "im_gamma"]),
        ("fig2d", "fig2d_gamma_v_eq_gamma.csv", vec!["gamma", "re_lambda_2"]),
        ("fig3b", "fig3b.csv", vec!["t_gamma", "survival", "rhovv_conditional", "rhovv_unconditional"]),
        ("fig4a", "fig4a.csv", vec!["t_gamma", "concurrence_numeric", "concurrence_hae", "concurrence_metastable"]),
        ("fig4b", "fig4b.csv", vec!["t_gamma", "concurrence_numeric", "concurrence_hae", "rho_aa"]),
    ] {
        let out = dir.path().join(name);
        succeed(&["figure", name, "--out", out.to_str().unwrap()]);
        let table = read_csv(&out.join(file)).unwrap();
        assert_eq!(table.columns[..columns.len()], columns[..], "{name}");
        assert!(!table.rows.is_empty());
        assert!(fs::read_to_string(out.join("README.md")).unwrap().contains("t_gamma") || name == "fig2bc" || name == "fig2d");
    }
    let fig4b = read_csv(&dir.path().join("fig4b/fig4b.csv")).unwrap();
    let last = fig4b.rows.last().unwrap();
    assert!(num(&last[1]) > 0.99 && (num(&last[1]) - num(&last[2])).abs() < 1e-3);
}

#[test]
fn unknown_preset_fails() {
    let out = metastab(&["figure", "fig9", "--out", "unused"]);
    assert!(!out.status.success());
}
