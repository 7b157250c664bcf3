//! End-to-end tests of the batch front door: exit codes, output schemas, and
//! the byte-level reproducibility contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perpetua"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const I1_INSTANCE: &str = r#"{"branches": [
    {"m": 1.0, "p": 0.5, "q": {"kind": "constant", "value": 1.0}},
    {"m": 0.5, "p": 0.5, "q": {"kind": "constant", "value": 1.0}}
]}"#;

fn result_json(out_dir: &Path) -> serde_json::Value {
    let raw = fs::read_to_string(out_dir.join("result.json")).unwrap();
    serde_json::from_str(&raw).unwrap()
}

#[test]
fn exponents_mode_reports_v_c_to_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "exp.json",
        &format!(
            r#"{{"name": "exp", "mode": "exponents", "payload": {{"instance": {I1_INSTANCE}}}}}"#
        ),
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let result = result_json(&out_dir);
    let v_c = result["results"]["exponents"]["v_c"].as_f64().unwrap();
    assert!(
        (v_c - std::f64::consts::LN_2).abs() <= 1e-12,
        "v_c = {v_c}, want ln 2 within 1e-12"
    );
    assert_eq!(result["results"]["theorem2_regime"], true);
    assert!(out_dir.join("exponents.csv").exists());
    // Provenance pins the config bytes.
    let sha = result["provenance"]["config_sha256"].as_str().unwrap();
    assert_eq!(sha.len(), 64);
}

#[test]
fn propagate_mode_emits_classification_column() {
    let tmp = tempfile::tempdir().unwrap();
    // Grid straddling v_c = ln 2 ≈ 0.6931, including the critical point.
    let config = write_config(
        tmp.path(),
        "prop.json",
        &format!(
            r#"{{"name": "prop", "mode": "propagate", "payload": {{
                "instance": {I1_INSTANCE},
                "v_grid": [0.3, 0.6931471805599453, 0.9],
                "depth": 40
            }}}}"#
        ),
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(out_dir.join("propagate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "v,n,laplace,classification");
    assert_eq!(csv.lines().count(), 1 + 3 * 41);
    assert!(csv.contains(",bounded"));
    assert!(csv.contains(",divergent"));
    assert!(csv.contains(",boundary"));
    // L_0 = 1 for the point start, at every v.
    assert!(csv.contains("0.3,0,1,bounded"));
}

#[test]
fn certify_mode_round_trips_certificates() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "cert.json",
        &format!(
            r#"{{"name": "cert", "mode": "certify", "payload": {{
                "instance": {I1_INSTANCE}, "v": 0.62
            }}}}"#
        ),
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = result_json(&out_dir);
    assert_eq!(result["results"]["classify"]["verdict"], "bounded_certified");
    let cert = &result["results"]["classify"]["certificate"];
    assert!(cert["chained_bound"].as_f64().unwrap().is_finite());
    assert!(cert["rhos"].as_array().unwrap().len() >= 1);
    let csv = fs::read_to_string(out_dir.join("certificate.csv")).unwrap();
    assert!(csv.contains("chained_bound"));
    assert!(csv.contains("rho_tilde,0,"));
}

#[test]
fn metric_mode_writes_contraction_report() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "metric.json",
        &format!(
            r#"{{"name": "metric", "mode": "metric", "payload": {{
                "instance": {I1_INSTANCE},
                "mu": {{"kind": "constant", "value": 0.0}},
                "nu": {{"kind": "constant", "value": 1.0}},
                "rho": 0.1
            }}}}"#
        ),
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = result_json(&out_dir);
    assert_eq!(result["results"]["contraction_check"]["holds"], true);
    let factor = result["results"]["contraction_check"]["factor"].as_f64().unwrap();
    assert!((factor - 0.75 * 0.1f64.exp()).abs() < 1e-12);
}

#[test]
fn invalid_transition_row_exits_2_with_row_index() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "markov.json",
        r#"{"name": "bad", "mode": "markov", "payload": {
            "spec": {
                "states": ["a", "b"],
                "transition": [[0.5, 0.5], [0.3, 0.3]],
                "initial": [0.5, 0.5],
                "per_state": {
                    "a": {"branches": [{"m": 0.5, "p": 1.0, "q": {"kind": "constant", "value": 0.0}}]},
                    "b": {"branches": [{"m": 0.5, "p": 1.0, "q": {"kind": "constant", "value": 0.0}}]}
                },
                "dependence": "independent"
            },
            "horizon": 5, "trajectories": 10, "seed": 1
        }}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 1"), "stderr should name the row: {stderr}");
}

#[test]
fn unknown_payload_field_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "unknown.json",
        &format!(
            r#"{{"name": "x", "mode": "exponents", "payload": {{"instance": {I1_INSTANCE}, "bogus": 1}}}}"#
        ),
    );
    let out = run(&["--config", &config, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn regime_violation_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // Signed Q breaks the dichotomy hypotheses: certify must refuse.
    let config = write_config(
        tmp.path(),
        "signed.json",
        r#"{"name": "signed", "mode": "certify", "payload": {
            "instance": {"branches": [
                {"m": 0.5, "p": 1.0, "q": {"kind": "atoms", "atoms": [[-1.0, 0.5], [1.0, 0.5]]}}
            ]},
            "v": 0.2
        }}"#,
    );
    let out = run(&["--config", &config, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of regime"));
}

#[test]
fn point_budget_exhaustion_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "budget.json",
        &format!(
            r#"{{"name": "budget", "mode": "propagate", "payload": {{
                "instance": {I1_INSTANCE},
                "v_grid": [0.3],
                "depth": 50,
                "max_points": 4
            }}}}"#
        ),
    );
    let out = run(&["--config", &config, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn simulate_mode_is_byte_reproducible_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "sim.json",
        &format!(
            r#"{{"name": "sim", "mode": "simulate", "payload": {{
                "instance": {I1_INSTANCE},
                "horizon": 40,
                "trajectories": 2000,
                "seed": 31337,
                "checkpoints": [0, 10, 40],
                "laplace_vs": [0.1, 0.3],
                "survival_points": 20
            }}}}"#
        ),
    );

    let mut snapshots: Vec<Vec<(String, String)>> = Vec::new();
    for (i, threads) in ["1", "2", "2"].iter().enumerate() {
        let out_dir = tmp.path().join(format!("out{i}"));
        let out = run(&[
            "--config",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut files: Vec<(String, String)> = Vec::new();
        for name in ["quantiles.csv", "laplace.csv", "survival.csv"] {
            files.push((name.into(), fs::read_to_string(out_dir.join(name)).unwrap()));
        }
        // result.json minus the wall-time entry must be identical too.
        let mut result = result_json(&out_dir);
        let prov = result["provenance"].as_object_mut().unwrap();
        prov.remove("wall_ms");
        prov.remove("threads");
        files.push(("result.json".into(), result.to_string()));
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1], "1 vs 2 workers must match bytes");
    assert_eq!(snapshots[1], snapshots[2], "rerun must match bytes");

    // A different seed must change the sampled outputs.
    let out_dir = tmp.path().join("reseeded");
    let out = run(&[
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(out.status.success());
    let reseeded = fs::read_to_string(out_dir.join("quantiles.csv")).unwrap();
    assert_ne!(reseeded, snapshots[0][0].1);
    let result = result_json(&out_dir);
    assert_eq!(result["results"]["simulate"]["seed"], 99);
}

#[test]
fn markov_mode_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "markov.json",
        r#"{"name": "modulated", "mode": "markov", "payload": {
            "spec": {
                "states": ["a", "b"],
                "transition": [[0.5, 0.5], [0.25, 0.75]],
                "initial": [1.0, 0.0],
                "per_state": {
                    "a": {"branches": [{"m": 0.3, "p": 1.0, "q": {"kind": "exponential", "rate": 2.0}}]},
                    "b": {"branches": [{"m": 0.6, "p": 1.0, "q": {"kind": "exponential", "rate": 1.0}}]}
                },
                "dependence": "independent"
            },
            "horizon": 50,
            "trajectories": 500,
            "seed": 7,
            "checkpoints": [0, 25, 50],
            "witness_v": 1.2
        }}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = result_json(&out_dir);
    assert_eq!(result["results"]["v_bar"], 1.0);
    assert_eq!(result["results"]["divergence_witness"]["state"], "b");
    assert_eq!(
        result["results"]["simulate_modulated"]["domination_violations"],
        0
    );
    assert!(result["results"]["envelope"]["not_enumerable"].is_string());
    let csv = fs::read_to_string(out_dir.join("markov_quantiles.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);

    // Witness below v̄ is a regime error: exit 3.
    let config_bad = fs::read_to_string(tmp.path().join("markov.json"))
        .unwrap()
        .replace("\"witness_v\": 1.2", "\"witness_v\": 0.5");
    let config_bad_path = write_config(tmp.path(), "markov_bad.json", &config_bad);
    let out = run(&[
        "--config",
        &config_bad_path,
        "--out",
        tmp.path().join("o2").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn markov_sandwich_table_on_enumerable_envelope() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "sandwich.json",
        r#"{"name": "sandwich", "mode": "markov", "payload": {
            "spec": {
                "states": ["a", "b"],
                "transition": [[0.5, 0.5], [0.5, 0.5]],
                "initial": [0.5, 0.5],
                "per_state": {
                    "a": {"branches": [{"m": 0.3, "p": 1.0, "q": {"kind": "atoms", "atoms": [[0.0, 0.5], [1.0, 0.5]]}}]},
                    "b": {"branches": [{"m": 0.6, "p": 1.0, "q": {"kind": "atoms", "atoms": [[0.0, 0.5], [2.0, 0.5]]}}]}
                },
                "dependence": "independent"
            },
            "horizon": 20,
            "trajectories": 200,
            "seed": 5,
            "sandwich_grid": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
        }}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = result_json(&out_dir);
    assert_eq!(result["results"]["sandwich"]["rows"], 10);
    assert!(result["results"]["envelope"]["law"].is_object());
    let csv = fs::read_to_string(out_dir.join("sandwich.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",true"), "sandwich row should hold: {line}");
    }
}

#[test]
fn missing_config_exits_2() {
    let out = run(&["--config", "/nonexistent/config.json", "--out", "/tmp/x"]);
    assert_eq!(out.status.code(), Some(2));
}
