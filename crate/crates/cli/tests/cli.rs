use std::path::Path;
use std::process::{Command, Output};

use chainstate_core::receiver::LineParams;
use chainstate_core::reference::FAMILY_I_VALUES;

fn chainstate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainstate"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read_params(path: &Path) -> LineParams {
    LineParams::read_csv(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn compute_params_matches_family_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = chainstate(
        &["compute-params", "--n", "20", "--tuned", "--out", "p.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let params = read_params(&dir.path().join("p.csv"));
    assert_eq!(params.len(), 170);
    for (key, q20, _) in FAMILY_I_VALUES {
        assert!(
            (params.get(&key).unwrap() - q20.value()).norm() < 1e-4,
            "{key}"
        );
    }
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(text.contains("# config: {\"command\":\"compute-params\""));
}

#[test]
fn probe_params_agree_with_direct_computation() {
    let dir = tempfile::tempdir().unwrap();
    let a = chainstate(
        &[
            "compute-params",
            "--n",
            "12",
            "--delta1",
            "0.5",
            "--delta2",
            "0.8",
            "--t0",
            "9",
            "--out",
            "a.csv",
        ],
        dir.path(),
    );
    let b = chainstate(
        &[
            "probe-params",
            "--n",
            "12",
            "--delta1",
            "0.5",
            "--delta2",
            "0.8",
            "--t0",
            "9",
            "--out",
            "b.csv",
            "--probes-out",
            "probes.json",
        ],
        dir.path(),
    );
    assert!(a.status.success() && b.status.success());
    let (pa, pb) = (
        read_params(&dir.path().join("a.csv")),
        read_params(&dir.path().join("b.csv")),
    );
    for (x, y) in pa.values().iter().zip(pb.values()) {
        assert!((x - y).norm() < 1e-9);
    }
    // Extraction from the saved measurements reproduces the same table.
    let c = chainstate(
        &[
            "probe-params",
            "--n",
            "12",
            "--t0",
            "9",
            "--input",
            "probes.json",
            "--out",
            "c.csv",
        ],
        dir.path(),
    );
    assert!(c.status.success(), "{}", String::from_utf8_lossy(&c.stderr));
    let pc = read_params(&dir.path().join("c.csv"));
    assert!(pc
        .values()
        .iter()
        .zip(pb.values())
        .all(|(x, y)| (x - y).norm() < 1e-12));
}

#[test]
fn werner_creation_and_failure_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(chainstate(
        &["compute-params", "--n", "20", "--tuned", "--out", "p.csv"],
        dir.path()
    )
    .status
    .success());
    let v = json(&chainstate(
        &[
            "create-state",
            "--target",
            "werner",
            "--p",
            "0.4",
            "--params",
            "p.csv",
        ],
        dir.path(),
    ));
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert!(v["discrepancy"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["a"].as_array().unwrap().len(), 11);

    let v = json(&chainstate(
        &[
            "create-state",
            "--target",
            "werner",
            "--p",
            "0.8",
            "--params",
            "p.csv",
            "--zero-family",
            "III",
        ],
        dir.path(),
    ));
    let d = v["discrepancy"].as_f64().unwrap();
    assert!((5e-3..2e-2).contains(&d), "{d}");

    let out = chainstate(
        &[
            "create-state",
            "--target",
            "werner",
            "--p",
            "0.95",
            "--params",
            "p.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    let out = chainstate(
        &[
            "create-state",
            "--target",
            "werner",
            "--p",
            "0.4",
            "--params",
            "missing.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn general_target_from_file() {
    let dir = tempfile::tempdir().unwrap();
    assert!(chainstate(
        &["compute-params", "--n", "20", "--tuned", "--out", "p.csv"],
        dir.path()
    )
    .status
    .success());
    let target = serde_json::json!({
        "re": [[0.5, 0.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
        "im": [[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
    });
    std::fs::write(dir.path().join("t.json"), target.to_string()).unwrap();
    let v = json(&chainstate(
        &[
            "create-state",
            "--target",
            "file:t.json",
            "--params",
            "p.csv",
        ],
        dir.path(),
    ));
    assert!(v["discrepancy"].as_f64().unwrap() < 1e-6);
}

#[test]
fn invalid_config_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = chainstate(
        &["compute-params", "--n", "3", "--out", "p.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"command": "compute-params", "chain": {"n": 20}, "bogus": 1}"#,
    )
    .unwrap();
    let out = chainstate(&["run", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = chainstate(
        &[
            "disorder-study",
            "--n",
            "20",
            "--tuned",
            "--epsilon",
            "0.05",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "seed is mandatory");
    let files: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(files, vec![std::ffi::OsString::from("bad.json")]);
}

#[test]
fn config_runs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "command": "disorder-study",
        "chain": {"n": 20, "tuned": true},
        "epsilon": 0.05,
        "chains": 10,
        "seed": 7,
        "out": "study.json",
        "werner_csv": "werner.csv",
    });
    std::fs::write(dir.path().join("c.json"), config.to_string()).unwrap();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = chainstate(&["run", "--config", "c.json"], dir.path());
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        runs.push((
            std::fs::read(dir.path().join("study.json")).unwrap(),
            std::fs::read(dir.path().join("werner.csv")).unwrap(),
        ));
    }
    assert_eq!(runs[0], runs[1]);
    let study: serde_json::Value = serde_json::from_slice(&runs[0].0).unwrap();
    assert_eq!(study["config"]["seed"], 7);
    assert_eq!(study["study"]["werner"].as_array().unwrap().len(), 9);
}

#[test]
fn optimize_and_feasibility() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&chainstate(&["optimize-chain", "--n", "20"], dir.path()));
    assert!((v["delta1"].as_f64().unwrap() - 0.550).abs() < 5e-3);
    assert!((v["t0"].as_f64().unwrap() - 26.441).abs() < 0.02);
    assert!(chainstate(
        &["compute-params", "--n", "20", "--tuned", "--out", "p.csv"],
        dir.path()
    )
    .status
    .success());
    let v = json(&chainstate(
        &["feasibility", "--params", "p.csv"],
        dir.path(),
    ));
    assert!((v["estimate"].as_f64().unwrap() - 0.8744).abs() < 2e-3);
}

#[test]
fn reproduce_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = chainstate(
        &["reproduce-paper", "--n", "20", "--skip-disorder"],
        dir.path(),
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("✓ |p_{20;1}| = 0.99606"));
    assert!(text.contains("0 check(s) failed"));
}
