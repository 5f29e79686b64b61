use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rst")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn capacity_of_bsc() {
    let dir = TempDir::new().unwrap();
    let ch = write(dir.path(), "bsc.json", r#"{"kind": "classical", "rows": [[0.89, 0.11], [0.11, 0.89]]}"#);
    let out = dir.path().join("r.json");
    let o = rst(&["--task", "capacity", "--channel", ch.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    let c = r["results"]["capacity"]["capacity"].as_f64().unwrap();
    assert!((c - 0.500084).abs() < 1e-5, "{c}");
    assert_eq!(r["config"]["task"], "capacity");
    assert_eq!(r["config"]["seed"], 0);
    assert_eq!(r["config"]["channel"]["kind"], "classical");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn ce_of_identity_qubit() {
    let dir = TempDir::new().unwrap();
    let ch = write(dir.path(), "id.json", r#"{"kind": "quantum", "kraus": [[[1, 0], [0, 1]]]}"#);
    let out = dir.path().join("r.json");
    let o = rst(&["--task", "ce", "--channel", ch.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = report(&out)["results"]["c_e"].as_f64().unwrap();
    assert!((c - 2.0).abs() < 1e-9, "{c}");
}

#[test]
fn tradeoff_curve_csv() {
    let dir = TempDir::new().unwrap();
    let ch = write(dir.path(), "bsc.json", r#"{"kind": "bsc", "p": 0.1}"#);
    let out = dir.path().join("curve.csv");
    let o = rst(&[
        "--task", "tradeoff-curve", "--channel", ch.to_str().unwrap(), "--grid", "3", "--w-size", "2", "--format", "csv",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(4)), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("c,r,certified"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn csv_rejected_for_other_tasks() {
    let o = rst(&["--task", "embezzle", "--n", "16", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad_row = write(dir.path(), "bad.json", r#"{"kind": "classical", "rows": [[0.5, 0.5], [0.5, 0.4]]}"#);
    let o = rst(&["--task", "capacity", "--channel", bad_row.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 1"), "{}", stderr(&o));

    let bad_kraus = write(dir.path(), "k.json", r#"{"kind": "quantum", "kraus": [[[1, 0], [0, 0.5]]]}"#);
    let o = rst(&["--task", "ce", "--channel", bad_kraus.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("K†K"), "{}", stderr(&o));

    let syntax = write(dir.path(), "s.json", "{\"kind\": \"bsc\",\n \"p\": }");
    let o = rst(&["--task", "capacity", "--channel", syntax.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let q = write(dir.path(), "q.json", r#"{"kind": "dephasing", "p": 0.2}"#);
    let o = rst(&["--task", "capacity", "--channel", q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(rst(&["--task", "teleport"]).status.code(), Some(2));
    assert_eq!(rst(&["--task", "embezzle", "--n", "0"]).status.code(), Some(2));
    assert_eq!(rst(&["--task", "ce"]).status.code(), Some(2));
    assert_eq!(rst(&["--task", "schur-masses"]).status.code(), Some(2));
}

#[test]
fn certification_failure_exits_4() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", r#"{"kind": "random_regular", "d": 16, "degree": 4, "seed": 1}"#);
    let o = rst(&[
        "--task", "flat-partition", "--channel", g.to_str().unwrap(), "--eps", "0.01", "--gamma", "1", "--restarts", "2",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn non_flat_isometry_rejected() {
    let dir = TempDir::new().unwrap();
    let ch = write(dir.path(), "ad.json", r#"{"kind": "amplitude_damping", "gamma": 0.3}"#);
    let o = rst(&["--task", "decoupling-sweep", "--channel", ch.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not flat"));
}

#[test]
fn runs_are_byte_identical_and_replay() {
    let dir = TempDir::new().unwrap();
    let ch = write(dir.path(), "ad.json", r#"{"kind": "amplitude_damping", "gamma": 0.3}"#);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = rst(&["--task", "channel-profile", "--channel", ch.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let o = rst(&["replay", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn tampered_reports_fail_replay() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = rst(&["--task", "decoupling-sweep", "--n", "2", "--trials", "10", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let original = report(&out);

    let mut seed = original.clone();
    seed["config"]["seed"] = 4.into();
    let p = write(dir.path(), "seed.json", &serde_json::to_string(&seed).unwrap());
    let o = rst(&["replay", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("digest"));

    let mut field = original.clone();
    field["results"]["sweep"]["points"][1]["mean_fidelity"] = 0.123.into();
    let p = write(dir.path(), "field.json", &serde_json::to_string(&field).unwrap());
    let o = rst(&["replay", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("mean_fidelity"), "{}", stderr(&o));

    let mut version = original.clone();
    version["version"] = "0.0.0".into();
    let p = write(dir.path(), "version.json", &serde_json::to_string(&version).unwrap());
    assert_eq!(rst(&["replay", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn stdout_when_no_out() {
    let o = rst(&["--task", "embezzle", "--n", "64", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["results"]["n"], 64);
    assert!(r["results"]["fidelity"].as_f64().unwrap() < 1.0);
}

#[test]
fn help_lists_every_task() {
    let o = rst(&["--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for t in [
        "capacity", "wyner", "tradeoff-curve", "crst-sim", "flat-partition", "ce", "channel-profile", "feedback-rates",
        "embezzle", "schur-masses", "decoupling-sweep",
    ] {
        assert!(text.contains(t), "{t} missing from help");
    }
    let o = rst(&["tasks"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 11);
}

#[test]
fn every_task_runs_and_replays() {
    let dir = TempDir::new().unwrap();
    let bsc = write(dir.path(), "bsc.json", r#"{"kind": "bsc", "p": 0.11}"#);
    let ghz = write(dir.path(), "g.json", r#"{"kind": "random_regular", "d": 16, "degree": 4, "seed": 2}"#);
    let deph = write(dir.path(), "d.json", r#"{"kind": "dephasing", "p": 0.3}"#);
    let runs: Vec<Vec<&str>> = vec![
        vec!["--task", "wyner", "--channel", bsc.to_str().unwrap(), "--w-size", "2", "--restarts", "2"],
        vec!["--task", "crst-sim", "--channel", bsc.to_str().unwrap(), "--n", "50", "--trials", "20"],
        vec!["--task", "flat-partition", "--channel", ghz.to_str().unwrap(), "--eps", "0.5"],
        vec!["--task", "feedback-rates", "--channel", deph.to_str().unwrap(), "--input", "0.6,0.4"],
        vec!["--task", "schur-masses", "--input", "0.7,0.3", "--n", "6", "--delta", "0.3"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let mut a = args.clone();
        a.extend(["--out", out.to_str().unwrap()]);
        let o = rst(&a);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let o = rst(&["replay", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
}
