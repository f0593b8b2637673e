use std::process::Command;

use serde_json::Value;

fn latlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_latlab")).args(args).output().expect("binary runs")
}

fn json(out: &std::process::Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn neighbors_of_the_standard_lattice() {
    let v = json(&latlab(&["hecke", "neighbors", "--p", "3", "--type", "0,1"]));
    assert_eq!(v["count"], 4);
    assert_eq!(v["weight"], "1/4");
    assert_eq!(v["neighbors"].as_array().unwrap().len(), 4);
}

#[test]
fn neighbors_of_a_point_file() {
    let dir = tempfile::tempdir().unwrap();
    let point = dir.path().join("x.json");
    std::fs::write(&point, r#"{"basis": [[1.0, 0.3], [0.0, 1.0]]}"#).unwrap();
    let out = dir.path().join("nb.json");
    let o = latlab(&[
        "hecke", "neighbors", "--p", "2", "--type", "0,1",
        "--point", point.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["count"], 3);

    let bad = latlab(&["hecke", "neighbors", "--p", "2", "--type", "0,1,1", "--point", point.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn composition_check_matches() {
    let v = json(&latlab(&["hecke", "compose-check", "--n", "2", "--p", "3", "--k", "1", "--l", "2"]));
    assert_eq!(v["matches"], true);
    assert_eq!(v["commutes"], true);
}

#[test]
fn field_documents() {
    let v = json(&latlab(&["field", "special", "--p", "5", "--n", "2"]));
    assert!(v.is_object());
    let w = json(&latlab(&["field", "shapira", "--M", "10", "--n", "2"]));
    assert!(w.is_object());
    assert_eq!(latlab(&["field", "special", "--p", "7", "--n", "2"]).status.code(), Some(1));
}

#[test]
fn experiment_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let ok = latlab(&["exp", "approx", "--seed", "1", "--out", d]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let csv = std::fs::read_to_string(dir.path().join("approx.csv")).unwrap();
    assert!(csv.starts_with("# seed=1\n"));

    let cfg = dir.path().join("tight.json");
    std::fs::write(&cfg, r#"{"budgets": {"neighbors": 5}}"#).unwrap();
    let abort = latlab(&["exp", "approx", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert_eq!(abort.status.code(), Some(3));

    let strict = dir.path().join("strict.json");
    std::fs::write(&strict, r#"{"density": 2000, "oracle_samples": 20000, "tolerances": {"ks_max": 0.0}}"#).unwrap();
    let failed = latlab(&["exp", "escape", "--config", strict.to_str().unwrap(), "--out", d]);
    assert_eq!(failed.status.code(), Some(2));

    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, r#"{"experiment": "haar"}"#).unwrap();
    assert_eq!(latlab(&["exp", "escape", "--config", wrong.to_str().unwrap()]).status.code(), Some(1));
}
