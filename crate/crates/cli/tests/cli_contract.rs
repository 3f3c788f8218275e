use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn berkhyb(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berkhyb"))
        .args(args)
        .env("BERKHYB_OUT", out)
        .output()
        .expect("binary runs")
}

fn write_manifest(dir: &Path, name: &str, experiment: Value) -> PathBuf {
    let p = dir.join(format!("{name}.manifest.json"));
    let m = json!({ "schema": "berkhyb.manifest/1", "name": name, "seed": 3, "experiment": experiment });
    fs::write(&p, serde_json::to_string_pretty(&m).unwrap()).unwrap();
    p
}

fn data_path(rel: &str) -> String {
    data().join(rel).to_string_lossy().into_owned()
}

#[test]
fn mz_check_on_the_two_family_passes_with_slope_table() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "fs2", json!({ "kind": "mz-check", "families": [data_path("mz/fs_2.json")] }));
    let out = dir.path().join("out");
    let o = berkhyb(&["mz-check", "--manifest", m.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("fs2.csv")).unwrap();
    let ln2 = std::f64::consts::LN_2;
    assert!(csv.contains(&format!("fs2,,fs_2:s_inf,{ln2}")), "{csv}");
    assert!(csv.contains(&format!("fs2,,fs_2:s_2,{}", -ln2)), "{csv}");
    assert!(csv.contains("fs2,,fs_2:slope_sum,0"), "{csv}");
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("fs2.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "berkhyb.report/1");
    assert_eq!(report["seed"], 3);
}

#[test]
fn ma_model_two_component_table() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "tc", json!({ "kind": "ma-model", "tables": [data_path("tables/two_component.json")] }));
    let out = dir.path().join("out");
    let o = berkhyb(&["ma-model", "--manifest", m.to_str().unwrap(), "--out", out.to_str().unwrap()], Path::new("/nonexistent"));
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&fs::read_to_string(out.join("tc.json")).unwrap()).unwrap();
    let rep = &r["result"]["tables"][0]["report"];
    let masses: Vec<&str> = rep["measure"]["atoms"].as_array().unwrap().iter().map(|a| a["mass"].as_str().unwrap()).collect();
    assert_eq!(masses, ["2", "1"]);
    assert_eq!(rep["total"], "3");
}

#[test]
fn malformed_json_exits_two_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.json");
    fs::write(&m, "{\"schema\": \"berkhyb.manifest/1\",\n \"name\": \"x\",, }").unwrap();
    let out = dir.path().join("out");
    let o = berkhyb(&["lse-gap", "--manifest", m.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json:2:"), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let lse = json!({ "kind": "lse-gap", "samples": 10, "max_n": 3, "ms": [1], "range": 1.0 });
    let m = write_manifest(dir.path(), "lse", lse.clone());
    // kind on the command line disagrees with the manifest
    assert_eq!(berkhyb(&["cln", "--manifest", m.to_str().unwrap()], &out).status.code(), Some(2));
    let mut bad = lse.clone();
    bad["range"] = json!(-1.0);
    let m = write_manifest(dir.path(), "neg", bad);
    assert_eq!(berkhyb(&["lse-gap", "--manifest", m.to_str().unwrap()], &out).status.code(), Some(2));
    let m = write_manifest(dir.path(), "missing", json!({ "kind": "cln", "family": "nope.json", "perturb": [0], "deltas": ["1/10"] }));
    assert_eq!(berkhyb(&["cln", "--manifest", m.to_str().unwrap()], &out).status.code(), Some(2));
    let mut extra = lse;
    extra["unexpected"] = json!(1);
    let m = write_manifest(dir.path(), "extra", extra);
    assert_eq!(berkhyb(&["lse-gap", "--manifest", m.to_str().unwrap()], &out).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn failed_check_exits_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        "wrong_nu",
        json!({
            "kind": "lelong",
            "function": data_path("functions/t2_plus_t3.json"),
            "radii": { "start_decade": 1, "end_decade": 5, "per_decade": 4 },
            "angles": 32,
            "expected": 3.0,
            "tolerance": 1e-3
        }),
    );
    let out = dir.path().join("out");
    let o = berkhyb(&["lelong", "--manifest", m.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_str(&fs::read_to_string(out.join("wrong_nu.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], false);
    let csv = fs::read_to_string(out.join("wrong_nu.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("wrong_nu,,fit_slope,")));
}

#[test]
fn seed_override_is_recorded_and_changes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "lse", json!({ "kind": "lse-gap", "samples": 50, "max_n": 8, "ms": [1, 2], "range": 5.0 }));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(berkhyb(&["lse-gap", "--manifest", m.to_str().unwrap(), "--seed", "11"], &a).status.code(), Some(0));
    assert_eq!(berkhyb(&["lse-gap", "--manifest", m.to_str().unwrap(), "--seed", "12", "--threads", "2"], &b).status.code(), Some(0));
    let ra: Value = serde_json::from_str(&fs::read_to_string(a.join("lse.json")).unwrap()).unwrap();
    let rb: Value = serde_json::from_str(&fs::read_to_string(b.join("lse.json")).unwrap()).unwrap();
    assert_eq!(ra["seed"], 11);
    assert_eq!(ra["manifest"]["seed"], 11);
    assert_eq!(rb["seed"], 12);
    assert_ne!(ra["result"]["cells"], rb["result"]["cells"]);
}

#[test]
fn experiments_without_tables_emit_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        "ve",
        json!({ "kind": "val-eval", "models": data_path("models.json"), "count": 20, "max_terms": 3, "exponent_bound": 4 }),
    );
    let out = dir.path().join("out");
    assert_eq!(berkhyb(&["val-eval", "--manifest", m.to_str().unwrap()], &out).status.code(), Some(0));
    assert_eq!(fs::read_to_string(out.join("ve.csv")).unwrap(), "experiment,t,series,value\n");
}
