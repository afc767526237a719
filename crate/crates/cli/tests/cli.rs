use std::path::PathBuf;
use std::process::Command;

use hms_cli::{check_golden, diff_json, resolve, run, CommandKind, RunArgs, Status};
use serde_json::Value;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn hms(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_hms")).args(args).output().expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (text, out.status.code().expect("exit code"))
}

fn args() -> RunArgs {
    RunArgs::default()
}

#[test]
fn goldens_are_reproduced() {
    let mut seen = 0;
    for entry in std::fs::read_dir(data_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let r = check_golden(&text, &path.display().to_string()).unwrap();
        assert!(r.identical, "{}: {:?}", path.display(), r.differences);
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn corrupted_golden_gives_diff_report() {
    let text = std::fs::read_to_string(data_dir().join("ainfty_n3.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["result"]["structure"]["products"][0]["coefficient"] = Value::String("17".into());
    v["result"]["invariants"][1] = Value::String("2".into());
    let corrupted = serde_json::to_string_pretty(&v).unwrap();
    let r = check_golden(&corrupted, "corrupted").unwrap();
    assert!(!r.identical);
    assert_eq!(r.differences.len(), 2);
    assert!(r.differences.iter().any(|d| d.starts_with("$.result.invariants[1]")));
    assert!(r.differences.iter().any(|d| d.starts_with("$.result.structure.products[0].coefficient")));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, corrupted).unwrap();
    let (out, code) = hms(&["golden", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(code, 1);
    assert!(out.contains("2 differences"), "{out}");
}

#[test]
fn golden_with_wrong_schema_is_a_config_error() {
    let text = std::fs::read_to_string(data_dir().join("hh_n3.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["schema_version"] = Value::from(99);
    assert!(check_golden(&v.to_string(), "x").is_err());
}

#[test]
fn diff_reports_shape_changes() {
    let a: Value = serde_json::json!({"x": [1, 2], "y": {"z": true}});
    let b: Value = serde_json::json!({"x": [1, 2, 3], "y": {}, "w": 0});
    let d = diff_json(&a, &b);
    assert_eq!(d.len(), 3);
    assert!(diff_json(&a, &a).is_empty());
}

#[test]
fn exit_codes() {
    let (out, code) = hms(&["hh", "--d-max", "3", "--weight-cap", "6", "--format", "text"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("Hh: Pass"));
    let (out, code) = hms(&["hh", "--d-max", "3", "--weight-cap", "0", "--format", "text"]);
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("stabilized"));
    assert_eq!(hms(&["hh", "--field", "12"]).1, 3);
    assert_eq!(hms(&["mirror", "--d", "1,1"]).1, 3);
    assert_eq!(hms(&["mirror", "--d", "1,1,1", "--D", "4"]).1, 3);
    assert_eq!(hms(&["hh", "--p", "1,1,1", "--q", "1,1,-1"]).1, 3);
    assert_eq!(hms(&["ainfty", "--arity-cap", "2"]).1, 2);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (stdout, code) = hms(&["cover", "--weight-cap", "4"]);
    assert_eq!(code, 0);
    let (_, code) = hms(&["cover", "--weight-cap", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn reports_are_byte_stable() {
    let c = resolve(CommandKind::Mirror, &RunArgs { weight_cap: Some(5), arity_cap: Some(4), ..args() }).unwrap();
    assert_eq!(run(&c).unwrap().to_json(), run(&c).unwrap().to_json());
}

#[test]
fn prime_field_hh_matches_rationals() {
    let base = RunArgs { n: Some(4), d_max: Some(4), weight_cap: Some(8), ..args() };
    let q = run(&resolve(CommandKind::Hh, &base).unwrap()).unwrap();
    let p = run(&resolve(CommandKind::Hh, &RunArgs { field: Some("32003".into()), ..base }).unwrap()).unwrap();
    assert_eq!(q.status, Status::Pass);
    assert_eq!(q.result["entries"], p.result["entries"]);
}

#[test]
fn seed_twist_examples() {
    let a = RunArgs { seed: Some(vec!["1".into(), "-1".into()]), arity_cap: Some(5), weight_cap: Some(7), ..args() };
    let r = run(&resolve(CommandKind::Ainfty, &a).unwrap()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.result["twisted_invariants"], serde_json::json!(["1", "1"]));
    let z = RunArgs { seed: Some(vec!["0".into(), "0".into()]), arity_cap: Some(5), weight_cap: Some(7), ..args() };
    let r = run(&resolve(CommandKind::Ainfty, &z).unwrap()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert!(r.result["products"].as_array().unwrap().iter().all(|p| p["nnz"] == 0));
}

#[test]
fn mirror_equivariant_example() {
    let a = RunArgs { d: Some(vec![1, 1, 1]), denom: Some(3), weight_cap: Some(5), arity_cap: Some(4), ..args() };
    let r = run(&resolve(CommandKind::Mirror, &a).unwrap()).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.to_text());
    assert_eq!(r.result["equivariant_pairs"], 81);
}

#[test]
fn toric_grid_passes() {
    let r = run(&resolve(CommandKind::Toric, &RunArgs { n: Some(8), ..args() }).unwrap()).unwrap();
    assert_eq!(r.status, Status::Pass);
    let loops: Vec<_> = r.result["fans"].as_array().unwrap().iter().map(|f| f["loops"].clone()).collect();
    assert_eq!(loops.len(), 6);
    assert!(loops.iter().all(|l| *l == 0));
}
