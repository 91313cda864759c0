use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

use ncdef::problem::ProblemSpec;

fn ncdef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncdef")).args(args).output().expect("spawn ncdef")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--preset", "weyl2-simple4", "--out", path(dir)];
    args.extend_from_slice(extra);
    ncdef(&args)
}

#[test]
fn run_prints_the_four_relations() {
    let out = ncdef(&["run", "--preset", "weyl2-simple4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for rel in ["x13*x34 - x12*x24", "x24*x43 - x21*x13", "x31*x12 - x34*x42", "x42*x21 - x43*x31"] {
        assert!(text.contains(rel), "missing {rel} in\n{text}");
    }
}

#[test]
fn run_json_is_a_report() {
    let out = ncdef(&["run", "--preset", "weyl2-simple4", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], "ncdef.report/1");
    assert_eq!(v["hull"]["relations"].as_array().unwrap().len(), 4);
    assert_eq!(v["hull"]["relation_degree"], 2);
    assert_eq!(v["hull"]["stabilized"], true);
}

#[test]
fn out_dir_gets_both_files_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_into(dir.path(), &[])), 0);
    let json_path = dir.path().join("report.json");
    assert!(json_path.exists());
    assert!(dir.path().join("report.txt").exists());

    let out = ncdef(&["verify", path(&json_path)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let out = ncdef(&["verify", path(&json_path), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["ok"], true);
}

#[test]
fn tampered_family_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_into(dir.path(), &[])), 0);
    let json_path = dir.path().join("report.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let family = v["versal_family"].as_array_mut().unwrap();
    let entry = family.iter_mut().find(|e| e["monomial"] == "x12").unwrap();
    entry["cochain"]["components"] = json!([[["0"], ["-1"]], [["-1", "0"]]]);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let out = ncdef(&["verify", path(&bad)]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn diff_exit_codes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_into(a.path(), &[])), 0);
    assert_eq!(code(&run_into(b.path(), &["--max-order", "4"])), 0);
    let ra = a.path().join("report.json");
    let rb = b.path().join("report.json");

    let same = ncdef(&["diff", path(&ra), path(&ra)]);
    assert_eq!(code(&same), 0);
    assert!(stdout(&same).contains("identical"));

    let differ = ncdef(&["diff", path(&ra), path(&rb), "--json"]);
    assert_eq!(code(&differ), 1);
    let entries: Value = serde_json::from_str(&stdout(&differ)).unwrap();
    let paths: Vec<&str> = entries.as_array().unwrap().iter().map(|e| e["path"].as_str().unwrap()).collect();
    assert_eq!(paths, ["problem.options.hull.max_order"]);
}

#[test]
fn ext_tables() {
    let out = ncdef(&["ext", "--preset", "weyl2-simple4", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["ext1"], json!([[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]]));
    assert_eq!(v["ext2"], json!([[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]));
    let out = ncdef(&["ext", "--preset", "poly1-point"]);
    assert_eq!(code(&out), 0);
    assert!(!stdout(&out).is_empty());
}

#[test]
fn massey_products() {
    let out = ncdef(&["massey", "--preset", "weyl2-simple4", "--monomial", "x12*x24", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["defined"], true);
    assert_eq!(v["coefficients"], json!(["-1"]));

    let out = ncdef(&["massey", "--preset", "weyl2-simple4", "--monomial", "x12*x24*x43", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["defined"], false);
    assert_eq!(v["undefined_at"], "x12*x24");

    let out = ncdef(&["massey", "--preset", "weyl2-simple4", "--monomial", "x12*x34"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_problem_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, "{ \"schema\": \"ncdef.problem/1\", ").unwrap();
    let out_dir = dir.path().join("out");
    let out = ncdef(&["run", "--spec", path(&spec), "--out", path(&out_dir)]);
    assert_eq!(code(&out), 2);
    assert!(!out_dir.exists());

    let out = ncdef(&["run", "--preset", "no-such-thing"]);
    assert_eq!(code(&out), 2);

    let mut wrong = ProblemSpec::preset("poly1-point").unwrap();
    wrong.schema = "ncdef.problem/0".into();
    std::fs::write(&spec, wrong.to_json()).unwrap();
    assert_eq!(code(&ncdef(&["ext", "--spec", path(&spec)])), 2);
}

#[test]
fn unstable_ext_is_a_solver_bound_error() {
    // over the free algebra Ext^1(k, A) grows with the degree bound
    let spec = json!({
        "schema": "ncdef.problem/1",
        "name": "free-pair",
        "algebra": { "generators": ["x", "y"], "rules": [] },
        "modules": [
            { "name": "k", "ideal": ["x", "y"], "resolution": { "ranks": [1, 2], "differentials": [[["x"], ["y"]]] } },
            { "name": "A", "ideal": [], "resolution": { "ranks": [1, 0], "differentials": [[]] } }
        ],
        "options": { "solver": { "degree_bound": 2, "retry_step": 1, "max_bound": 4 } }
    });
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("free.json");
    std::fs::write(&file, spec.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = ncdef(&["run", "--spec", path(&file), "--out", path(&out_dir)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("has not stabilized"));
    assert!(!out_dir.exists());
}

#[test]
fn preset_and_problem_file_conflict() {
    let out = ncdef(&["ext", "--preset", "poly1-point", "--spec", "x.json"]);
    assert_eq!(code(&out), 2);
    let out = ncdef(&["ext"]);
    assert_eq!(code(&out), 2);
}
