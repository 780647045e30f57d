use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn matexp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matexp")).args(args).arg("--out-dir").arg(dir).output().expect("binary runs")
}

fn manifest(dir: &Path, command: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{command}-manifest.json"))).unwrap()).unwrap()
}

#[test]
fn verify_small_field_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = matexp(dir.path(), &["verify", "--n", "1", "--q", "3", "--level", "full"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path(), "verify");
    assert_eq!(m["passed"], true);
    let names: Vec<&str> = m["suites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names[0], "field-axioms");
    assert!(names.contains(&"digraph-normality"));
    assert!(names.contains(&"embeddings"));
}

#[test]
fn verify_rejects_even_order_without_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = matexp(dir.path(), &["verify", "--n", "2", "--q", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("characteristic 2"));
    let out = matexp(dir.path(), &["verify", "--n", "1", "--q", "4", "--allow-even"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_reports_non_normal_pairs_in_dimension_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = matexp(dir.path(), &["verify", "--n", "2", "--q", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let m = manifest(dir.path(), "verify");
    let suite = |name: &str| m["suites"].as_array().unwrap().iter().find(|s| s["name"] == name).unwrap().clone();
    assert_eq!(suite("digraph-oracle")["status"], "pass");
    assert_eq!(suite("mmt-decomposition")["status"], "pass");
    assert_eq!(suite("digraph-normality")["status"], "fail");
    let dump = fs::read_to_string(dir.path().join("verify-counterexamples-in-vs-predicted.csv")).unwrap();
    assert!(dump.starts_with("a1,c1,a2,c2,expected,actual\n"));
    assert!(dump.lines().count() > 1);
}

#[test]
fn count_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = matexp(dir.path(), &["count", "--n", "2", "--q", "3"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("count.csv")).unwrap();
    let expected = "\
n,q,stratum,exact,bound,ratio
2,3,ALL,81,81,1
2,3,GL,48,81,16/27
2,3,SINGULAR,33,27,11/9
2,3,DET(0),33,27,11/9
2,3,DET(1),24,27,8/9
2,3,DET(2),24,27,8/9
2,3,RANK(0),1,1,1
2,3,RANK(1),32,27,32/27
2,3,RANK(2),48,81,16/27
";
    assert_eq!(csv, expected);
    assert_eq!(manifest(dir.path(), "count")["suites"][0]["status"], "pass");
}

#[test]
fn count_json_uses_decimal_strings() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matexp(dir.path(), &["--format", "json", "count", "--n", "3", "--q", "5"]).status.success());
    let rows: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("count.json")).unwrap()).unwrap();
    assert_eq!(rows[0]["exact"], "1953125");
    // 5^9 matrices: above the enumeration cap, so the check is skipped.
    assert_eq!(manifest(dir.path(), "count")["suites"][0]["status"], "skipped");
}

#[test]
fn spectrum_dense_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = matexp(dir.path(), &["--format", "json", "spectrum", "--n", "1", "--q", "7", "--method", "dense-exact"]);
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(r["N"], 49);
    assert_eq!(r["d"], 7);
    assert_eq!(r["method"], "dense-exact");
    assert!((r["lambda2"].as_f64().unwrap() - 7f64.sqrt()).abs() < 1e-9);
}

#[test]
fn sweep_rejects_zero_trials() {
    let dir = tempfile::tempdir().unwrap();
    let out = matexp(
        dir.path(),
        &["sweep", "--n", "2", "--q", "3", "--polynomial", "X_PLUS_YZ", "--densities", "1/2", "--trials", "0"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn outputs_are_byte_identical_for_equal_seeds() {
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let args = [
            "--seed",
            seed,
            "sweep",
            "--n",
            "2",
            "--q",
            "3",
            "--polynomial",
            "xy-plus-z-plus-t",
            "--densities",
            "1/32,1/8,1",
            "--trials",
            "5",
        ];
        assert!(matexp(dir.path(), &args).status.success());
        let audit = ["--seed", seed, "audit", "--n", "2", "--q", "3", "--samples", "500"];
        matexp(dir.path(), &audit);
        let spectrum = ["--seed", seed, "--format", "json", "spectrum", "--n", "1", "--q", "5"];
        assert!(matexp(dir.path(), &spectrum).status.success());
        ["sweep.csv", "sweep-curve.csv", "audit-in-vs-predicted.csv", "spectrum.json"]
            .map(|f| fs::read(dir.path().join(f)).unwrap())
    };
    let a = run("17");
    assert_eq!(a, run("17"));
    let b = run("18");
    assert_ne!(a[0], b[0]);
}

#[test]
fn sweep_from_config_with_set_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.txt"), "2 3 3\n0\n28\n56\n").unwrap();
    let config = r#"{"n": 2, "q": 3, "polynomial": "SUM_SET",
        "domains": [{"file": "a.txt"}], "densities": ["1/3", 1], "trials": 2, "seed": 4}"#;
    fs::write(dir.path().join("config.json"), config).unwrap();
    let cfg = dir.path().join("config.json");
    let out = matexp(dir.path(), &["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    // {0, I, 2I} + itself = {0, I, 2I}.
    assert!(last.starts_with("2,3,SUM_SET,EXPLICIT,1,1,3,3,,,3,"), "{last}");
    assert_eq!(manifest(dir.path(), "sweep")["config"]["seed"], 4);
}

#[test]
fn expand_from_set_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("i.txt"), "2 3 1\n28\n").unwrap();
    let set = dir.path().join("i.txt");
    let out = matexp(
        dir.path(),
        &[
            "expand",
            "--n",
            "2",
            "--q",
            "3",
            "--polynomial",
            "X_TIMES_Y_PLUS_Z",
            "--set",
            set.to_str().unwrap(),
            "--save-image",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // I (I + I) = 2I, index 2 + 2 * 27 = 56.
    assert_eq!(fs::read_to_string(dir.path().join("image.txt")).unwrap(), "2 3 1\n56\n");
}

#[test]
fn expand_rejects_malformed_set_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "2 3 2\n5\n4\n").unwrap();
    let set = dir.path().join("bad.txt");
    let out = matexp(
        dir.path(),
        &["expand", "--n", "2", "--q", "3", "--polynomial", "SUM_SET", "--set", set.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("increasing"));
}

#[test]
fn audit_exhaustive_in_dimension_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = matexp(dir.path(), &["audit", "--n", "1", "--q", "3", "--exhaustive"]);
    assert!(out.status.success());
    for rel in ["out-vs-predicted", "in-vs-predicted", "out-vs-class"] {
        let csv = fs::read_to_string(dir.path().join(format!("audit-{rel}.csv"))).unwrap();
        assert_eq!(csv, "a1,c1,a2,c2,expected,actual\n");
    }
    assert_eq!(manifest(dir.path(), "audit")["suites"][0]["examined"], 81);
}
