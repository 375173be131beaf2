use std::path::Path;
use std::process::{Command, Output};

fn ncstoch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncstoch")).args(args).output().expect("run ncstoch")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn diff_prints_the_golden_derivative() {
    let o = ncstoch(&["diff", "--expr", "x1 x2 x2' x3 + 3i tr(x1 x2') x2 + x1' x3^2 + 5", "--var", "x2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "x1 x2 y1' x3 + x1 y1 x2' x3 + 3i tr(x1 x2') y1 + 3i tr(x1 y1') x2");
}

#[test]
fn diff_of_order_two() {
    let o = ncstoch(&["diff", "--expr", "x1^2", "--k", "2"]);
    assert_eq!(stdout(&o).trim(), "y1 y2 + y2 y1");
}

#[test]
fn sim_is_byte_identical_across_runs_and_thread_caps() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let base = ["sim", "--n", "8", "--T", "1", "--mesh", "0.001", "--paths", "100", "--seed", "7", "--out"];
    let mut first: Vec<&str> = base.to_vec();
    first.push(a.to_str().unwrap());
    let mut second: Vec<&str> = base.to_vec();
    second.extend([b.to_str().unwrap(), "--threads", "1"]);
    assert_eq!(ncstoch(&first).status.code(), Some(0));
    assert_eq!(ncstoch(&second).status.code(), Some(0));
    for i in [0, 57, 99] {
        let name = format!("path_{i:05}.ncp1");
        let (x, y) = (std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
        assert!(x.starts_with(b"NCP1"));
        assert_eq!(x, y);
    }
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    assert_eq!(&header[0], "check");
    assert!(header.iter().any(|h| h == "slope"));
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn ito_study_writes_decreasing_residuals_with_slope() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("ito.csv");
    let json_path = dir.path().join("ito.json");
    let o = ncstoch(&[
        "ito", "--poly", "x1^4", "--n", "16", "--meshes", "0.02,0.01,0.005,0.0025", "--paths", "200", "--seed", "1",
        "--csv", csv_path.to_str().unwrap(), "--json", json_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = read_csv(&csv_path);
    assert_eq!(rows.len(), 4);
    let residuals: Vec<f64> = rows.iter().map(|r| r[8].parse().unwrap()).collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
    assert!(rows.iter().all(|r| !r[11].is_empty()));
    let env: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(env["config"]["poly"], "x1^4");
    assert_eq!(env["config"]["command"], "ito");
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let o = ncstoch(&["isometry", "--n", "4", "--paths", "50", "--mesh", "0.05", "--seed", "9", "--json", first.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let env: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let mut config = env["config"].clone();
    config.as_object_mut().unwrap().remove("command");
    let second = dir.path().join("second.json");
    config["json"] = second.to_str().unwrap().into();
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, config.to_string()).unwrap();
    ncstoch(&["isometry", "--config", cfg_path.to_str().unwrap()]);
    let env2: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(env["reports"], env2["reports"]);
}

#[test]
fn flags_override_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, r#"{"expr": "x1^3", "k": 1}"#).unwrap();
    let o = ncstoch(&["diff", "--config", cfg_path.to_str().unwrap(), "--expr", "x1^2"]);
    assert_eq!(stdout(&o).trim(), "x1 y1 + y1 x1");
}

#[test]
fn eval_reads_matrices_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"x1": [[1, [0, 1]], [[0, -1], 2]], "x2": [[2, 0], [0, 3]]}"#).unwrap();
    let o = ncstoch(&["eval", "--expr", "x1 x2 + tr(x2)", "--matrices", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Vec<Vec<[f64; 2]>> = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v, vec![vec![[4.5, 0.0], [0.0, 3.0]], vec![[0.0, -2.0], [8.5, 0.0]]]);
}

#[test]
fn bad_inputs_exit_with_two() {
    assert_eq!(ncstoch(&["diff", "--expr", "x1 +", "--var", "1"]).status.code(), Some(2));
    assert_eq!(ncstoch(&["diff", "--expr", "x1"]).status.code(), Some(2));
    assert_eq!(ncstoch(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ncstoch(&["qc", "--meshes", "0.1,0.05"]).status.code(), Some(2));
    assert_eq!(ncstoch(&["ito", "--model", "quantum"]).status.code(), Some(2));
}

#[test]
fn failed_tolerance_exits_with_one() {
    // At n = 4 the spectrum is far from the semicircle.
    let o = ncstoch(&["esd", "--n", "4", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL esd"));
}

#[test]
fn selftest_runs_selected_criteria() {
    let o = ncstoch(&["selftest", "--only", "1,2,4,13"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 4);
}
