use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_green-imcf"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn green_kernel_has_newtonian_row() {
    let dir = tempfile::tempdir().unwrap();
    let model = configs().join("euclidean3.json");
    let o = run(&["green", "--model", model.to_str().unwrap(), "--p", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = dir.path().join("out/kernel.csv");
    let text = fs::read_to_string(&csv).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# green-imcf ") && first.contains(" config=") && first.contains(" seed=0"));
    let row = data_rows(&csv).into_iter().find(|r| r[0] == "1e0").expect("row at r = 1");
    let g: f64 = row[1].parse().unwrap();
    assert!((g - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-12);
}

#[test]
fn nogo_reports_positive_margins() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["nogo", "--A", "1", "--B", "1", "--t0", "1", "--trials", "120"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("p0 = 1.03"));
    let rows = data_rows(&dir.path().join("out/nogo.csv"));
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r[3].parse::<f64>().unwrap() > 0.0);
        assert!(r[6].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn capacitor_writes_fields_per_p() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["capacitor", "--annulus", "0.5,1,0.1", "--p-schedule", "1.5,1.3,1.1,1.05"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["field_p1.5.csv", "field_p1.3.csv", "field_p1.1.csv", "field_p1.05.csv", "field_extrapolated.csv"] {
        let rows = data_rows(&dir.path().join("out").join(name));
        assert!(!rows.is_empty(), "{name}");
    }
    // Extrapolated field near log(r / r0) at a mid-radius node.
    let rows = data_rows(&dir.path().join("out/field_extrapolated.csv"));
    let mid = rows
        .iter()
        .map(|r| (r[1].parse::<f64>().unwrap().hypot(r[2].parse().unwrap()), r[3].parse::<f64>().unwrap()))
        .min_by(|a, b| (a.0 - 0.75).abs().total_cmp(&(b.0 - 0.75).abs()))
        .unwrap();
    assert!((mid.1 - (mid.0 / 0.5).ln()).abs() < 5e-2, "{mid:?}");
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["capacitor", "--annulus", "0.5,1,0.1", "--p-schedule", "1.5,1.2"];
    let a = run(&[&args[..], &["--out", "a"]].concat(), dir.path());
    let b = bin().args(args).args(["--out", "b"]).env("GREEN_IMCF_THREADS", "1").current_dir(dir.path()).output().unwrap();
    assert!(a.status.success() && b.status.success());
    for name in ["field_p1.5.csv", "field_p1.2.csv", "field_extrapolated.csv", "capacitor.csv"] {
        let x = fs::read(dir.path().join("a").join(name)).unwrap();
        let y = fs::read(dir.path().join("b").join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("constants.json");
    let o = run(&["constants", "--config", cfg.to_str().unwrap(), "--nu", "4", "--out", "c"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("c/constants.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("\"nu\":4.0"));
    let summary = data_rows(&dir.path().join("c/constants_summary.csv"));
    let class = |id: &str| summary.iter().find(|r| r[0] == id).unwrap()[1].clone();
    assert_eq!(class("chat"), "bounded");
    assert_eq!(class("c_unstable"), "polynomial");
}

#[test]
fn malformed_config_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\n  \"p\": 2,\n  \"points\": \"many\"\n}\n").unwrap();
    let o = run(&["green", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:3"), "{}", stderr(&o));
}

#[test]
fn malformed_mesh_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.msh"), "3 1 0\n0 0\n1 0\n0 one\n0 1 2\n").unwrap();
    let o = run(&["capacitor", "--mesh", "m.msh"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("m.msh:4"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_missing_model_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), "{\"nu\": 3, \"colour\": 1}").unwrap();
    assert_eq!(run(&["constants", "--config", "c.json"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["green", "--p", "2"], dir.path()).status.code(), Some(2));
    let bad_threads = bin().args(["constants"]).env("GREEN_IMCF_THREADS", "0").current_dir(dir.path()).output().unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let model = configs().join("euclidean2.json");
    let o = run(
        &["capacity", "--model", model.to_str().unwrap(), "--p", "2", "--s", "0.5", "--R", "1", "--h", "0.2", "--tol", "1e-9"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("capacity: variational rel err"), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("out/capacity.csv"));
    assert!(rows[0][0].starts_with("euclidean"));
    assert!(rows[0][6].parse::<f64>().unwrap() > 1e-9);
}

#[test]
fn imcf_limit_flags_hyperbolic_gradient_violation() {
    let dir = tempfile::tempdir().unwrap();
    let model = configs().join("hyperbolic3.json");
    let o = run(&["imcf-limit", "--model", model.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("violated"));
    let rows = data_rows(&dir.path().join("out/imcf_core.csv"));
    assert!(rows.iter().all(|r| r[6].parse::<f64>().unwrap() < 0.0));
}

#[test]
fn verify_all_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify-all", "--only", "1,9,10"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("out/verify_summary.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[2] == "PASS"));
    assert_eq!(run(&["verify-all", "--only", "12"], dir.path()).status.code(), Some(2));
}
