use std::path::Path;
use std::process::{Command, Output};

fn cmdfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmdfs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn profile_summary_json() {
    let out = cmdfs(&["profile", "--dist", "dirac:3", "--grid", "128"]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((summary["alpha_c"].as_f64().unwrap() - 0.875).abs() < 1e-12);
    assert!((summary["xi_pi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn profile_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmdfs(&[
        "profile",
        "--dist",
        "poisson:2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(read(&dir.path().join("profile.csv")).starts_with("rho,x_up,y_up,x_down,y_down\n"));
    assert!(read(&dir.path().join("height.csv")).starts_with("t,h\n"));
}

#[test]
fn simulate_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmdfs(&[
        "simulate",
        "--dist",
        "poisson:3",
        "--N",
        "500",
        "--reps",
        "2",
        "--alpha",
        "0.1,0.2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let contour = read(&dir.path().join("contour_1.csv"));
    assert_eq!(contour.lines().count(), 1 + 1001);
    assert!(read(&dir.path().join("edges_0.csv")).starts_with("u,v\n"));
    let snaps: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("snapshots_0.json"))).unwrap();
    assert_eq!(snaps.as_array().unwrap().len(), 2);
    let summary: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("summary.json"))).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--dist",
        "geometric:0.4",
        "--N",
        "300",
        "--seed",
        "9",
    ];
    assert_eq!(cmdfs(&args).stdout, cmdfs(&args).stdout);
}

#[test]
fn ode_trajectory_csv() {
    let out = cmdfs(&[
        "ode",
        "--dist",
        "dirac:4",
        "--epsilon",
        "0.01",
        "--t-end",
        "0.01",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,z,z_0,z_1,z_2,z_3,z_4,rho");
    let explored = cmdfs(&[
        "ode", "--dist", "dirac:4", "--system", "explored", "--t-end", "0.01",
    ]);
    assert!(explored.status.success());
}

#[test]
fn compare_exit_codes() {
    let ok = cmdfs(&[
        "compare", "--dist", "dirac:5", "--N", "20000", "--reps", "3",
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["all_passed"], true);

    // too small for the snapshot tolerance
    let fail = cmdfs(&[
        "compare",
        "--dist",
        "poisson:3",
        "--N",
        "200",
        "--reps",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(fail.status.code(), Some(2));
    assert!(String::from_utf8(fail.stdout)
        .unwrap()
        .starts_with("criterion,"));

    let err = cmdfs(&["compare", "--dist", "poisson:3"]);
    assert_eq!(err.status.code(), Some(1));
    let bad = cmdfs(&["profile", "--dist", "poisson:0.5"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn compare_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(
        &path,
        r#"{"dist": {"family": "dirac", "params": {"d": 5}}, "N": 5000, "replicates": 2, "seed": 4}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = cmdfs(&[
        "compare",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.code().is_some_and(|c| c == 0 || c == 2));
    let report: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("report.json"))).unwrap();
    assert_eq!(report["config"]["seed"], 4);
    assert_eq!(report["replicates"].as_array().unwrap().len(), 2);
}
