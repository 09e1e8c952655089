use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_perforated-bem");
const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");

fn run(args: &[&str], out: &Path) -> (i32, String, String) {
    let o = Command::new(BIN)
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8(o.stdout).unwrap(),
        String::from_utf8(o.stderr).unwrap(),
    )
}

fn config(name: &str) -> String {
    format!("{CONFIGS}/{name}")
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(&["run", &config("annulus_linear.cfg"), "--quad-order", "8"], dir.path());
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("energy slope"));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("eps,xi,xi_scaled,probe_1,"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["provenance"]["quad_order"], 8);
    assert_eq!(json["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn quiet_run_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&["run", &config("zero_data.cfg"), "--quad-order", "8", "--quiet"], dir.path());
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
}

#[test]
fn verify_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(&["verify", &config("star_nonlinear.cfg"), "--seed", "3"], dir.path());
    assert_eq!(code, 0, "{stdout}{stderr}");
    assert!(stdout.lines().all(|l| l.starts_with("ok")));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 3);
}

#[test]
fn failing_verify_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("annulus_linear.cfg"))
        .unwrap()
        .replace("quadrature_check = 1e-6", "quadrature_check = 1e-30");
    let path = dir.path().join("strict.cfg");
    std::fs::write(&path, text).unwrap();
    let (code, stdout, _) = run(&["verify", path.to_str().unwrap(), "--quiet"], dir.path());
    assert_eq!(code, 4);
    assert!(stdout.contains("FAIL"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(&["run", "/nonexistent.cfg"], dir.path());
    assert_eq!(code, 2);
    assert!(stderr.contains("error"));

    let text = std::fs::read_to_string(config("annulus_linear.cfg")).unwrap();
    let path = dir.path().join("typo.cfg");
    std::fs::write(&path, text.replace("quad_order", "quad_ordr")).unwrap();
    let (code, _, stderr) = run(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(code, 2, "{stderr}");

    let (code, _, stderr) = run(&["run", &config("annulus_linear.cfg"), "--quad-order", "3"], dir.path());
    assert_eq!(code, 2, "{stderr}");
}
