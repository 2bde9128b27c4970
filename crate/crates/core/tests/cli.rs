use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_surfcalc"))
}

fn temp(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("surfcalc-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn list_shows_the_catalogs() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["flat-disk", "sphere-cap", "expanding-sphere-cap", "random-smooth", "newtonian", "audit"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn run_writes_reports_and_orders_reads_them() {
    let dir = temp("run");
    let scenario = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/flat_disk_identities.json");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&dir)
        .args(["--threads", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("suite,name,resolutions,"));
    let first = std::fs::read(dir.join("divergence.csv")).unwrap();

    let out = bin().args(["orders", "--report"]).arg(dir.join("divergence.csv")).output().unwrap();
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("divergence-random") && table.contains("1.9"), "{table}");

    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&dir)
        .env("SURFCALC_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(dir.join("divergence.csv")).unwrap(), first);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn failing_checks_and_bad_configs_exit_nonzero() {
    let dir = temp("fail");
    let strict = dir.join("strict.json");
    std::fs::write(
        &strict,
        r#"{"name": "strict", "surface": {"name": "sphere-cap"}, "resolutions": [8, 16, 32],
            "derivative_mode": "finite-difference", "suites": ["geometry"],
            "tolerances": {"mean-curvature": {"max_rel": 1e-12}}}"#,
    )
    .unwrap();
    let out = bin().args(["run", "--scenario"]).arg(&strict).arg("--out").arg(dir.join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"name": "bad", "surface": {"name": "klein-bottle"}, "resolutions": [8, 16, 32]}"#)
        .unwrap();
    let out = bin().args(["run", "--scenario"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("surface") && err.contains("klein-bottle"), "{err}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn empty_suite_list_exits_zero_without_reports() {
    let dir = temp("empty");
    let sc = dir.join("empty.json");
    std::fs::write(&sc, r#"{"name": "empty", "surface": {"name": "flat-disk"}, "resolutions": [8, 16, 32]}"#).unwrap();
    let out = bin().args(["run", "--scenario"]).arg(&sc).arg("--out").arg(dir.join("o")).output().unwrap();
    assert!(out.status.success());
    assert!(!dir.join("o").exists());
    let _ = std::fs::remove_dir_all(&dir);
}
