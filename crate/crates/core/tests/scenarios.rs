use std::path::PathBuf;
use surfcalc_core::geometry::SurfaceConfig;
use surfcalc_core::scenario::{run_scenario, Scenario, Suite};
use surfcalc_core::Error;

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn field_of(e: Error) -> (String, String) {
    match e {
        Error::Config { field, message } => (field, message),
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn shipped_scenarios_parse() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        let sc = Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!sc.suites.is_empty());
        count += 1;
    }
    assert!(count >= 10);
}

#[test]
fn flat_disk_identities_pass() {
    let sc = Scenario::load(&scenario_dir().join("flat_disk_identities.json")).unwrap();
    let rep = run_scenario(&sc).unwrap();
    assert!(rep.passed(), "{}", rep.table());
}

#[test]
fn unknown_surface_names_the_field() {
    let err = Scenario::from_json(r#"{"name": "x", "surface": {"name": "torus"}, "resolutions": [8, 16, 32]}"#)
        .unwrap_err();
    let (field, message) = field_of(err);
    assert_eq!(field, "surface.name");
    assert!(message.contains("torus") && message.contains("line"), "{message}");
}

#[test]
fn nested_field_errors_carry_the_path() {
    let json = r#"{
  "name": "x",
  "surface": {"name": "flat-disk"},
  "resolutions": [8, 16, 32],
  "time": {"t": 0.0, "t_ned": 1.0}
}"#;
    let (field, message) = field_of(Scenario::from_json(json).unwrap_err());
    assert_eq!(field, "time.t_ned");
    assert!(message.contains("t_ned") && message.contains("line 5"), "{message}");
}

#[test]
fn resolutions_are_checked() {
    for (res, needle) in [("[8, 16]", "at least 3"), ("[8, 8, 16]", "increasing"), ("[32, 16, 64]", "increasing")] {
        let json = format!(r#"{{"name": "x", "surface": {{"name": "flat-disk"}}, "resolutions": {res}}}"#);
        let (field, message) = field_of(Scenario::from_json(&json).unwrap_err());
        assert_eq!(field, "resolutions");
        assert!(message.contains(needle), "{message}");
    }
}

#[test]
fn unknown_names_are_rejected() {
    let base = r#""name": "x", "surface": {"name": "flat-disk"}, "resolutions": [8, 16, 32]"#;
    let (field, _) = field_of(Scenario::from_json(&format!(r#"{{{base}, "constitutive": "honey"}}"#)).unwrap_err());
    assert_eq!(field, "constitutive");
    let (field, _) = field_of(Scenario::from_json(&format!(r#"{{{base}, "suites": ["weather"]}}"#)).unwrap_err());
    assert!(field.starts_with("suites"), "{field}");
    let (field, _) = field_of(Scenario::from_json(&format!(r#"{{{base}, "colour": 1}}"#)).unwrap_err());
    assert_eq!(field, "colour");
    let (field, _) =
        field_of(Scenario::from_json(&format!(r#"{{{base}, "suites": ["geometry", "geometry"]}}"#)).unwrap_err());
    assert_eq!(field, "suites");
}

#[test]
fn empty_suite_list_writes_nothing() {
    let sc = Scenario::from_json(r#"{"name": "x", "surface": {"name": "flat-disk"}, "resolutions": [8, 16, 32]}"#)
        .unwrap();
    let rep = run_scenario(&sc).unwrap();
    assert!(rep.passed());
    assert!(rep.files().is_empty());
    let dir = std::env::temp_dir().join(format!("surfcalc-empty-{}", std::process::id()));
    assert!(rep.write(&dir).unwrap().is_empty());
    assert!(!dir.exists());
}

#[test]
fn catalog_surfaces_round_trip_through_config() {
    for cfg in SurfaceConfig::defaults() {
        let json = serde_json::to_string(&cfg).unwrap();
        let back: SurfaceConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        let sc = Scenario::from_json(&format!(r#"{{"name": "rt", "surface": {json}, "resolutions": [8, 16, 32]}}"#))
            .unwrap();
        assert_eq!(sc.surface, cfg);
        assert_eq!(sc.surface.name(), cfg.name());
    }
}

#[test]
fn every_catalog_surface_passes_the_geometry_suite() {
    for cfg in SurfaceConfig::defaults() {
        let surface = serde_json::to_string(&cfg).unwrap();
        // Second-order stencils lose an order at the boundary when the
        // finite-difference normal is differentiated again.
        for (mode, stencil) in [("analytic", "2"), ("finite-difference", "4")] {
            let sc = Scenario::from_json(&format!(
                r#"{{"name": "g", "surface": {surface}, "resolutions": [32, 64, 128],
                    "time": {{"t": 0.25}}, "derivative_mode": "{mode}", "stencil_order": "{stencil}", "suites": ["geometry"]}}"#
            ))
            .unwrap();
            let rep = run_scenario(&sc).unwrap();
            assert!(rep.passed(), "{} {mode}\n{}", cfg.name(), rep.table());
        }
    }
}

#[test]
fn tolerance_overrides_apply_by_suite_then_check() {
    let sc = Scenario::from_json(
        r#"{"name": "x", "surface": {"name": "flat-disk"}, "resolutions": [8, 16, 32],
            "tolerances": {"geometry": {"max_rel": 0.5}, "projector": {"min_order": 3.0}}}"#,
    )
    .unwrap();
    let t = sc.tolerance(Suite::Geometry, "projector");
    assert_eq!(t.max_rel, Some(0.5));
    assert_eq!(t.min_order, Some(3.0));
    let t = sc.tolerance(Suite::Geometry, "mean-curvature");
    assert_eq!((t.max_rel, t.min_order), (Some(0.5), Some(1.9)));
}

#[test]
fn a_missed_tolerance_fails_the_run() {
    let sc = Scenario::from_json(
        r#"{"name": "x", "surface": {"name": "sphere-cap"}, "resolutions": [8, 16, 32],
            "derivative_mode": "finite-difference", "suites": ["geometry"],
            "tolerances": {"mean-curvature": {"max_rel": 1e-9}}}"#,
    )
    .unwrap();
    let rep = run_scenario(&sc).unwrap();
    assert!(!rep.passed());
    assert!(rep.summary_csv().contains("geometry,mean-curvature,3,"));
    assert!(rep.summary_csv().lines().any(|l| l.starts_with("geometry,mean-curvature") && l.ends_with(",false")));
}

#[test]
fn solver_suites_reject_unsuitable_surfaces() {
    let base = r#""name": "x", "resolutions": [8, 16, 32], "time": {"t": 0.3, "t_end": 0.1}"#;
    for (surface, suite, field) in [
        (r#"{"name": "sphere-cap"}"#, "manufactured", "surface"),
        (r#"{"name": "expanding-sphere-cap"}"#, "barotropic", "surface"),
        (r#"{"name": "sphere-cap"}"#, "diffusion", "surface"),
    ] {
        let sc = Scenario::from_json(&format!(r#"{{{base}, "surface": {surface}, "suites": ["{suite}"]}}"#)).unwrap();
        let (f, _) = field_of(run_scenario(&sc).unwrap_err());
        assert_eq!(f, field, "{suite}");
    }
}

#[test]
fn report_files_are_csv_with_headers() {
    let sc = Scenario::from_json(
        r#"{"name": "x", "surface": {"name": "expanding-sphere-cap", "accel": 0.5, "omega": 1.0},
            "resolutions": [8, 12, 16], "time": {"t": 0.4, "t_end": 0.2}, "derivative_mode": "analytic",
            "suites": ["manufactured", "audit"],
            "tolerances": {"manufactured": {"max_rel": 1.0, "min_order": 0.0}, "audit": {"max_rel": 1.0, "min_order": 0.0}}}"#,
    )
    .unwrap();
    let files = run_scenario(&sc).unwrap().files();
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    for want in [
        "manufactured.csv",
        "manufactured_residuals_n8.csv",
        "manufactured_residuals_n16.csv",
        "audit.csv",
        "audit_balance_n12.csv",
        "summary.csv",
    ] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    for (name, body) in &files {
        let mut lines = body.lines();
        let header = lines.next().unwrap();
        let cols = header.split(',').count();
        assert!(lines.all(|l| l.split(',').count() == cols), "{name}");
        assert!(!body.contains('\r'));
    }
    let balance = &files.iter().find(|(n, _)| n == "audit_balance_n8.csv").unwrap().1;
    assert!(balance.starts_with("t,mass,px,py,pz,Lx,Ly,Lz,eA,Ctot,energy_residual\n"));
    let residuals = &files.iter().find(|(n, _)| n == "manufactured_residuals_n8.csv").unwrap().1;
    assert!(residuals.starts_with("name,linf,l2\n"));
}
