use std::fs;

use digesta_core::output::{summary_csv, SUMMARY_COLUMNS, TRAJECTORY_COLUMNS};
use digesta_core::{
    parse_config, run_scenario, write_manifest, write_outputs, Config, IntegrationConfig,
    RunManifest,
};

fn fibre_dose_config() -> Config {
    let mut c = Config::default();
    c.integrator = IntegrationConfig::rk4(0.01);
    c.scenarios.retain(|s| s.name == "insoluble-dose");
    c
}

#[test]
fn fibre_dose_table_shape() {
    let c = fibre_dose_config();
    let r = run_scenario(&c.scenarios[0], &c.params, &c.integrator).unwrap();
    let text = summary_csv(&r).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "F_over_DM_pct");
    assert_eq!(&header[1..], SUMMARY_COLUMNS);
    let exit_col = header.iter().position(|h| h == "exit_time_h").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    let doses: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(doses, ["0", "2", "7", "11", "14"]);
    for r in &rows {
        assert_eq!(&r[1], "ok");
        let t: f64 = r[exit_col].parse().unwrap();
        assert!(t > 0.0);
    }
}

#[test]
fn outputs_and_manifest_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let c = fibre_dose_config();
    let r = run_scenario(&c.scenarios[0], &c.params, &c.integrator).unwrap();
    let written = write_outputs(&r, dir.path()).unwrap();
    assert_eq!(written.len(), 6);
    let traj = fs::read_to_string(dir.path().join("insoluble-dose/trajectory_4.csv")).unwrap();
    let header = traj.lines().next().unwrap();
    assert_eq!(header, TRAJECTORY_COLUMNS.join(","));
    assert!(traj.lines().count() > 2);
    let last: Vec<&str> = traj.lines().last().unwrap().split(',').collect();
    assert_eq!(last[1], "17");

    let run = RunManifest {
        config_path: "fibre.toml".into(),
        scenarios: vec!["insoluble-dose".into()],
        output_dir: dir.path().display().to_string(),
        tool_version: "0.1.0".into(),
        timestamp: "2026-01-01T00:00:00Z".into(),
    };
    let path = write_manifest(&c, run.clone(), dir.path()).unwrap();
    let manifest = parse_config(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(manifest.run, Some(run));
    assert_eq!(manifest.params, c.params);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let c = fibre_dose_config();
    let first = run_scenario(&c.scenarios[0], &c.params, &c.integrator).unwrap();
    let path = write_manifest(&c, RunManifest::default(), dir.path()).unwrap();
    let again = parse_config(&fs::read_to_string(path).unwrap()).unwrap();
    let second = run_scenario(&again.scenarios[0], &again.params, &again.integrator).unwrap();
    assert_eq!(summary_csv(&first).unwrap(), summary_csv(&second).unwrap());
}

#[test]
fn config_text_round_trip_is_a_fixed_point() {
    let text = r#"
[params.hydration]
alpha = 2.0
beta = 2.0
gamma = 2.0

[params.transport]
tau = 3.5

[integrator]
method = "adaptive"
tol_rel = 1e-7

[[scenarios]]
name = "custom"
composition = { dry_matter_g = 40.0, f_sol_pct = 5.0 }
overrides = { "params.water.k_w" = 1.5 }
sweep = { label = "tau", paths = ["params.transport.tau"], points = [[1.0], [2.0]] }
"#;
    let a = parse_config(text).unwrap();
    let t1 = a.to_text().unwrap();
    let b = parse_config(&t1).unwrap();
    assert_eq!(a, b);
    assert_eq!(t1, b.to_text().unwrap());
    assert_eq!(b.params.hydration.alpha, 2.0);
    assert_eq!(b.scenarios[0].sweep.as_ref().unwrap().points.len(), 2);
}

#[test]
fn negative_composition_names_the_field() {
    let err = parse_config("[[scenarios]]\nname = \"bad\"\ncomposition = { f_insol_pct = -3.0 }\n")
        .unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("f_insol_pct"), "{err}");
}
