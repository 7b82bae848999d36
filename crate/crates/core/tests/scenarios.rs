use digesta_core::integrator::time_to_water_ratio;
use digesta_core::output::summary_csv;
use digesta_core::scenarios::{build_initial_state, SweepAxis};
use digesta_core::{
    baseline_scenario, builtin_scenarios, run_scenario, sweep, DigestaError, IntegrationConfig,
    ModelParams, ScenarioConfig,
};

fn fast() -> IntegrationConfig {
    IntegrationConfig::rk4(0.01)
}

#[test]
fn empty_sweep_gives_empty_result() {
    let p = ModelParams::default();
    let r = sweep(&p, "params.water.k_w", &[], &baseline_scenario(), &fast()).unwrap();
    assert!(r.rows.is_empty());
}

#[test]
fn sweeping_the_default_value_is_the_plain_run() {
    let p = ModelParams::default();
    let plain = run_scenario(&baseline_scenario(), &p, &fast()).unwrap();
    let swept = sweep(&p, "params.transport.tau", &[p.transport.tau], &baseline_scenario(), &fast())
        .unwrap();
    let (a, b) = (&plain.rows[0], &swept.rows[0]);
    assert_eq!(a.exit_time, b.exit_time);
    assert_eq!(a.absorbed_dm, b.absorbed_dm);
    assert_eq!(a.final_mass, b.final_mass);
    assert_eq!(a.dry_over_total_absorbed_pct, b.dry_over_total_absorbed_pct);
    assert_eq!(a.integration, b.integration);
}

#[test]
fn unknown_sweep_path_is_rejected() {
    let p = ModelParams::default();
    let err = sweep(&p, "params.water.kw", &[1.0], &baseline_scenario(), &fast()).unwrap_err();
    assert!(matches!(err, DigestaError::UnknownParameter(ref path) if path == "params.water.kw"));
}

/// Bolus with every process except wall water exchange switched off and no
/// bound water, so `u = W - 0.1 M` decays as `u0 exp(-0.9 k_w t)` and
/// `W/M - 0.1 = 0.9 u / (DM + u)`.
fn relaxation_only() -> ScenarioConfig {
    let mut sc = baseline_scenario();
    sc.name = "relaxation".into();
    for path in [
        "params.hydration.alpha",
        "params.hydration.beta",
        "params.hydration.gamma",
        "params.hydration.lambda_s",
        "params.hydration.lambda_i",
        "params.volumic.k_vol.peak",
        "params.volumic.k_s",
        "params.surfacic.k_surf",
        "params.surfacic.k_surf_tilde",
        "params.equilibrium.k_equi",
        "params.absorption.k_abs",
        "params.transport.tau",
    ] {
        sc.overrides.insert(path.to_string(), 0.0);
    }
    sc
}

#[test]
fn faster_wall_exchange_reaches_target_ratio_sooner() {
    let p = ModelParams::default();
    let sc = relaxation_only();
    let mut cfg = IntegrationConfig::rk4(0.005);
    cfg.audit_every = 1;
    cfg.t_max = 80.0;
    let rates = [0.1, 1.0, 10.0];
    let result = sweep(&p, "params.water.k_w", &rates, &sc, &cfg).unwrap();

    let mut q = p;
    for (path, v) in &sc.overrides {
        let mut dummy = sc.clone();
        digesta_core::scenarios::set_path(&mut q, &mut dummy, path, *v).unwrap();
    }
    let s0 = build_initial_state(&sc, &q).unwrap();
    let dm = s0.dry_matter();
    let u0 = s0.w - 0.1 * (dm + s0.w);
    let u_star = 0.01 * dm / 0.89;

    let mut times = Vec::new();
    for (row, k_w) in result.rows.iter().zip(rates) {
        let traj = &row.integration.as_ref().unwrap().trajectory;
        let t = time_to_water_ratio(traj, 0.1, 0.01).expect("target reached");
        let oracle = (u0 / u_star).ln() / (0.9 * k_w);
        assert!((t - oracle).abs() <= cfg.dt + 1e-9, "k_w = {k_w}: {t} vs {oracle}");
        times.push(t);
    }
    assert!(times[0] > times[1] && times[1] > times[2], "{times:?}");
}

#[test]
fn runs_are_bitwise_reproducible() {
    let p = ModelParams::default();
    let scenarios = builtin_scenarios();
    let sc = scenarios.iter().find(|s| s.name == "soluble-dose").unwrap();
    let a = run_scenario(sc, &p, &fast()).unwrap();
    let b = run_scenario(sc, &p, &fast()).unwrap();
    assert_eq!(summary_csv(&a).unwrap(), summary_csv(&b).unwrap());
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.integration, rb.integration);
    }
}

#[test]
fn thread_cap_does_not_change_results() {
    let p = ModelParams::default();
    let scenarios = builtin_scenarios();
    let sc = scenarios.iter().find(|s| s.name == "insoluble-dose").unwrap();
    let free = run_scenario(sc, &p, &fast()).unwrap();
    std::env::set_var(digesta_core::scenarios::THREADS_ENV, "1");
    let capped = run_scenario(sc, &p, &fast()).unwrap();
    std::env::remove_var(digesta_core::scenarios::THREADS_ENV);
    assert_eq!(summary_csv(&free).unwrap(), summary_csv(&capped).unwrap());
}

#[test]
fn failed_point_does_not_stop_the_sweep() {
    let p = ModelParams::default();
    let scenarios = builtin_scenarios();
    let mut sc = scenarios.iter().find(|s| s.name == "water-ratio").unwrap().clone();
    // 10% water cannot hold the water bound by A_s.
    sc.sweep = Some(SweepAxis::single("water.water_pct", &[10.0, 60.0]));
    let r = run_scenario(&sc, &p, &fast()).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(!r.rows[0].is_ok());
    assert!(r.rows[0].error.as_ref().unwrap().contains("bound water"));
    assert!(r.rows[1].is_ok());
}

#[test]
fn rows_follow_sweep_order() {
    let p = ModelParams::default();
    let values = [14.0, 0.0, 7.0];
    let mut sc = baseline_scenario();
    sc.trajectories = false;
    let r = sweep(&p, "composition.f_insol_pct", &values, &sc, &fast()).unwrap();
    let got: Vec<f64> = r.rows.iter().map(|r| r.sweep_value).collect();
    assert_eq!(got, values);
    assert!(r.rows.iter().all(|r| r.integration.is_none()));
}

#[test]
fn ratios_are_percentages() {
    let p = ModelParams::default();
    for sc in builtin_scenarios() {
        let r = run_scenario(&sc, &p, &fast()).unwrap();
        for row in &r.rows {
            for v in [row.absorbed_over_dm_pct, row.dry_over_total_absorbed_pct] {
                assert!((0.0..=100.0).contains(&v), "{}: {v}", sc.name);
            }
        }
    }
}
