//! In-silico experiments: initial bolus composition, parameter overrides and
//! sweeps, and per-point summary statistics.
//!
//! Composition is given as a dry-matter total and the percentage of it held by
//! each pool; whatever is not assigned is non-degradable substrate `A_nd`.
//! Swapping `A_nd` for fibre therefore only needs the fibre percentage.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{DigestaError, Result};
use crate::integrator::{integrate, ExitReason, IntegrationConfig, IntegrationResult};
use crate::model::{BolusState, ModelParams};

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "DIGESTA_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Composition {
    /// Total dry matter at the entry of the duodenum (g).
    pub dry_matter_g: f64,
    pub a_ns_pct: f64,
    pub a_s_pct: f64,
    pub b_int_pct: f64,
    pub b_abs_pct: f64,
    pub f_sol_pct: f64,
    pub f_insol_pct: f64,
}

impl Default for Composition {
    fn default() -> Self {
        Composition {
            dry_matter_g: 42.0,
            a_ns_pct: 43.0,
            a_s_pct: 42.0,
            b_int_pct: 0.0,
            b_abs_pct: 0.0,
            f_sol_pct: 0.0,
            f_insol_pct: 0.0,
        }
    }
}

impl Composition {
    fn pools(&self) -> [(&'static str, f64); 6] {
        [
            ("a_ns_pct", self.a_ns_pct),
            ("a_s_pct", self.a_s_pct),
            ("b_int_pct", self.b_int_pct),
            ("b_abs_pct", self.b_abs_pct),
            ("f_sol_pct", self.f_sol_pct),
            ("f_insol_pct", self.f_insol_pct),
        ]
    }

    /// Percentage left to `A_nd`.
    pub fn a_nd_pct(&self) -> f64 {
        100.0 - self.pools().iter().map(|(_, v)| v).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dry_matter_g.is_finite() && self.dry_matter_g > 0.0) {
            return Err(DigestaError::validation(format!(
                "composition.dry_matter_g must be > 0 (got {})",
                self.dry_matter_g
            )));
        }
        for (name, v) in self.pools() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DigestaError::validation(format!(
                    "composition.{name} must be ≥ 0 (got {v})"
                )));
            }
        }
        if self.a_nd_pct() < -1e-9 {
            return Err(DigestaError::validation(format!(
                "composition percentages sum to {} > 100",
                100.0 - self.a_nd_pct()
            )));
        }
        Ok(())
    }
}

/// Water entering the small intestine with the bolus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaterSources {
    /// Water carried by the feed per gram of dry matter.
    pub k_feed: f64,
    /// Salivary and gastric secretion water per gram of dry matter.
    pub k_sec: f64,
    /// Drunk water (g).
    pub w_drink_g: f64,
    /// When set, total water is fixed to this percentage of bolus mass and
    /// `w_drink_g` is derived from it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub water_pct: Option<f64>,
}

impl Default for WaterSources {
    fn default() -> Self {
        WaterSources {
            k_feed: 0.12,
            k_sec: 0.5,
            w_drink_g: 51.96,
            water_pct: None,
        }
    }
}

impl WaterSources {
    /// Total water `W_feed + W_sec + W_drink` for a bolus of `dm` grams dry matter.
    pub fn total_water(&self, dm: f64) -> Result<f64> {
        for (name, v) in [
            ("k_feed", self.k_feed),
            ("k_sec", self.k_sec),
            ("w_drink_g", self.w_drink_g),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DigestaError::validation(format!(
                    "water.{name} must be ≥ 0 (got {v})"
                )));
            }
        }
        let proportional = (self.k_feed + self.k_sec) * dm;
        match self.water_pct {
            None => Ok(proportional + self.w_drink_g),
            Some(p) => {
                if !(p > 0.0 && p < 100.0) {
                    return Err(DigestaError::validation(format!(
                        "water.water_pct must lie in (0, 100) (got {p})"
                    )));
                }
                let total = dm * p / (100.0 - p);
                if total < proportional {
                    return Err(DigestaError::validation(format!(
                        "water.water_pct = {p} leaves negative drunk water"
                    )));
                }
                Ok(total)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConditions {
    pub x0: f64,
    pub v0: f64,
    /// Ingested exogenous enzyme level.
    pub e_exo0: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions {
            x0: 0.0,
            v0: 0.0,
            e_exo0: 1.0,
        }
    }
}

/// A list of sweep points. Each point assigns a value to every path; a
/// one-element point is broadcast to all paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Header of the sweep column in the summary table.
    pub label: String,
    /// Dotted paths, e.g. `params.hydration.alpha` or `composition.f_sol_pct`.
    pub paths: Vec<String>,
    pub points: Vec<Vec<f64>>,
}

impl SweepAxis {
    pub fn single(path: &str, values: &[f64]) -> Self {
        SweepAxis {
            label: path.to_string(),
            paths: vec![path.to_string()],
            points: values.iter().map(|v| vec![*v]).collect(),
        }
    }

    fn assignments(&self, point: &[f64]) -> Result<Vec<(String, f64)>> {
        let n = self.paths.len();
        if point.len() != 1 && point.len() != n {
            return Err(DigestaError::validation(format!(
                "sweep `{}`: point {:?} must have 1 or {n} values",
                self.label, point
            )));
        }
        Ok(self
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), if point.len() == 1 { point[0] } else { point[i] }))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: String,
    pub composition: Composition,
    pub water: WaterSources,
    pub initial: InitialConditions,
    /// Dotted-path overrides applied before the sweep, e.g. `"params.water.k_w" = 2.0`.
    pub overrides: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    /// Write per-point trajectory files.
    pub trajectories: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "baseline".to_string(),
            description: "No-fibre 120 g bolus".to_string(),
            composition: Composition::default(),
            water: WaterSources::default(),
            initial: InitialConditions::default(),
            overrides: BTreeMap::new(),
            sweep: None,
            trajectories: true,
        }
    }
}

fn set_in<T: Serialize + DeserializeOwned>(
    target: &mut T,
    keys: &[&str],
    value: f64,
    path: &str,
) -> Result<()> {
    let unknown = || DigestaError::UnknownParameter(path.to_string());
    let mut root = toml::Value::try_from(&*target).map_err(|_| unknown())?;
    let (leaf, parents) = keys.split_last().ok_or_else(unknown)?;
    let mut node = &mut root;
    for k in parents {
        node = node.get_mut(*k).ok_or_else(unknown)?;
    }
    let table = node.as_table_mut().ok_or_else(unknown)?;
    match table.get(*leaf) {
        Some(toml::Value::Float(_)) | None => {
            table.insert((*leaf).to_string(), toml::Value::Float(value));
        }
        Some(toml::Value::Integer(_)) if value.fract() == 0.0 => {
            table.insert((*leaf).to_string(), toml::Value::Integer(value as i64));
        }
        Some(_) => return Err(unknown()),
    }
    *target = root.try_into().map_err(|_| unknown())?;
    Ok(())
}

/// Assigns `value` at a dotted path rooted at `params`, `composition`,
/// `water` or `initial`.
pub fn set_path(
    params: &mut ModelParams,
    scenario: &mut ScenarioConfig,
    path: &str,
    value: f64,
) -> Result<()> {
    if !value.is_finite() {
        return Err(DigestaError::validation(format!(
            "value for `{path}` must be finite"
        )));
    }
    let keys: Vec<&str> = path.split('.').collect();
    match keys.as_slice() {
        ["params", rest @ ..] if !rest.is_empty() => set_in(params, rest, value, path),
        ["composition", rest @ ..] if !rest.is_empty() => {
            set_in(&mut scenario.composition, rest, value, path)
        }
        ["water", rest @ ..] if !rest.is_empty() => set_in(&mut scenario.water, rest, value, path),
        ["initial", rest @ ..] if !rest.is_empty() => {
            set_in(&mut scenario.initial, rest, value, path)
        }
        _ => Err(DigestaError::UnknownParameter(path.to_string())),
    }
}

/// Initial bolus for a scenario. Bound water is taken out of the total water;
/// what remains is available water.
pub fn build_initial_state(config: &ScenarioConfig, params: &ModelParams) -> Result<BolusState> {
    let c = &config.composition;
    c.validate()?;
    let dm = c.dry_matter_g;
    let pool = |pct: f64| dm * pct / 100.0;
    let h = &params.hydration;

    let a_s_dm = pool(c.a_s_pct);
    let b_int_dm = pool(c.b_int_pct);
    let b_abs_dm = pool(c.b_abs_pct);
    let f_sol_dm = pool(c.f_sol_pct);
    let f_insol_dm = pool(c.f_insol_pct);
    let bound = h.alpha * a_s_dm
        + h.beta * b_int_dm
        + h.gamma * b_abs_dm
        + h.lambda_s * f_sol_dm
        + h.lambda_i * f_insol_dm;
    let total_water = config.water.total_water(dm)?;
    let w = total_water - bound;
    if w < 0.0 {
        return Err(DigestaError::validation(format!(
            "scenario `{}`: bound water {bound:.4} g exceeds total water {total_water:.4} g",
            config.name
        )));
    }

    let init = &config.initial;
    if !(init.e_exo0.is_finite() && init.e_exo0 >= 0.0) {
        return Err(DigestaError::validation(format!(
            "initial.e_exo0 must be ≥ 0 (got {})",
            init.e_exo0
        )));
    }
    if !(init.x0.is_finite() && init.x0 >= 0.0) {
        return Err(DigestaError::validation(format!(
            "initial.x0 must be ≥ 0 (got {})",
            init.x0
        )));
    }
    Ok(BolusState {
        t: 0.0,
        x: init.x0,
        v: init.v0,
        a_nd: pool(c.a_nd_pct().max(0.0)),
        a_ns: pool(c.a_ns_pct),
        a_s_dm,
        b_int_dm,
        b_abs_dm,
        f_sol_dm,
        f_insol_dm,
        w,
        e_exo: init.e_exo0,
        absorbed_dm: 0.0,
        absorbed_water: 0.0,
        secreted_dm: 0.0,
    })
}

/// Outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    /// First component of the sweep point (or NaN without a sweep).
    pub sweep_value: f64,
    pub point: Vec<f64>,
    /// `None` when the point completed; otherwise why it failed.
    pub error: Option<String>,
    pub exit_reason: Option<ExitReason>,
    pub exit_time: Option<f64>,
    pub initial_dm: f64,
    pub initial_mass: f64,
    pub absorbed_dm: f64,
    /// Absorbed dry nutrients over initial dry matter (%).
    pub absorbed_over_dm_pct: f64,
    pub final_mass: f64,
    /// Absorbed dry nutrients over dry plus net absorbed water (%).
    pub dry_over_total_absorbed_pct: f64,
    pub audit_max_residual: f64,
    pub integration: Option<IntegrationResult>,
}

impl ScenarioRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(sweep_value: f64, point: Vec<f64>, err: &DigestaError) -> Self {
        ScenarioRow {
            sweep_value,
            point,
            error: Some(err.to_string()),
            exit_reason: None,
            exit_time: None,
            initial_dm: f64::NAN,
            initial_mass: f64::NAN,
            absorbed_dm: f64::NAN,
            absorbed_over_dm_pct: f64::NAN,
            final_mass: f64::NAN,
            dry_over_total_absorbed_pct: f64::NAN,
            audit_max_residual: f64::NAN,
            integration: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    /// Header for the sweep column.
    pub axis_label: String,
    /// Extra sweep paths beyond the first, reported as their own columns.
    pub extra_paths: Vec<String>,
    pub rows: Vec<ScenarioRow>,
}

impl ScenarioResult {
    pub fn row(&self, sweep_value: f64) -> Option<&ScenarioRow> {
        self.rows.iter().find(|r| r.sweep_value == sweep_value)
    }
}

fn summarize(
    sweep_value: f64,
    point: Vec<f64>,
    state0: &BolusState,
    params: &ModelParams,
    result: IntegrationResult,
    keep: bool,
) -> Result<ScenarioRow> {
    let d0 = crate::model::compute_derived(state0, params)?;
    let fin = result.final_state;
    let final_mass = crate::model::compute_derived(&fin, params)
        .map(|d| d.m)
        .unwrap_or(f64::NAN);
    let absorbed = fin.absorbed_dm - state0.absorbed_dm;
    let water = (fin.absorbed_water - state0.absorbed_water).max(0.0);
    let total = absorbed + water;
    Ok(ScenarioRow {
        sweep_value,
        point,
        error: None,
        exit_reason: Some(result.exit_reason),
        exit_time: result.exit_time,
        initial_dm: d0.dm,
        initial_mass: d0.m,
        absorbed_dm: absorbed,
        absorbed_over_dm_pct: 100.0 * (absorbed / d0.dm),
        final_mass,
        dry_over_total_absorbed_pct: if total > 0.0 { 100.0 * (absorbed / total) } else { 0.0 },
        audit_max_residual: result.audit_max_residual,
        integration: keep.then_some(result),
    })
}

/// Applies overrides and one sweep point, then integrates.
fn run_point(
    config: &ScenarioConfig,
    params: &ModelParams,
    integration: &IntegrationConfig,
    assignments: &[(String, f64)],
    sweep_value: f64,
    point: Vec<f64>,
) -> ScenarioRow {
    let attempt = || -> Result<ScenarioRow> {
        let mut p = *params;
        let mut sc = config.clone();
        for (path, v) in config.overrides.iter().map(|(k, v)| (k.clone(), *v)).chain(assignments.iter().cloned()) {
            set_path(&mut p, &mut sc, &path, v)?;
        }
        p.validate()?;
        let state0 = build_initial_state(&sc, &p)?;
        let result = integrate(&state0, &p, integration)?;
        summarize(sweep_value, point.clone(), &state0, &p, result, config.trajectories)
    };
    attempt().unwrap_or_else(|e| ScenarioRow::failed(sweep_value, point.clone(), &e))
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .ok()
}

/// One sweep point: first value, full point, path assignments.
type Job = (f64, Vec<f64>, Vec<(String, f64)>);

/// Runs every point of the scenario's sweep (or a single point without one).
/// Points run in parallel; rows keep the order of the sweep points. A failing
/// point is reported in its row and does not stop the others.
pub fn run_scenario(
    config: &ScenarioConfig,
    params: &ModelParams,
    integration: &IntegrationConfig,
) -> Result<ScenarioResult> {
    integration.validate()?;
    // Reject unknown paths up front rather than failing every row.
    {
        let mut p = *params;
        let mut sc = config.clone();
        for (path, v) in &config.overrides {
            set_path(&mut p, &mut sc, path, *v)?;
        }
        if let Some(axis) = &config.sweep {
            for path in &axis.paths {
                set_path(&mut p, &mut sc, path, 1.0)?;
            }
            for point in &axis.points {
                axis.assignments(point)?;
            }
        }
    }

    let (label, extra_paths, jobs): (String, Vec<String>, Vec<Job>) =
        match &config.sweep {
            None => ("point".to_string(), vec![], vec![(f64::NAN, vec![], vec![])]),
            Some(axis) => {
                let jobs = axis
                    .points
                    .iter()
                    .map(|pt| Ok((pt[0], pt.clone(), axis.assignments(pt)?)))
                    .collect::<Result<Vec<_>>>()?;
                (axis.label.clone(), axis.paths.iter().skip(1).cloned().collect(), jobs)
            }
        };

    let work = || {
        jobs.par_iter()
            .map(|(v, pt, asg)| run_point(config, params, integration, asg, *v, pt.clone()))
            .collect::<Vec<_>>()
    };
    let rows = match thread_pool() {
        Some(pool) => pool.install(work),
        None => work(),
    };
    Ok(ScenarioResult {
        name: config.name.clone(),
        axis_label: label,
        extra_paths,
        rows,
    })
}

/// Sweeps one dotted path over `values`, on top of `scenario` with its own
/// sweep removed.
pub fn sweep(
    params: &ModelParams,
    axis: &str,
    values: &[f64],
    scenario: &ScenarioConfig,
    integration: &IntegrationConfig,
) -> Result<ScenarioResult> {
    let mut sc = scenario.clone();
    sc.sweep = Some(SweepAxis::single(axis, values));
    run_scenario(&sc, params, integration)
}

/// The no-fibre 120 g bolus: 42 g dry matter (42% `A_s`, 43% `A_ns`,
/// 15% `A_nd`) and 78 g water.
pub fn baseline_scenario() -> ScenarioConfig {
    ScenarioConfig::default()
}

fn with_sweep(name: &str, description: &str, sweep: SweepAxis) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        description: description.to_string(),
        sweep: Some(sweep),
        ..ScenarioConfig::default()
    }
}

/// Names of the built-in experiments, in the order of [`builtin_scenarios`].
pub const BUILTIN_NAMES: [&str; 7] = [
    "solubilization-ratio",
    "intermediate-ratio",
    "insoluble-dose",
    "soluble-dose",
    "uniform-hydration",
    "ordered-hydration",
    "water-ratio",
];

/// The built-in experiments.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    let fibre_doses = [0.0, 2.0, 7.0, 11.0, 14.0];
    let hydration_paths = vec![
        "params.hydration.alpha".to_string(),
        "params.hydration.beta".to_string(),
        "params.hydration.gamma".to_string(),
    ];

    let solubilization = with_sweep(
        "solubilization-ratio",
        "A_s share of dry matter against A_ns, remainder A_nd",
        SweepAxis {
            label: "A_s_over_DM_pct".into(),
            paths: vec!["composition.a_s_pct".into(), "composition.a_ns_pct".into()],
            points: vec![vec![0.0, 85.0], vec![42.0, 43.0], vec![85.0, 0.0]],
        },
    );

    let mut intermediate = with_sweep(
        "intermediate-ratio",
        "B_int share of dry matter against A_s, no A_ns",
        SweepAxis {
            label: "B_int_over_DM_pct".into(),
            paths: vec!["composition.b_int_pct".into(), "composition.a_s_pct".into()],
            points: vec![vec![0.0, 85.0], vec![42.0, 43.0], vec![85.0, 0.0]],
        },
    );
    intermediate.composition.a_ns_pct = 0.0;

    let insoluble = with_sweep(
        "insoluble-dose",
        "Insoluble fibre replacing A_nd in a 120 g bolus",
        SweepAxis {
            label: "F_over_DM_pct".into(),
            paths: vec!["composition.f_insol_pct".into()],
            points: fibre_doses.iter().map(|v| vec![*v]).collect(),
        },
    );

    let soluble = with_sweep(
        "soluble-dose",
        "Soluble fibre replacing A_nd in a 120 g bolus",
        SweepAxis {
            label: "F_over_DM_pct".into(),
            paths: vec!["composition.f_sol_pct".into()],
            points: fibre_doses.iter().map(|v| vec![*v]).collect(),
        },
    );

    let uniform = with_sweep(
        "uniform-hydration",
        "alpha = beta = gamma from 1 to 4",
        SweepAxis {
            label: "alpha_beta_gamma".into(),
            paths: hydration_paths.clone(),
            points: vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
        },
    );

    let ordered = with_sweep(
        "ordered-hydration",
        "(alpha, beta, gamma) in (1,2,3), (2,2,2), (3,2,1)",
        SweepAxis {
            label: "alpha".into(),
            paths: hydration_paths,
            points: vec![
                vec![1.0, 2.0, 3.0],
                vec![2.0, 2.0, 2.0],
                vec![3.0, 2.0, 1.0],
            ],
        },
    );

    let mut water = with_sweep(
        "water-ratio",
        "42 g dry matter with 50, 60 and 66% water, no feed or secretion water",
        SweepAxis {
            label: "water_pct".into(),
            paths: vec!["water.water_pct".into()],
            points: vec![vec![50.0], vec![60.0], vec![66.0]],
        },
    );
    water.water = WaterSources {
        k_feed: 0.0,
        k_sec: 0.0,
        w_drink_g: 0.0,
        water_pct: None,
    };

    vec![
        solubilization,
        intermediate,
        insoluble,
        soluble,
        uniform,
        ordered,
        water,
    ]
}
