//! Time integration of a bolus until it leaves the intestine.
//!
//! Two schemes are available: classical fixed-step RK4, and the
//! Dormand–Prince 5(4) pair with a PI step-size controller. Both clamp
//! roundoff-level negative masses to zero; a genuinely negative mass is an
//! error for RK4 and a rejected step for the adaptive scheme. The exit event
//! `x >= L` is located inside the crossing step, starting from linear
//! interpolation and refined by re-integrating to the crossing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DigestaError, Result};
use crate::kinetics::{literal_mass_rate, rhs};
use crate::model::{compute_derived, BolusState, DerivedQuantities, ModelParams, MASS_FIELDS, STATE_DIM};

type Vector = [f64; STATE_DIM];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for the adaptive scheme (h).
    pub dt: f64,
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Give up after this much simulated time (h).
    pub t_max: f64,
    /// Record a trajectory sample every this many accepted steps.
    pub audit_every: usize,
    /// Negative masses above `-clamp_threshold` are roundoff and reset to 0.
    pub clamp_threshold: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            method: Method::Rk4,
            dt: 1e-3,
            tol_rel: 1e-8,
            tol_abs: 1e-10,
            dt_min: 1e-9,
            dt_max: 0.05,
            t_max: 24.0,
            audit_every: 100,
            clamp_threshold: 1e-12,
        }
    }
}

impl IntegrationConfig {
    pub fn rk4(dt: f64) -> Self {
        IntegrationConfig {
            method: Method::Rk4,
            dt,
            ..Default::default()
        }
    }

    pub fn adaptive(tol_rel: f64, tol_abs: f64) -> Self {
        IntegrationConfig {
            method: Method::Adaptive,
            dt: 1e-3,
            tol_rel,
            tol_abs,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(DigestaError::validation(msg))
            }
        };
        check(self.dt > 0.0 && self.dt.is_finite(), "integrator.dt must be > 0")?;
        check(self.tol_rel > 0.0, "integrator.tol_rel must be > 0")?;
        check(self.tol_abs > 0.0, "integrator.tol_abs must be > 0")?;
        check(self.dt_min > 0.0, "integrator.dt_min must be > 0")?;
        check(
            self.dt_min <= self.dt_max,
            "integrator.dt_min must be ≤ integrator.dt_max",
        )?;
        check(self.t_max > 0.0 && self.t_max.is_finite(), "integrator.t_max must be > 0")?;
        check(self.audit_every > 0, "integrator.audit_every must be > 0")?;
        check(
            self.clamp_threshold >= 0.0,
            "integrator.clamp_threshold must be ≥ 0",
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitReason {
    #[serde(rename = "reached_L")]
    ReachedL,
    #[serde(rename = "t_max")]
    TMax,
    #[serde(rename = "dehydrated")]
    Dehydrated,
    #[serde(rename = "degenerate")]
    Degenerate,
}

impl ExitReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExitReason::ReachedL => "reached_L",
            ExitReason::TMax => "t_max",
            ExitReason::Dehydrated => "dehydrated",
            ExitReason::Degenerate => "degenerate",
        }
    }
}

/// One sampled point of a trajectory with its conservation residuals
/// relative to the first sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub state: BolusState,
    pub derived: DerivedQuantities,
    /// `|M - (M0 - absorbed - absorbed water + secreted mass)| / M0`.
    pub mass_residual: f64,
    /// `|DM + absorbed - secreted - DM0| / DM0`.
    pub dry_matter_residual: f64,
}

/// Maximum relative residuals of the conservation identities over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct AuditReport {
    /// Algebraic bolus mass against initial mass plus integrated wall fluxes.
    pub mass: f64,
    /// `π r² ℓ ρ_w` against `W_tot`.
    pub volume: f64,
    /// Dry matter plus absorbed minus secreted, against its initial value.
    pub dry_matter: f64,
    /// Largest gap (g/h) between the component mass rate and the closed-form
    /// rate carrying the `M / (M - W)` prefactor. Diagnostic only.
    pub literal_mass_rate_gap: f64,
}

impl AuditReport {
    pub fn max_residual(&self) -> f64 {
        self.mass.max(self.volume).max(self.dry_matter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult {
    pub trajectory: Vec<TrajectoryRecord>,
    /// Set iff the bolus reached `x = L`.
    pub exit_time: Option<f64>,
    pub exit_reason: ExitReason,
    pub final_state: BolusState,
    pub audit: AuditReport,
    pub audit_max_residual: f64,
    pub steps: usize,
    /// Why the run stopped early, for `dehydrated` and `degenerate` exits.
    pub diagnostic: Option<String>,
}

fn eval(t: f64, y: &Vector, params: &ModelParams) -> Result<Vector> {
    Ok(rhs(&BolusState::from_array(t, y), params)?.to_array())
}

fn axpy(y: &Vector, h: f64, terms: &[(f64, &Vector)]) -> Vector {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..STATE_DIM {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Clamps roundoff negatives; returns the first mass below `-threshold`.
fn clamp_masses(y: &mut Vector, threshold: f64) -> Option<(&'static str, f64)> {
    for (i, name) in MASS_FIELDS {
        if y[i] < 0.0 {
            if y[i] < -threshold {
                return Some((name, y[i]));
            }
            y[i] = 0.0;
        }
    }
    None
}

fn rk4_raw(t: f64, y: &Vector, params: &ModelParams, dt: f64) -> Result<Vector> {
    let k1 = eval(t, y, params)?;
    let k2 = eval(t + 0.5 * dt, &axpy(y, dt, &[(0.5, &k1)]), params)?;
    let k3 = eval(t + 0.5 * dt, &axpy(y, dt, &[(0.5, &k2)]), params)?;
    let k4 = eval(t + dt, &axpy(y, dt, &[(1.0, &k3)]), params)?;
    Ok(axpy(
        y,
        dt,
        &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    ))
}

/// One classical RK4 step with the default clamp threshold.
pub fn step(state: &BolusState, params: &ModelParams, dt: f64) -> Result<BolusState> {
    step_with(state, params, dt, IntegrationConfig::default().clamp_threshold)
}

/// One classical RK4 step; masses in `(-clamp_threshold, 0)` are reset to 0.
pub fn step_with(
    state: &BolusState,
    params: &ModelParams,
    dt: f64,
    clamp_threshold: f64,
) -> Result<BolusState> {
    if !(dt > 0.0) {
        return Err(DigestaError::validation("dt must be > 0"));
    }
    let mut y = rk4_raw(state.t, &state.to_array(), params, dt)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(DigestaError::DegenerateBolus(format!(
            "non-finite state after step to t = {}; dt = {dt} is unstable here",
            state.t + dt
        )));
    }
    if let Some((field, value)) = clamp_masses(&mut y, clamp_threshold) {
        return Err(DigestaError::NegativeMass {
            field,
            value,
            t: state.t + dt,
        });
    }
    Ok(BolusState::from_array(state.t + dt, &y))
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct DopriStep {
    y: Vector,
    k_last: Vector,
    err: f64,
}

fn dopri_attempt(
    t: f64,
    y: &Vector,
    k1: &Vector,
    h: f64,
    params: &ModelParams,
    cfg: &IntegrationConfig,
) -> Result<DopriStep> {
    let k2 = eval(t + C2 * h, &axpy(y, h, &[(A21, k1)]), params)?;
    let k3 = eval(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]), params)?;
    let k4 = eval(
        t + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
        params,
    )?;
    let k5 = eval(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        params,
    )?;
    let k6 = eval(
        t + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        params,
    )?;
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = eval(t + h, &y_new, params)?;

    let mut sum = 0.0;
    for i in 0..STATE_DIM {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = cfg.tol_abs + cfg.tol_rel * y[i].abs().max(y_new[i].abs());
        sum += (e / scale).powi(2);
    }
    Ok(DopriStep {
        y: y_new,
        k_last: k7,
        err: (sum / STATE_DIM as f64).sqrt(),
    })
}

/// Bookkeeping for per-record conservation residuals.
struct Baseline {
    m0: f64,
    dm0: f64,
    absorbed_dm0: f64,
    absorbed_water0: f64,
    secreted0: f64,
}

impl Baseline {
    fn new(state: &BolusState, derived: &DerivedQuantities) -> Self {
        Baseline {
            m0: derived.m,
            dm0: derived.dm,
            absorbed_dm0: state.absorbed_dm,
            absorbed_water0: state.absorbed_water,
            secreted0: state.secreted_dm,
        }
    }

    fn residuals(&self, s: &BolusState, d: &DerivedQuantities, params: &ModelParams) -> (f64, f64) {
        let absorbed = s.absorbed_dm - self.absorbed_dm0;
        let absorbed_water = s.absorbed_water - self.absorbed_water0;
        let secreted = s.secreted_dm - self.secreted0;
        let expected_m =
            self.m0 - absorbed - absorbed_water + (1.0 + params.secretion_hydration()) * secreted;
        let mass = (d.m - expected_m).abs() / self.m0.abs().max(f64::MIN_POSITIVE);
        let dry_gap = (d.dm + absorbed - secreted - self.dm0).abs();
        let dry = if self.dm0 > 0.0 {
            dry_gap / self.dm0
        } else {
            dry_gap
        };
        (mass, dry)
    }

    fn record(&self, s: BolusState, params: &ModelParams) -> Result<TrajectoryRecord> {
        let derived = compute_derived(&s, params)?;
        let (mass_residual, dry_matter_residual) = self.residuals(&s, &derived, params);
        Ok(TrajectoryRecord {
            state: s,
            derived,
            mass_residual,
            dry_matter_residual,
        })
    }
}

/// Finds the sub-step `s` of the crossing step at which `x = length`.
///
/// The first guess is the linear interpolation of `x` across the step; it is
/// refined by regula falsi, re-integrating from the pre-crossing state with
/// `advance(s)`. If re-integration fails the linearly interpolated state is
/// used. Returns the sub-step length and the state there, with `x = length`.
fn locate_exit(
    y: &Vector,
    y_new: &Vector,
    length: f64,
    h: f64,
    clamp_threshold: f64,
    advance: impl Fn(f64) -> Option<Vector>,
) -> (f64, Vector) {
    let linear = |theta: f64| {
        let mut out = [0.0; STATE_DIM];
        for i in 0..STATE_DIM {
            out[i] = y[i] + theta * (y_new[i] - y[i]);
        }
        out[0] = length;
        (theta * h, out)
    };
    let (x_old, x_new) = (y[0], y_new[0]);
    if !(x_new > x_old) {
        return linear(1.0);
    }
    let theta0 = ((length - x_old) / (x_new - x_old)).clamp(0.0, 1.0);
    let (mut lo, mut x_lo, mut hi, mut x_hi) = (0.0, x_old, h, x_new);
    let mut s = theta0 * h;
    for _ in 0..60 {
        let Some(mut ys) = advance(s) else {
            return linear(theta0);
        };
        let gap = ys[0] - length;
        if gap.abs() <= 1e-12 * length || hi - lo <= 1e-15 * h {
            ys[0] = length;
            if clamp_masses(&mut ys, clamp_threshold).is_some() {
                return linear(theta0);
            }
            return (s, ys);
        }
        if gap < 0.0 {
            lo = s;
            x_lo = ys[0];
        } else {
            hi = s;
            x_hi = ys[0];
        }
        s = lo + (hi - lo) * ((length - x_lo) / (x_hi - x_lo)).clamp(0.0, 1.0);
        // Bisect when regula falsi stalls at an end of the bracket.
        if s - lo < 0.01 * (hi - lo) || hi - s < 0.01 * (hi - lo) {
            s = 0.5 * (lo + hi);
        }
    }
    linear(theta0)
}

enum Halt {
    Dehydrated(String),
    Degenerate(String),
}

fn classify(err: DigestaError) -> std::result::Result<Halt, DigestaError> {
    match err {
        e @ DigestaError::ViscosityBlowup { .. } => Ok(Halt::Dehydrated(e.to_string())),
        e @ DigestaError::DegenerateBolus(_) => Ok(Halt::Degenerate(e.to_string())),
        other => Err(other),
    }
}

/// Integrates from `state0` until the bolus reaches `x = L`, `t_max` elapses,
/// or the bolus dehydrates or degenerates.
pub fn integrate(
    state0: &BolusState,
    params: &ModelParams,
    config: &IntegrationConfig,
) -> Result<IntegrationResult> {
    config.validate()?;
    params.validate()?;
    state0.validate()?;
    let length = params.geometry.length;
    if !(state0.x < length) {
        return Err(DigestaError::validation(format!(
            "initial position {} must lie in [0, {length})",
            state0.x
        )));
    }
    let d0 = compute_derived(state0, params)?;
    let baseline = Baseline::new(state0, &d0);

    let t_end = state0.t + config.t_max;
    let mut trajectory = vec![baseline.record(*state0, params)?];
    let mut t = state0.t;
    let mut y = state0.to_array();
    let mut steps = 0usize;
    let mut exit_time = None;
    let mut halt: Option<Halt> = None;

    // Adaptive controller state.
    let mut h = config.dt.min(config.dt_max).max(config.dt_min);
    let mut err_prev = 1.0_f64;
    let mut k1: Option<Vector> = None;

    loop {
        if t >= t_end - 1e-12 * t_end.abs().max(1.0) {
            break;
        }
        let (y_new, h_taken) = match config.method {
            Method::Rk4 => {
                let h = config.dt.min(t_end - t);
                let state = BolusState::from_array(t, &y);
                match step_with(&state, params, h, config.clamp_threshold) {
                    Ok(s) => (s.to_array(), h),
                    Err(e) => {
                        halt = Some(classify(e)?);
                        break;
                    }
                }
            }
            Method::Adaptive => {
                let k_first = match k1 {
                    Some(k) => k,
                    None => match eval(t, &y, params) {
                        Ok(k) => k,
                        Err(e) => {
                            halt = Some(classify(e)?);
                            break;
                        }
                    },
                };
                let mut h_try = h.min(t_end - t);
                let accepted = loop {
                    let attempt = dopri_attempt(t, &y, &k_first, h_try, params, config);
                    let outcome = match attempt {
                        Ok(mut st) => {
                            if st.err <= 1.0 && clamp_masses(&mut st.y, config.clamp_threshold).is_none() {
                                Ok(st)
                            } else {
                                Err(None)
                            }
                        }
                        Err(e) => Err(Some(e)),
                    };
                    match outcome {
                        Ok(st) => break Ok(st),
                        Err(cause) => {
                            let shrink = match &cause {
                                None => 0.9,
                                Some(_) => 0.5,
                            };
                            h_try *= shrink;
                            if h_try < config.dt_min {
                                break Err(cause.unwrap_or(DigestaError::StepUnderflow { t, dt: h_try }));
                            }
                        }
                    }
                };
                match accepted {
                    Ok(st) => {
                        let err = st.err.max(1e-10);
                        let fac = (0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
                        err_prev = err;
                        h = (h_try * fac).clamp(config.dt_min, config.dt_max);
                        k1 = Some(st.k_last);
                        (st.y, h_try)
                    }
                    Err(e) => {
                        halt = Some(classify(e)?);
                        break;
                    }
                }
            }
        };

        steps += 1;
        let x_new = y_new[0];
        if x_new >= length {
            let k_start = match config.method {
                Method::Rk4 => None,
                Method::Adaptive => eval(t, &y, params).ok(),
            };
            let advance = |s: f64| match (config.method, &k_start) {
                (Method::Rk4, _) => rk4_raw(t, &y, params, s).ok(),
                (Method::Adaptive, Some(k)) => {
                    dopri_attempt(t, &y, k, s, params, config).ok().map(|st| st.y)
                }
                (Method::Adaptive, None) => None,
            };
            let (sub, y_exit) =
                locate_exit(&y, &y_new, length, h_taken, config.clamp_threshold, advance);
            let t_exit = t + sub;
            let rec = baseline.record(BolusState::from_array(t_exit, &y_exit), params)?;
            if trajectory.last().is_some_and(|r| r.state.t >= t_exit) {
                trajectory.pop();
            }
            trajectory.push(rec);
            exit_time = Some(t_exit);
            break;
        }

        t += h_taken;
        y = y_new;
        if steps.is_multiple_of(config.audit_every) {
            trajectory.push(baseline.record(BolusState::from_array(t, &y), params)?);
        }
    }

    let last_t = trajectory.last().map(|r| r.state.t).unwrap_or(t);
    if exit_time.is_none() && t > last_t {
        let s = BolusState::from_array(t, &y);
        match baseline.record(s, params) {
            Ok(rec) => trajectory.push(rec),
            Err(e) => {
                if halt.is_none() {
                    halt = Some(classify(e)?);
                }
            }
        }
    }

    let (exit_reason, diagnostic) = match (exit_time, halt) {
        (Some(_), _) => (ExitReason::ReachedL, None),
        (None, Some(Halt::Dehydrated(msg))) => (ExitReason::Dehydrated, Some(msg)),
        (None, Some(Halt::Degenerate(msg))) => (ExitReason::Degenerate, Some(msg)),
        (None, None) => (ExitReason::TMax, None),
    };
    let final_state = trajectory.last().map(|r| r.state).unwrap_or(*state0);
    let audit = conservation_audit(&trajectory, params);
    Ok(IntegrationResult {
        exit_time,
        exit_reason,
        final_state,
        audit_max_residual: audit.max_residual(),
        audit,
        steps,
        diagnostic,
        trajectory,
    })
}

/// Recomputes every conservation identity along `trajectory` from the raw
/// states and reports the largest relative residual of each.
pub fn conservation_audit(trajectory: &[TrajectoryRecord], params: &ModelParams) -> AuditReport {
    let Some(first) = trajectory.first() else {
        return AuditReport::default();
    };
    let Ok(d0) = compute_derived(&first.state, params) else {
        return AuditReport::default();
    };
    let baseline = Baseline::new(&first.state, &d0);
    let mut report = AuditReport::default();
    for rec in trajectory {
        let s = &rec.state;
        let Ok(d) = compute_derived(s, params) else {
            continue;
        };
        let (mass, dry) = baseline.residuals(s, &d, params);
        report.mass = report.mass.max(mass);
        report.dry_matter = report.dry_matter.max(dry);
        let geometric_volume = PI * d.r * d.r * params.geometry.ell * crate::model::RHO_W;
        if d.w_tot > 0.0 {
            report.volume = report.volume.max((geometric_volume - d.w_tot).abs() / d.w_tot);
        }
        if let Ok(f) = rhs(s, params) {
            let gap = (f.mass_rate(params) - literal_mass_rate(s, &d, params)).abs();
            report.literal_mass_rate_gap = report.literal_mass_rate_gap.max(gap);
        }
    }
    report
}

/// First sampled time at which `|W/M - target| <= tol`, if any.
pub fn time_to_water_ratio(trajectory: &[TrajectoryRecord], target: f64, tol: f64) -> Option<f64> {
    trajectory
        .iter()
        .find(|r| (r.derived.w_ratio - target).abs() <= tol)
        .map(|r| r.state.t)
}
