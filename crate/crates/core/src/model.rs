//! Bolus state, model parameters and the algebraic quantities derived from them.
//!
//! Every substrate pool is carried as dry matter; the water bound to a pool is
//! a fixed multiple of its dry mass and is never stored. Total water, mass,
//! volume, radii and concentrations are recomputed from the state on demand
//! by [`compute_derived`].
//!
//! Units: grams, hours, and the dimensionless intestinal length (`L = 17`).
//! Water density is 1, so a volume is numerically a mass of water.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DigestaError, Result};

/// Water density. Volumes are expressed in grams of water.
pub const RHO_W: f64 = 1.0;

/// Number of integrated components in a [`BolusState`] (time excluded).
pub const STATE_DIM: usize = 14;

/// Full ODE state of a bolus.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BolusState {
    /// Elapsed time (h).
    pub t: f64,
    /// Position along the intestine.
    pub x: f64,
    /// Velocity dx/dt.
    pub v: f64,
    /// Non-degradable dry substrate (g). Inert.
    pub a_nd: f64,
    /// Non-solubilized dry substrate (g).
    pub a_ns: f64,
    /// Solubilized dry substrate (g).
    pub a_s_dm: f64,
    /// Intermediate dry substrate (g).
    pub b_int_dm: f64,
    /// Absorbable dry nutrients (g).
    pub b_abs_dm: f64,
    /// Soluble dietary fibre, dry (g).
    pub f_sol_dm: f64,
    /// Insoluble dietary fibre, dry (g). Never consumed.
    pub f_insol_dm: f64,
    /// Available (unbound) water (g).
    pub w: f64,
    /// Exogenous enzyme level.
    pub e_exo: f64,
    /// Cumulative dry nutrients absorbed through the wall (g).
    pub absorbed_dm: f64,
    /// Cumulative net water crossing the wall (g); negative means net secretion.
    pub absorbed_water: f64,
    /// Cumulative dry matter added by pancreatic/biliary secretions (g).
    pub secreted_dm: f64,
}

/// Names of the state fields that must stay nonnegative, in array order.
pub(crate) const MASS_FIELDS: [(usize, &str); 9] = [
    (2, "a_nd"),
    (3, "a_ns"),
    (4, "a_s_dm"),
    (5, "b_int_dm"),
    (6, "b_abs_dm"),
    (7, "f_sol_dm"),
    (8, "f_insol_dm"),
    (9, "w"),
    (10, "e_exo"),
];

impl BolusState {
    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.x,
            self.v,
            self.a_nd,
            self.a_ns,
            self.a_s_dm,
            self.b_int_dm,
            self.b_abs_dm,
            self.f_sol_dm,
            self.f_insol_dm,
            self.w,
            self.e_exo,
            self.absorbed_dm,
            self.absorbed_water,
            self.secreted_dm,
        ]
    }

    pub fn from_array(t: f64, y: &[f64; STATE_DIM]) -> Self {
        BolusState {
            t,
            x: y[0],
            v: y[1],
            a_nd: y[2],
            a_ns: y[3],
            a_s_dm: y[4],
            b_int_dm: y[5],
            b_abs_dm: y[6],
            f_sol_dm: y[7],
            f_insol_dm: y[8],
            w: y[9],
            e_exo: y[10],
            absorbed_dm: y[11],
            absorbed_water: y[12],
            secreted_dm: y[13],
        }
    }

    /// Sum of all dry-matter pools.
    pub fn dry_matter(&self) -> f64 {
        self.a_nd
            + self.a_ns
            + self.a_s_dm
            + self.b_int_dm
            + self.b_abs_dm
            + self.f_sol_dm
            + self.f_insol_dm
    }

    /// Checks finiteness and nonnegativity of every mass field.
    pub fn validate(&self) -> Result<()> {
        let y = self.to_array();
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(DigestaError::validation(format!(
                "state component {i} is not finite"
            )));
        }
        for (i, name) in MASS_FIELDS {
            if y[i] < 0.0 {
                return Err(DigestaError::validation(format!(
                    "state.{name} must be ≥ 0 (got {})",
                    y[i]
                )));
            }
        }
        if self.x < 0.0 {
            return Err(DigestaError::validation(format!(
                "state.x must be ≥ 0 (got {})",
                self.x
            )));
        }
        Ok(())
    }
}

/// Water-association ratios: grams of bound water per gram of dry matter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hydration {
    /// Solubilized substrate `A_s`.
    pub alpha: f64,
    /// Intermediate substrate `B_int`.
    pub beta: f64,
    /// Absorbable nutrients `B_abs`.
    pub gamma: f64,
    /// Soluble fibre.
    pub lambda_s: f64,
    /// Insoluble fibre.
    pub lambda_i: f64,
}

/// Smooth plateau along the intestine: a logistic rise at `onset` times a
/// logistic fall at `offset`, scaled so the value at the plateau midpoint is
/// exactly `peak`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivityProfile {
    pub peak: f64,
    pub onset: f64,
    pub onset_width: f64,
    pub offset: f64,
    pub offset_width: f64,
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl ActivityProfile {
    fn ramp(&self, x: f64) -> f64 {
        logistic((x - self.onset) / self.onset_width) * logistic((self.offset - x) / self.offset_width)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.onset + self.offset)
    }

    pub fn at(&self, x: f64) -> f64 {
        if self.peak == 0.0 {
            return 0.0;
        }
        self.peak * self.ramp(x) / self.ramp(self.midpoint())
    }

    fn validate(&self, name: &str) -> Result<()> {
        nonneg(&format!("{name}.peak"), self.peak)?;
        positive(&format!("{name}.onset_width"), self.onset_width)?;
        positive(&format!("{name}.offset_width"), self.offset_width)?;
        if !(self.onset.is_finite() && self.offset.is_finite()) || self.onset >= self.offset {
            return Err(DigestaError::validation(format!(
                "{name}.onset must be < {name}.offset"
            )));
        }
        Ok(())
    }
}

/// Volumic degradation by pancreatic enzymes and soluble-fibre hydrolysis by
/// exogenous enzymes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Volumic {
    /// Position-dependent volumic rate `k_vol(x)`.
    pub k_vol: ActivityProfile,
    /// Soluble-fibre hydrolysis rate.
    pub k_s: f64,
    /// Exogenous enzyme decay rate (1/h).
    pub k_e: f64,
    /// Exogenous enzyme activity along the intestine.
    pub ph: ActivityProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Surfacic {
    /// Brush-border degradation rate of `A_s`.
    pub k_surf: f64,
    /// Brush-border degradation rate of `B_int`.
    pub k_surf_tilde: f64,
}

/// Relaxation of `A_ns` / `A_s` toward `A_s = μ([W]) A_ns`, with
/// `μ([W]) = mu_max [W] / ([W] + k_mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Equilibrium {
    pub k_equi: f64,
    pub mu_max: f64,
    pub k_mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Absorption {
    pub k_abs: f64,
}

/// Wall exchange driving available water toward `w_target` of the bolus mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaterExchange {
    pub k_w: f64,
    pub w_target: f64,
}

/// Averaged peristaltic transport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Transport {
    /// Mean pulse effect per unit time.
    pub tau: f64,
    /// Peristaltic wave celerity.
    pub c: f64,
    pub c0: f64,
    /// Radius sensitivity of the forcing.
    pub c1: f64,
    pub a: f64,
    /// Decay of forcing with distance from the pylorus.
    pub b: f64,
    /// Wall-friction coefficient, divided by `[W]`.
    pub k_visco: f64,
    /// Viscosity guard on `[W]`.
    pub eps_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    /// Bolus length.
    pub ell: f64,
    /// Intestine length; the bolus exits at `x = length`.
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecretionTarget {
    BInt,
    AS,
}

/// Pancreatic/biliary secretions as a constant dry-matter rate inside a
/// position window. Secreted nutrients arrive with their own bound water, so
/// available water is untouched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Secretion {
    /// Dry-matter rate (g/h); 0 disables secretions.
    pub rate: f64,
    pub x_start: f64,
    pub x_end: f64,
    pub target: SecretionTarget,
}

impl Secretion {
    pub fn rate_at(&self, x: f64) -> f64 {
        if self.rate > 0.0 && x >= self.x_start && x <= self.x_end {
            self.rate
        } else {
            0.0
        }
    }
}

/// All model constants.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub hydration: Hydration,
    pub volumic: Volumic,
    pub surfacic: Surfacic,
    pub equilibrium: Equilibrium,
    pub absorption: Absorption,
    pub water: WaterExchange,
    pub transport: Transport,
    pub geometry: Geometry,
    pub secretion: Secretion,
}

// Calibrated defaults. The no-fibre 120 g bolus exits at x = 17 after about
// 4.7 h with about 55% of its dry matter absorbed; see `examples/calibrate.rs`.
impl Default for Hydration {
    fn default() -> Self {
        Hydration {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            lambda_s: 7.643,
            lambda_i: 4.67,
        }
    }
}

impl Default for ActivityProfile {
    fn default() -> Self {
        ActivityProfile {
            peak: 1.0,
            onset: 1.0,
            onset_width: 0.2,
            offset: 13.6,
            offset_width: 0.8,
        }
    }
}

impl Default for Volumic {
    fn default() -> Self {
        Volumic {
            k_vol: ActivityProfile {
                peak: 35.88,
                ..ActivityProfile::default()
            },
            k_s: 0.07103,
            k_e: 0.01184,
            ph: ActivityProfile::default(),
        }
    }
}

impl Default for Surfacic {
    fn default() -> Self {
        Surfacic {
            k_surf: 0.1047,
            k_surf_tilde: 1.846,
        }
    }
}

impl Default for Equilibrium {
    fn default() -> Self {
        Equilibrium {
            k_equi: 0.6645,
            mu_max: 95.43,
            k_mu: 3.387,
        }
    }
}

impl Default for Absorption {
    fn default() -> Self {
        Absorption { k_abs: 11.77 }
    }
}

impl Default for WaterExchange {
    fn default() -> Self {
        WaterExchange {
            k_w: 0.8783,
            w_target: 0.1,
        }
    }
}

impl Default for Transport {
    fn default() -> Self {
        Transport {
            tau: 1.983,
            c: 59.81,
            c0: 0.0,
            c1: 0.2959,
            a: 1.125,
            b: 0.0133,
            k_visco: 0.03492,
            eps_w: 1e-6,
        }
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            ell: 1.0,
            length: 17.0,
        }
    }
}

impl Default for Secretion {
    fn default() -> Self {
        Secretion {
            rate: 0.0,
            x_start: 1.0,
            x_end: 3.0,
            target: SecretionTarget::BInt,
        }
    }
}


fn nonneg(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(DigestaError::validation(format!(
            "{name} must be ≥ 0 (got {value})"
        )))
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DigestaError::validation(format!(
            "{name} must be > 0 (got {value})"
        )))
    }
}

impl ModelParams {
    /// Enforces the sign and range invariants on every constant.
    pub fn validate(&self) -> Result<()> {
        let h = &self.hydration;
        nonneg("alpha", h.alpha)?;
        nonneg("beta", h.beta)?;
        nonneg("gamma", h.gamma)?;
        nonneg("lambda_s", h.lambda_s)?;
        nonneg("lambda_i", h.lambda_i)?;

        self.volumic.k_vol.validate("k_vol")?;
        self.volumic.ph.validate("ph")?;
        nonneg("k_s", self.volumic.k_s)?;
        nonneg("k_e", self.volumic.k_e)?;
        nonneg("k_surf", self.surfacic.k_surf)?;
        nonneg("k_surf_tilde", self.surfacic.k_surf_tilde)?;
        nonneg("k_equi", self.equilibrium.k_equi)?;
        nonneg("mu_max", self.equilibrium.mu_max)?;
        positive("k_mu", self.equilibrium.k_mu)?;
        nonneg("k_abs", self.absorption.k_abs)?;
        nonneg("k_w", self.water.k_w)?;
        let wt = self.water.w_target;
        if !(wt > 0.0 && wt < 1.0) {
            return Err(DigestaError::validation(format!(
                "w_target must lie in (0, 1) (got {wt})"
            )));
        }

        let tr = &self.transport;
        nonneg("tau", tr.tau)?;
        positive("c", tr.c)?;
        nonneg("c0", tr.c0)?;
        nonneg("c1", tr.c1)?;
        positive("a", tr.a)?;
        nonneg("b", tr.b)?;
        nonneg("k_visco", tr.k_visco)?;
        positive("eps_w", tr.eps_w)?;

        positive("ell", self.geometry.ell)?;
        positive("length", self.geometry.length)?;

        let s = &self.secretion;
        nonneg("secretion.rate", s.rate)?;
        if s.x_start > s.x_end {
            return Err(DigestaError::validation(
                "secretion.x_start must be ≤ secretion.x_end",
            ));
        }

        let grid: Vec<f64> = (0..100).map(|i| mu(i as f64 / 99.0, self)).collect();
        if grid.windows(2).any(|p| p[1] < p[0]) {
            return Err(DigestaError::validation("mu must be nondecreasing on [0, 1]"));
        }
        Ok(())
    }

    /// Bound-water ratio of the pool receiving secretions.
    pub fn secretion_hydration(&self) -> f64 {
        match self.secretion.target {
            SecretionTarget::BInt => self.hydration.beta,
            SecretionTarget::AS => self.hydration.alpha,
        }
    }
}

/// Algebraic closure of a state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DerivedQuantities {
    pub w_s: f64,
    pub w_int: f64,
    pub w_abs: f64,
    pub w_sol: f64,
    pub w_insol: f64,
    pub w_tot: f64,
    pub dm: f64,
    pub m: f64,
    pub v: f64,
    pub v_app: f64,
    pub r: f64,
    pub r_sol: f64,
    pub s: f64,
    pub s_sol: f64,
    pub conc_a_s: f64,
    pub conc_b_int: f64,
    pub conc_b_abs: f64,
    pub conc_a_ns: f64,
    pub conc_w: f64,
    pub conc_a_nd: f64,
    /// `W / M`, the ratio driven toward `w_target` by wall exchange.
    pub w_ratio: f64,
    /// `M - F_insol`, the mass reachable by substrates and enzymes.
    pub reachable_mass: f64,
}

/// Bound waters, totals, geometry and apparent concentrations of `state`.
pub fn compute_derived(state: &BolusState, params: &ModelParams) -> Result<DerivedQuantities> {
    let h = &params.hydration;
    let ell = params.geometry.ell;

    let w_s = h.alpha * state.a_s_dm;
    let w_int = h.beta * state.b_int_dm;
    let w_abs = h.gamma * state.b_abs_dm;
    let w_sol = h.lambda_s * state.f_sol_dm;
    let w_insol = h.lambda_i * state.f_insol_dm;
    let w_tot = state.w + w_s + w_int + w_abs + w_sol + w_insol;
    let dm = state.dry_matter();
    let m = dm + w_tot;

    let reachable_mass = m - (state.f_insol_dm + w_insol);
    if !(reachable_mass > 0.0) {
        return Err(DigestaError::DegenerateBolus(format!(
            "M - F_insol = {reachable_mass:.6e} must be > 0"
        )));
    }
    let effective_water = w_tot - w_sol;
    if !(effective_water >= 0.0) {
        return Err(DigestaError::DegenerateBolus(format!(
            "W_tot - W_sol = {effective_water:.6e} must be ≥ 0"
        )));
    }

    let v = w_tot / RHO_W;
    let r = (v.max(0.0) / (PI * ell)).sqrt();
    let r_sol = (effective_water / (PI * ell)).sqrt();

    Ok(DerivedQuantities {
        w_s,
        w_int,
        w_abs,
        w_sol,
        w_insol,
        w_tot,
        dm,
        m,
        v,
        v_app: w_tot - w_insol,
        r,
        r_sol,
        s: 2.0 * PI * r * ell,
        s_sol: 2.0 * PI * r_sol * ell,
        conc_a_s: state.a_s_dm / reachable_mass,
        conc_b_int: state.b_int_dm / reachable_mass,
        conc_b_abs: state.b_abs_dm / reachable_mass,
        conc_a_ns: state.a_ns / reachable_mass,
        conc_w: state.w / reachable_mass,
        conc_a_nd: state.a_nd / reachable_mass,
        w_ratio: state.w / m,
        reachable_mass,
    })
}

/// Solubilization equilibrium ratio `μ([W])`, saturating in available water.
pub fn mu(conc_w: f64, params: &ModelParams) -> f64 {
    let eq = &params.equilibrium;
    let c = conc_w.max(0.0);
    eq.mu_max * c / (c + eq.k_mu)
}

/// Volumic degradation rate at position `x`.
pub fn k_vol_at(x: f64, params: &ModelParams) -> f64 {
    params.volumic.k_vol.at(x)
}

/// Exogenous enzyme activity at position `x`.
pub fn ph_at(x: f64, params: &ModelParams) -> f64 {
    params.volumic.ph.at(x)
}
