//! Flux terms of the digestion ODE system and their superposition.
//!
//! Each process contributes a [`FluxVector`]; [`rhs`] sums them together with
//! the transport equation. Reactions move dry matter between pools and
//! release or consume available water according to the hydration ratios of
//! the pools involved, so the total mass of a closed bolus is conserved term
//! by term.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};

use crate::error::{DigestaError, Result};
use crate::model::{
    compute_derived, k_vol_at, mu, ph_at, BolusState, DerivedQuantities, ModelParams,
    SecretionTarget, STATE_DIM,
};

/// Time derivative of every integrated [`BolusState`] component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxVector {
    pub x: f64,
    pub v: f64,
    pub a_nd: f64,
    pub a_ns: f64,
    pub a_s_dm: f64,
    pub b_int_dm: f64,
    pub b_abs_dm: f64,
    pub f_sol_dm: f64,
    pub f_insol_dm: f64,
    pub w: f64,
    pub e_exo: f64,
    pub absorbed_dm: f64,
    pub absorbed_water: f64,
    pub secreted_dm: f64,
}

impl FluxVector {
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

    /// Rate of change of total dry matter held in the bolus.
    pub fn dry_matter_rate(&self) -> f64 {
        self.a_nd
            + self.a_ns
            + self.a_s_dm
            + self.b_int_dm
            + self.b_abs_dm
            + self.f_sol_dm
            + self.f_insol_dm
    }

    /// Rate of change of total water (available plus bound).
    pub fn total_water_rate(&self, params: &ModelParams) -> f64 {
        let h = &params.hydration;
        self.w
            + h.alpha * self.a_s_dm
            + h.beta * self.b_int_dm
            + h.gamma * self.b_abs_dm
            + h.lambda_s * self.f_sol_dm
            + h.lambda_i * self.f_insol_dm
    }

    /// Rate of change of bolus mass, `dM/dt = dDM/dt + dW_tot/dt`.
    pub fn mass_rate(&self, params: &ModelParams) -> f64 {
        self.dry_matter_rate() + self.total_water_rate(params)
    }
}

impl Add for FluxVector {
    type Output = FluxVector;

    fn add(self, o: FluxVector) -> FluxVector {
        let a = self.to_array();
        let b = o.to_array();
        let mut out = [0.0; STATE_DIM];
        for i in 0..STATE_DIM {
            out[i] = a[i] + b[i];
        }
        from_array(&out)
    }
}

impl AddAssign for FluxVector {
    fn add_assign(&mut self, o: FluxVector) {
        *self = *self + o;
    }
}

impl Mul<f64> for FluxVector {
    type Output = FluxVector;

    fn mul(self, k: f64) -> FluxVector {
        from_array(&self.to_array().map(|v| v * k))
    }
}

impl Sum for FluxVector {
    fn sum<I: Iterator<Item = FluxVector>>(iter: I) -> FluxVector {
        iter.fold(FluxVector::default(), |acc, f| acc + f)
    }
}

fn from_array(y: &[f64; STATE_DIM]) -> FluxVector {
    let s = BolusState::from_array(0.0, y);
    FluxVector {
        x: s.x,
        v: s.v,
        a_nd: s.a_nd,
        a_ns: s.a_ns,
        a_s_dm: s.a_s_dm,
        b_int_dm: s.b_int_dm,
        b_abs_dm: s.b_abs_dm,
        f_sol_dm: s.f_sol_dm,
        f_insol_dm: s.f_insol_dm,
        w: s.w,
        e_exo: s.e_exo,
        absorbed_dm: s.absorbed_dm,
        absorbed_water: s.absorbed_water,
        secreted_dm: s.secreted_dm,
    }
}

/// The multiplicative forcing factor `τ (1 - v/c)`; zero at wave celerity.
pub fn forcing_factor(v: f64, params: &ModelParams) -> f64 {
    params.transport.tau * (1.0 - v / params.transport.c)
}

/// Averaged peristaltic acceleration:
/// `τ (1 - v/c) (c0 + c1 r_sol) / (a + b x) - (K_visco / [W]) v`.
pub fn transport_accel(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> Result<f64> {
    let tr = &params.transport;
    if !(derived.conc_w > tr.eps_w) {
        return Err(DigestaError::ViscosityBlowup {
            conc_w: derived.conc_w,
            eps_w: tr.eps_w,
        });
    }
    let push = forcing_factor(state.v, params) * (tr.c0 + tr.c1 * derived.r_sol)
        / (tr.a + tr.b * state.x);
    let friction = tr.k_visco / derived.conc_w * state.v;
    Ok(push - friction)
}

/// Degradation of `A_s` into `B_int` by pancreatic enzymes inside the bolus.
pub fn volumic_fluxes(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> FluxVector {
    let h = &params.hydration;
    let rate = k_vol_at(state.x, params) * derived.conc_a_s * derived.v_app;
    FluxVector {
        a_s_dm: -rate,
        b_int_dm: rate,
        w: (h.alpha - h.beta) * rate,
        ..Default::default()
    }
}

/// Hydrolysis of soluble fibre into `B_int` by exogenous enzymes.
pub fn fibre_hydrolysis_fluxes(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> FluxVector {
    let h = &params.hydration;
    let conc_f_sol = state.f_sol_dm / derived.reachable_mass;
    let rate =
        params.volumic.k_s * state.e_exo * ph_at(state.x, params) * conc_f_sol * derived.v_app;
    FluxVector {
        f_sol_dm: -rate,
        b_int_dm: rate,
        w: (h.lambda_s - h.beta) * rate,
        ..Default::default()
    }
}

/// Brush-border degradation of `A_s` and `B_int` into `B_abs` at the wall.
///
/// Rates use the concentrations of the hydrated species, `(1 + α) A_s^dm` and
/// `(1 + β) B_int^dm`, over the reachable mass.
pub fn surfacic_fluxes(
    _state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> FluxVector {
    let h = &params.hydration;
    let sf = &params.surfacic;
    let contact = derived.conc_w * derived.s_sol;
    let conc_a_s = (1.0 + h.alpha) * derived.conc_a_s;
    let conc_b_int = (1.0 + h.beta) * derived.conc_b_int;
    let from_a_s = sf.k_surf * conc_a_s * contact;
    let from_b_int = sf.k_surf_tilde * conc_b_int * contact;
    FluxVector {
        a_s_dm: -from_a_s,
        b_int_dm: -from_b_int,
        b_abs_dm: from_a_s + from_b_int,
        w: (h.alpha - h.gamma) * from_a_s + (h.beta - h.gamma) * from_b_int,
        ..Default::default()
    }
}

/// Net solubilization rate `k_equi (μ([W]) A_ns - A_s)`, with `A_s` hydrated.
pub fn solubilization_rate(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> f64 {
    let hydrated_a_s = (1.0 + params.hydration.alpha) * state.a_s_dm;
    params.equilibrium.k_equi * (mu(derived.conc_w, params) * state.a_ns - hydrated_a_s)
}

/// Reversible solubilization `A_ns <-> A_s`. Dissolving dry matter binds `α`
/// grams of available water per gram; precipitation releases it.
pub fn equilibrium_fluxes(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> FluxVector {
    let delta = solubilization_rate(state, derived, params);
    FluxVector {
        a_ns: -delta,
        a_s_dm: delta,
        w: -params.hydration.alpha * delta,
        ..Default::default()
    }
}

/// Wall absorption of `B_abs`; the bound water stays behind as available water.
pub fn absorption_fluxes(
    _state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> FluxVector {
    let rate = params.absorption.k_abs * derived.conc_b_abs * derived.s_sol;
    FluxVector {
        b_abs_dm: -rate,
        w: params.hydration.gamma * rate,
        absorbed_dm: rate,
        ..Default::default()
    }
}

/// Wall exchange of available water toward `W = w_target M`.
pub fn water_relaxation_flux(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> FluxVector {
    let q = params.water.k_w * (state.w - params.water.w_target * derived.m);
    FluxVector {
        w: -q,
        absorbed_water: q,
        ..Default::default()
    }
}

/// Windowed pancreatic/biliary secretion into the configured pool.
pub fn secretion_fluxes(state: &BolusState, params: &ModelParams) -> FluxVector {
    let s = params.secretion.rate_at(state.x);
    if s == 0.0 {
        return FluxVector::default();
    }
    let mut f = FluxVector {
        secreted_dm: s,
        ..Default::default()
    };
    match params.secretion.target {
        SecretionTarget::BInt => f.b_int_dm = s,
        SecretionTarget::AS => f.a_s_dm = s,
    }
    f
}

/// First-order decay of ingested exogenous enzymes.
pub fn enzyme_decay_flux(state: &BolusState, params: &ModelParams) -> FluxVector {
    FluxVector {
        e_exo: -params.volumic.k_e * state.e_exo,
        ..Default::default()
    }
}

/// The eight process terms at `state`, in a fixed order.
pub fn term_fluxes(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> [FluxVector; 8] {
    [
        volumic_fluxes(state, derived, params),
        fibre_hydrolysis_fluxes(state, derived, params),
        surfacic_fluxes(state, derived, params),
        equilibrium_fluxes(state, derived, params),
        absorption_fluxes(state, derived, params),
        water_relaxation_flux(state, derived, params),
        secretion_fluxes(state, params),
        enzyme_decay_flux(state, params),
    ]
}

/// Full right-hand side: the sum of all process terms plus `dx/dt = v` and
/// `dv/dt = transport_accel`.
pub fn rhs(state: &BolusState, params: &ModelParams) -> Result<FluxVector> {
    let derived = compute_derived(state, params)?;
    rhs_with(state, &derived, params)
}

/// [`rhs`] with precomputed derived quantities.
pub fn rhs_with(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> Result<FluxVector> {
    let accel = transport_accel(state, derived, params)?;
    let mut f: FluxVector = term_fluxes(state, derived, params).into_iter().sum();
    f.x = state.v;
    f.v = accel;
    Ok(f)
}

/// `dM/dt` as printed in the closed-form mass balance, with the `M / (M - W)`
/// prefactor. Kept only as an audit diagnostic; the component sum
/// [`FluxVector::mass_rate`] is authoritative.
pub fn literal_mass_rate(
    state: &BolusState,
    derived: &DerivedQuantities,
    params: &ModelParams,
) -> f64 {
    let relax = params.water.k_w * (state.w - params.water.w_target * derived.m);
    let absorbed = params.absorption.k_abs * derived.conc_b_abs * derived.s_sol;
    let secreted = (1.0 + params.secretion_hydration()) * params.secretion.rate_at(state.x);
    derived.m / (derived.m - state.w) * (-relax - absorbed + secreted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Hydration;
    use approx::assert_relative_eq;

    /// Derived quantities with chosen concentrations and geometry, for
    /// evaluating a single term at hand-picked inputs.
    fn derived_with(f: impl FnOnce(&mut DerivedQuantities)) -> DerivedQuantities {
        let mut d = DerivedQuantities {
            reachable_mass: 1.0,
            m: 1.0,
            ..Default::default()
        };
        f(&mut d);
        d
    }

    fn flat_profile(peak: f64) -> crate::model::ActivityProfile {
        // Plateau wide enough that the value is `peak` to machine precision
        // at the midpoint, which is where the tests place the bolus.
        crate::model::ActivityProfile {
            peak,
            onset: -1000.0,
            onset_width: 1.0,
            offset: 1000.0,
            offset_width: 1.0,
        }
    }

    fn hydration(alpha: f64, beta: f64, gamma: f64, lambda_s: f64) -> Hydration {
        Hydration {
            alpha,
            beta,
            gamma,
            lambda_s,
            lambda_i: 0.0,
        }
    }

    #[test]
    fn transport_at_rest() {
        let mut p = ModelParams::default();
        p.transport.tau = 2.0;
        p.transport.c0 = 0.5;
        p.transport.c1 = 1.5;
        p.transport.a = 4.0;
        let s = BolusState::default();
        let d = derived_with(|d| {
            d.r_sol = 3.0;
            d.conc_w = 0.2;
        });
        let acc = transport_accel(&s, &d, &p).unwrap();
        assert_relative_eq!(acc, 2.0 * (0.5 + 1.5 * 3.0) / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn transport_at_wave_celerity() {
        let p = ModelParams::default();
        let c = p.transport.c;
        let s = BolusState {
            v: c,
            x: 3.0,
            ..Default::default()
        };
        let d = derived_with(|d| {
            d.r_sol = 3.0;
            d.conc_w = 0.2;
        });
        assert_eq!(forcing_factor(c, &p), 0.0);
        let acc = transport_accel(&s, &d, &p).unwrap();
        assert_relative_eq!(acc, -(p.transport.k_visco / 0.2) * c, epsilon = 1e-15);
    }

    #[test]
    fn transport_hand_value() {
        let mut p = ModelParams::default();
        p.transport.tau = 1.0;
        p.transport.c = 2.0;
        p.transport.c0 = 0.0;
        p.transport.c1 = 1.0;
        p.transport.a = 1.0;
        p.transport.b = 1.0;
        p.transport.k_visco = 0.5;
        let s = BolusState {
            v: 1.0,
            x: 1.0,
            ..Default::default()
        };
        let d = derived_with(|d| {
            d.r_sol = 3.0;
            d.conc_w = 0.1;
        });
        assert_relative_eq!(transport_accel(&s, &d, &p).unwrap(), -4.25, epsilon = 1e-14);
    }

    #[test]
    fn transport_dehydrated_bolus() {
        let p = ModelParams::default();
        let d = derived_with(|d| d.conc_w = 1e-7);
        let err = transport_accel(&BolusState::default(), &d, &p).unwrap_err();
        assert!(matches!(err, DigestaError::ViscosityBlowup { .. }));
    }

    #[test]
    fn volumic_cases() {
        let mut p = ModelParams::default();
        p.volumic.k_vol = flat_profile(0.2);
        p.hydration = hydration(3.0, 2.0, 0.0, 0.0);
        let s = BolusState::default();

        let d0 = derived_with(|d| d.v_app = 50.0);
        assert_eq!(volumic_fluxes(&s, &d0, &p), FluxVector::default());

        let d = derived_with(|d| {
            d.conc_a_s = 0.1;
            d.v_app = 50.0;
        });
        let f = volumic_fluxes(&s, &d, &p);
        assert_relative_eq!(f.a_s_dm, -1.0, epsilon = 1e-14);
        assert_relative_eq!(f.b_int_dm, 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.w, 1.0, epsilon = 1e-14);

        p.hydration = hydration(2.0, 2.0, 0.0, 0.0);
        assert_eq!(volumic_fluxes(&s, &d, &p).w, 0.0);
    }

    #[test]
    fn fibre_hydrolysis_cases() {
        let mut p = ModelParams::default();
        p.volumic.k_s = 1.0;
        p.volumic.ph = flat_profile(1.0);
        p.hydration = hydration(0.0, 2.0, 0.0, 4.0);
        // [F_sol] = F_sol / (M - F_insol) = 2 / 100 = 0.02.
        let d = derived_with(|d| {
            d.reachable_mass = 100.0;
            d.v_app = 100.0;
        });
        let s = BolusState {
            f_sol_dm: 2.0,
            e_exo: 0.5,
            ..Default::default()
        };
        let f = fibre_hydrolysis_fluxes(&s, &d, &p);
        assert_relative_eq!(f.f_sol_dm, -1.0, epsilon = 1e-14);
        assert_relative_eq!(f.b_int_dm, 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.w, 2.0, epsilon = 1e-14);

        let no_enzyme = BolusState { e_exo: 0.0, ..s };
        assert_eq!(fibre_hydrolysis_fluxes(&no_enzyme, &d, &p), FluxVector::default());

        p.hydration = hydration(0.0, 2.0, 0.0, 2.0);
        assert_eq!(fibre_hydrolysis_fluxes(&s, &d, &p).w, 0.0);
    }

    #[test]
    fn surfacic_cases() {
        let mut p = ModelParams::default();
        p.surfacic.k_surf = 0.1;
        p.surfacic.k_surf_tilde = 0.0;
        p.hydration = hydration(3.0, 0.0, 1.0, 0.0);
        // Hydrated [A_s] = (1 + α) A_s^dm / (M - F_insol) = 4 * 0.05 = 0.2.
        let d = derived_with(|d| {
            d.conc_a_s = 0.05;
            d.conc_w = 0.1;
            d.s_sol = 10.0;
        });
        let s = BolusState::default();
        let f = surfacic_fluxes(&s, &d, &p);
        assert_relative_eq!(f.a_s_dm, -0.02, epsilon = 1e-15);
        assert_relative_eq!(f.b_abs_dm, 0.02, epsilon = 1e-15);
        assert_relative_eq!(f.w, 0.04, epsilon = 1e-15);
        assert_eq!(f.b_int_dm, 0.0);

        let dry = derived_with(|d| {
            d.conc_a_s = 0.05;
            d.conc_b_int = 0.05;
            d.conc_w = 0.0;
            d.s_sol = 10.0;
        });
        p.surfacic.k_surf_tilde = 0.3;
        assert_eq!(surfacic_fluxes(&s, &dry, &p), FluxVector::default());

        p.hydration = hydration(2.0, 2.0, 2.0, 0.0);
        let wet = derived_with(|d| {
            d.conc_a_s = 0.05;
            d.conc_b_int = 0.05;
            d.conc_w = 0.3;
            d.s_sol = 10.0;
        });
        assert_eq!(surfacic_fluxes(&s, &wet, &p).w, 0.0);
    }

    #[test]
    fn equilibrium_hand_value() {
        // k_equi = 1, μ = 2, A_ns = 3, hydrated A_s = 1 with α = 1 → Δ = 5.
        let mut p = ModelParams::default();
        p.equilibrium.k_equi = 1.0;
        p.equilibrium.mu_max = 4.0;
        p.equilibrium.k_mu = 0.1;
        p.hydration = hydration(1.0, 0.0, 0.0, 0.0);
        let d = derived_with(|d| d.conc_w = 0.1);
        assert_relative_eq!(mu(0.1, &p), 2.0, epsilon = 1e-15);
        let s = BolusState {
            a_ns: 3.0,
            a_s_dm: 0.5,
            ..Default::default()
        };
        assert_relative_eq!(solubilization_rate(&s, &d, &p), 5.0, epsilon = 1e-14);
        let f = equilibrium_fluxes(&s, &d, &p);
        assert_relative_eq!(f.a_ns, -5.0, epsilon = 1e-14);
        assert_relative_eq!(f.a_s_dm, 5.0, epsilon = 1e-14);
        assert_relative_eq!(f.w, -5.0, epsilon = 1e-14);
        assert_eq!(f.dry_matter_rate(), 0.0);
        assert_eq!(f.mass_rate(&p), 0.0);
    }

    #[test]
    fn equilibrium_empty_and_fixed_point() {
        let mut p = ModelParams::default();
        p.hydration = hydration(1.5, 0.0, 0.0, 0.0);
        let d = derived_with(|d| d.conc_w = 0.3);
        assert_eq!(
            equilibrium_fluxes(&BolusState::default(), &d, &p),
            FluxVector::default()
        );

        let a_ns = 2.0;
        let a_s_dm = mu(0.3, &p) * a_ns / (1.0 + p.hydration.alpha);
        let s = BolusState {
            a_ns,
            a_s_dm,
            ..Default::default()
        };
        let f = equilibrium_fluxes(&s, &d, &p);
        assert!(f.a_ns.abs() <= 1e-15 * a_ns * p.equilibrium.k_equi, "{f:?}");
    }

    #[test]
    fn absorption_cases() {
        let mut p = ModelParams::default();
        p.absorption.k_abs = 0.5;
        p.hydration = hydration(0.0, 0.0, 2.0, 0.0);
        let d = derived_with(|d| {
            d.conc_b_abs = 0.04;
            d.s_sol = 20.0;
        });
        let s = BolusState::default();
        let f = absorption_fluxes(&s, &d, &p);
        assert_relative_eq!(f.b_abs_dm, -0.4, epsilon = 1e-15);
        assert_relative_eq!(f.w, 0.8, epsilon = 1e-15);
        assert_relative_eq!(f.absorbed_dm, 0.4, epsilon = 1e-15);

        p.hydration.gamma = 0.0;
        assert_eq!(absorption_fluxes(&s, &d, &p).w, 0.0);

        let empty = derived_with(|d| d.s_sol = 20.0);
        assert_eq!(absorption_fluxes(&s, &empty, &p), FluxVector::default());
    }

    #[test]
    fn water_relaxation_cases() {
        let mut p = ModelParams::default();
        p.water.k_w = 2.0;
        p.water.w_target = 0.1;
        let d = derived_with(|d| d.m = 200.0);

        let at_target = BolusState {
            w: 20.0,
            ..Default::default()
        };
        assert_eq!(water_relaxation_flux(&at_target, &d, &p).w, 0.0);

        let wet = BolusState {
            w: 30.0,
            ..Default::default()
        };
        let f = water_relaxation_flux(&wet, &d, &p);
        assert_relative_eq!(f.w, -20.0, epsilon = 1e-13);
        assert_relative_eq!(f.absorbed_water, 20.0, epsilon = 1e-13);

        let dry = BolusState {
            w: 5.0,
            ..Default::default()
        };
        let f = water_relaxation_flux(&dry, &d, &p);
        assert!(f.w > 0.0 && f.absorbed_water < 0.0);
    }

    #[test]
    fn secretion_window() {
        let mut p = ModelParams::default();
        assert_eq!(
            secretion_fluxes(&BolusState::default(), &p),
            FluxVector::default()
        );
        p.secretion.rate = 1.0;
        p.secretion.x_start = 1.0;
        p.secretion.x_end = 3.0;
        let inside = BolusState {
            x: 2.0,
            ..Default::default()
        };
        let f = secretion_fluxes(&inside, &p);
        assert_eq!(f.b_int_dm, 1.0);
        assert_eq!(f.w, 0.0);
        let outside = BolusState {
            x: 5.0,
            ..Default::default()
        };
        assert_eq!(secretion_fluxes(&outside, &p), FluxVector::default());

        p.secretion.target = SecretionTarget::AS;
        let f = secretion_fluxes(&inside, &p);
        assert_eq!((f.a_s_dm, f.b_int_dm), (1.0, 0.0));
    }

    #[test]
    fn enzyme_decay_cases() {
        let mut p = ModelParams::default();
        p.volumic.k_e = 0.5;
        let s = BolusState {
            e_exo: 4.0,
            ..Default::default()
        };
        assert_eq!(enzyme_decay_flux(&s, &p).e_exo, -2.0);
        assert_eq!(enzyme_decay_flux(&BolusState::default(), &p).e_exo, 0.0);
        p.volumic.k_e = 0.0;
        assert_eq!(enzyme_decay_flux(&s, &p).e_exo, 0.0);
    }

    #[test]
    fn rhs_decouples_without_substrates() {
        let p = ModelParams::default();
        let s = BolusState {
            x: 2.0,
            v: 1.0,
            w: 100.0,
            ..Default::default()
        };
        let f = rhs(&s, &p).unwrap();
        assert_eq!(f.x, 1.0);
        assert!(f.v != 0.0);
        assert!(f.w != 0.0);
        assert_eq!(f.w, -f.absorbed_water);
        for v in [
            f.a_nd,
            f.a_ns,
            f.a_s_dm,
            f.b_int_dm,
            f.b_abs_dm,
            f.f_sol_dm,
            f.f_insol_dm,
            f.e_exo,
            f.absorbed_dm,
            f.secreted_dm,
        ] {
            assert_eq!(v, 0.0);
        }
    }
}
