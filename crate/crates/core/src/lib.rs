//! Compartmental ODE model of digestion in the small intestine with dietary
//! fibre.
//!
//! A bolus of dry substrates and water travels along the intestine under
//! averaged peristaltic forcing. Along the way its substrates are solubilized,
//! degraded inside the bolus and at the wall, and absorbed, while fibre holds
//! water out of the available pool. The crate provides the state and
//! parameters ([`model`]), the flux terms ([`kinetics`]), time integration
//! with exit detection and conservation audits ([`integrator`]), the built-in
//! experiments ([`scenarios`]) and configuration and CSV output ([`config`],
//! [`output`]).

pub mod config;
pub mod error;
pub mod integrator;
pub mod kinetics;
pub mod model;
pub mod output;
pub mod scenarios;

pub use config::{parse_config, Config, RunManifest};
pub use error::{DigestaError, Result};
pub use integrator::{
    conservation_audit, integrate, step, AuditReport, ExitReason, IntegrationConfig,
    IntegrationResult, Method, TrajectoryRecord,
};
pub use kinetics::{rhs, FluxVector};
pub use model::{compute_derived, mu, BolusState, DerivedQuantities, ModelParams};
pub use output::{write_manifest, write_outputs};
pub use scenarios::{
    baseline_scenario, builtin_scenarios, run_scenario, sweep, ScenarioConfig, ScenarioResult,
    ScenarioRow,
};
