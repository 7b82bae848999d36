//! TOML configuration: model parameters, integrator settings and scenarios.
//!
//! Every section and field is optional; missing values take their defaults
//! and an empty file yields the default parameters with the built-in
//! scenarios. Unknown keys are rejected.
//!
//! ```toml
//! [params.transport]
//! tau = 5.0
//!
//! [params.hydration]
//! alpha = 2.0
//!
//! [integrator]
//! method = "adaptive"
//! tol_rel = 1e-8
//!
//! [[scenarios]]
//! name = "my-dose"
//! composition = { f_sol_pct = 7.0 }
//! sweep = { label = "k_w", paths = ["params.water.k_w"], points = [[0.5], [1.0]] }
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{DigestaError, Result};
use crate::integrator::IntegrationConfig;
use crate::model::ModelParams;
use crate::scenarios::{build_initial_state, builtin_scenarios, set_path, ScenarioConfig};

/// Provenance of an output set, stored in the `[run]` table of a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    pub config_path: String,
    pub scenarios: Vec<String>,
    pub output_dir: String,
    pub tool_version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub params: ModelParams,
    pub integrator: IntegrationConfig,
    pub scenarios: Vec<ScenarioConfig>,
    /// Present only in manifests; ignored when running.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunManifest>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            params: ModelParams::default(),
            integrator: IntegrationConfig::default(),
            scenarios: builtin_scenarios(),
            run: None,
        }
    }
}

impl Config {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioConfig> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.integrator.validate()?;
        let mut names = BTreeSet::new();
        for sc in &self.scenarios {
            if !names.insert(sc.name.as_str()) {
                return Err(DigestaError::validation(format!(
                    "duplicate scenario name `{}`",
                    sc.name
                )));
            }
            if sc.name.is_empty() || sc.name.contains(['/', '\\']) {
                return Err(DigestaError::validation(format!(
                    "scenario name `{}` must be non-empty and contain no path separators",
                    sc.name
                )));
            }
            // Overrides must resolve and yield a valid bolus.
            let mut p = self.params;
            let mut s = sc.clone();
            for (path, v) in &sc.overrides {
                set_path(&mut p, &mut s, path, *v)?;
            }
            p.validate()?;
            sc.composition.validate()?;
            if sc.sweep.is_none() {
                build_initial_state(&s, &p)?;
            }
            if let Some(axis) = &sc.sweep {
                for point in &axis.points {
                    if point.iter().any(|v| !v.is_finite()) {
                        return Err(DigestaError::validation(format!(
                            "scenario `{}`: sweep values must be finite",
                            sc.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes back to the configuration format.
    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| DigestaError::Io(e.to_string()))
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, column)
}

/// Parses and validates a configuration, applying defaults.
pub fn parse_config(text: &str) -> Result<Config> {
    let config: Config = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_column(text, s.start))
            .unwrap_or((1, 1));
        DigestaError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}
