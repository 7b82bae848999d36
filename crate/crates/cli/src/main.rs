//! `digesta`: run built-in or configured scenarios, ad-hoc sweeps and
//! conservation audits.
//!
//! Exit codes: 0 on success, 1 on configuration or validation errors, 2 when
//! an integration fails at run time.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use digesta_core::output::{fmt_sig, summary_csv};
use digesta_core::scenarios::SweepAxis;
use digesta_core::{
    baseline_scenario, builtin_scenarios, integrate, parse_config, run_scenario, write_manifest,
    write_outputs, Config, DigestaError, RunManifest, ScenarioConfig, ScenarioResult,
};

#[derive(Parser)]
#[command(name = "digesta", version, about = "Small-intestine digestion model with dietary fibre")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios of a configuration file and write CSV outputs.
    Run {
        config: PathBuf,
        /// Run only this scenario (repeatable). Default: all.
        #[arg(long = "scenario")]
        scenarios: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the built-in scenario names.
    ListScenarios,
    /// Run the baseline bolus and print the conservation residuals.
    Audit { config: PathBuf },
    /// Sweep one dotted parameter path over a list of values.
    Sweep {
        config: PathBuf,
        /// Dotted path, e.g. `params.transport.tau`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        /// Scenario to sweep on top of. Default: the baseline bolus.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<DigestaError> for Failure {
    fn from(e: DigestaError) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load(path: &Path) -> Result<Config, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::from(e).with_context(path))
}

impl Failure {
    fn with_context(self, path: &Path) -> Self {
        match self {
            Failure::Invalid(m) => Failure::Invalid(format!("{}: {m}", path.display())),
            Failure::Runtime(m) => Failure::Runtime(format!("{}: {m}", path.display())),
        }
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn print_summary(result: &ScenarioResult) -> Result<(), Failure> {
    println!("== {}", result.name);
    print!("{}", summary_csv(result)?);
    Ok(())
}

/// Reports failed rows; they make the whole command a runtime failure.
fn failed_rows(result: &ScenarioResult) -> Vec<String> {
    result
        .rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| format!("{} at {}: {e}", result.name, fmt_sig(r.sweep_value)))
        })
        .collect()
}

fn execute(
    config: &Config,
    scenarios: &[ScenarioConfig],
    config_path: &Path,
    out: &Path,
) -> Result<(), Failure> {
    let mut failures = Vec::new();
    for sc in scenarios {
        let result = run_scenario(sc, &config.params, &config.integrator)?;
        write_outputs(&result, out)?;
        print_summary(&result)?;
        failures.extend(failed_rows(&result));
    }
    let mut snapshot = config.clone();
    snapshot.scenarios = scenarios.to_vec();
    snapshot.run = None;
    let manifest = RunManifest {
        config_path: config_path.display().to_string(),
        scenarios: scenarios.iter().map(|s| s.name.clone()).collect(),
        output_dir: out.display().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: timestamp(),
    };
    let path = write_manifest(&snapshot, manifest, out)?;
    println!("wrote {}", path.display());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "{} point(s) failed:\n  {}",
            failures.len(),
            failures.join("\n  ")
        )))
    }
}

fn cmd_run(config_path: &Path, names: &[String], out: &Path) -> Result<(), Failure> {
    let config = load(config_path)?;
    let selected: Vec<ScenarioConfig> = if names.is_empty() {
        config.scenarios.clone()
    } else {
        names
            .iter()
            .map(|n| {
                config.scenario(n).cloned().ok_or_else(|| {
                    let known: Vec<&str> = config.scenarios.iter().map(|s| s.name.as_str()).collect();
                    Failure::Invalid(format!("unknown scenario `{n}` (known: {})", known.join(", ")))
                })
            })
            .collect::<Result<_, _>>()?
    };
    execute(&config, &selected, config_path, out)
}

fn cmd_list() {
    for sc in builtin_scenarios() {
        println!("{:<22}{}", sc.name, sc.description);
    }
}

fn cmd_audit(config_path: &Path) -> Result<(), Failure> {
    let config = load(config_path)?;
    let sc = baseline_scenario();
    let state0 = digesta_core::scenarios::build_initial_state(&sc, &config.params)?;
    let res = integrate(&state0, &config.params, &config.integrator)?;
    println!("exit_reason              {}", res.exit_reason.as_str());
    println!(
        "exit_time_h              {}",
        res.exit_time.map(fmt_sig).unwrap_or_else(|| "-".into())
    );
    println!("steps                    {}", res.steps);
    println!("samples                  {}", res.trajectory.len());
    println!("mass_residual            {:e}", res.audit.mass);
    println!("volume_residual          {:e}", res.audit.volume);
    println!("dry_matter_residual      {:e}", res.audit.dry_matter);
    println!("literal_mass_rate_gap    {:e}", res.audit.literal_mass_rate_gap);
    println!("max_residual             {:e}", res.audit_max_residual);
    if let Some(d) = &res.diagnostic {
        return Err(Failure::Runtime(format!("baseline halted early: {d}")));
    }
    Ok(())
}

fn parse_values(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::Invalid(format!("--values: `{s}` is not a finite number")))
        })
        .collect()
}

fn cmd_sweep(
    config_path: &Path,
    param: &str,
    values: &str,
    scenario: Option<&str>,
    out: &Path,
) -> Result<(), Failure> {
    let config = load(config_path)?;
    let values = parse_values(values)?;
    let mut base = match scenario {
        None => baseline_scenario(),
        Some(n) => config
            .scenario(n)
            .cloned()
            .ok_or_else(|| Failure::Invalid(format!("unknown scenario `{n}`")))?,
    };
    base.name = format!("sweep_{param}");
    base.sweep = Some(SweepAxis::single(param, &values));
    execute(&config, &[base], config_path, out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run {
            config,
            scenarios,
            out,
        } => cmd_run(config, scenarios, out),
        Command::ListScenarios => {
            cmd_list();
            Ok(())
        }
        Command::Audit { config } => cmd_audit(config),
        Command::Sweep {
            config,
            param,
            values,
            scenario,
            out,
        } => cmd_sweep(config, param, values, scenario.as_deref(), out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
