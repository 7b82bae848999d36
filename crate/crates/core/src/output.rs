//! CSV and manifest writers.
//!
//! Numbers are written with nine significant digits and `.` as decimal
//! separator; missing values (no exit time, failed points) are empty cells.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{Config, RunManifest};
use crate::error::Result;
use crate::integrator::TrajectoryRecord;
use crate::scenarios::ScenarioResult;

/// Formats like C's `%.9g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return String::new();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Columns of the summary table after the sweep columns.
pub const SUMMARY_COLUMNS: [&str; 8] = [
    "status",
    "exit_reason",
    "exit_time_h",
    "absorbed_dm_g",
    "absorbed_over_dm_pct",
    "final_mass_g",
    "dry_over_total_absorbed_pct",
    "audit_max_residual",
];

/// Columns of a trajectory file.
pub const TRAJECTORY_COLUMNS: [&str; 21] = [
    "t",
    "x",
    "v",
    "a_nd",
    "a_ns",
    "a_s_dm",
    "b_int_dm",
    "b_abs_dm",
    "f_sol_dm",
    "f_insol_dm",
    "w",
    "e_exo",
    "absorbed_dm",
    "absorbed_water",
    "secreted_dm",
    "M",
    "V",
    "r_sol",
    "W_over_M",
    "mass_residual",
    "dry_matter_residual",
];

/// Summary table as CSV text.
pub fn summary_csv(result: &ScenarioResult) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec![result.axis_label.clone()];
    header.extend(result.extra_paths.iter().cloned());
    header.extend(SUMMARY_COLUMNS.iter().map(|s| s.to_string()));
    wtr.write_record(&header)?;
    for row in &result.rows {
        let mut rec = vec![fmt_sig(row.sweep_value)];
        for i in 0..result.extra_paths.len() {
            let v = row.point.get(i + 1).or(row.point.first()).copied();
            rec.push(opt(v));
        }
        rec.push(match &row.error {
            None => "ok".to_string(),
            Some(e) => format!("failed: {e}"),
        });
        rec.push(row.exit_reason.map(|r| r.as_str().to_string()).unwrap_or_default());
        rec.push(opt(row.exit_time));
        for v in [
            row.absorbed_dm,
            row.absorbed_over_dm_pct,
            row.final_mass,
            row.dry_over_total_absorbed_pct,
            row.audit_max_residual,
        ] {
            rec.push(fmt_sig(v));
        }
        wtr.write_record(&rec)?;
    }
    into_string(wtr)
}

/// Trajectory samples as CSV text.
pub fn trajectory_csv(trajectory: &[TrajectoryRecord]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(TRAJECTORY_COLUMNS)?;
    for r in trajectory {
        let s = &r.state;
        let d = &r.derived;
        let fields = [
            s.t,
            s.x,
            s.v,
            s.a_nd,
            s.a_ns,
            s.a_s_dm,
            s.b_int_dm,
            s.b_abs_dm,
            s.f_sol_dm,
            s.f_insol_dm,
            s.w,
            s.e_exo,
            s.absorbed_dm,
            s.absorbed_water,
            s.secreted_dm,
            d.m,
            d.v,
            d.r_sol,
            d.w_ratio,
            r.mass_residual,
            r.dry_matter_residual,
        ];
        wtr.write_record(fields.iter().map(|v| fmt_sig(*v)))?;
    }
    into_string(wtr)
}

fn into_string(wtr: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = wtr
        .into_inner()
        .map_err(|e| crate::error::DigestaError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `<dir>/<scenario>/summary.csv` and, for each completed point with a
/// kept trajectory, `<dir>/<scenario>/trajectory_<row>.csv`.
pub fn write_outputs(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let sdir = dir.join(&result.name);
    fs::create_dir_all(&sdir)?;
    let mut written = Vec::new();
    let summary = sdir.join("summary.csv");
    fs::write(&summary, summary_csv(result)?)?;
    written.push(summary);
    for (i, row) in result.rows.iter().enumerate() {
        if let Some(run) = &row.integration {
            let path = sdir.join(format!("trajectory_{i}.csv"));
            fs::write(&path, trajectory_csv(&run.trajectory)?)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes the resolved configuration plus run metadata to `<dir>/manifest.toml`.
/// The file is itself a valid configuration that reproduces the outputs.
pub fn write_manifest(config: &Config, run: RunManifest, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut snapshot = config.clone();
    snapshot.run = Some(run);
    let path = dir.join("manifest.toml");
    fs::write(&path, snapshot.to_text()?)?;
    Ok(path)
}
