//! CSV serialization and run metadata sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::ExperimentConfig;
use super::{DiagnosticRow, SweepRow, TrajectoryRun};
use crate::bounds::{BoundVerification, Ratio};
use crate::error::Result;

pub const SWEEP_COLUMNS: [&str; 3] = ["T", "k", "norm_diff"];
pub const DIAGNOSTICS_COLUMNS: [&str; 4] = ["T", "k", "r0_norm", "r_max_norm"];
pub const BOUNDS_COLUMNS: [&str; 14] = [
    "trial",
    "D",
    "w_hat",
    "emp_blind_vs_offline",
    "emp_blind_vs_nominal",
    "emp_nominal_vs_offline",
    "thm3",
    "thm4",
    "thm5",
    "ratio3",
    "ratio4",
    "ratio5",
    "assumption1_ok",
    "zero_over_zero",
];

/// Marker for a bound that does not apply (non-positive stability margin).
pub const NOT_APPLICABLE: &str = "NA";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NOT_APPLICABLE.to_string(), num)
}

fn opt_ratio(r: Option<Ratio>) -> String {
    opt(r.map(|r| r.value))
}

pub fn trajectory_columns(n: usize, m: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "policy".to_string()];
    cols.extend((0..n).map(|i| format!("x{i}")));
    cols.extend((0..m).map(|i| format!("u{i}")));
    cols.push("stage_cost".into());
    cols.push("disturbed".into());
    cols
}

/// Rows sorted by `t`, then by policy in run order. The final row for each
/// policy (`t = T`) has empty control cells and the terminal cost.
pub fn write_trajectory_csv<W: Write>(run: &TrajectoryRun, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let first = &run.rollouts[0];
    let n = first.states[0].len();
    let m = first.controls.first().map_or(0, |u| u.len());
    w.write_record(trajectory_columns(n, m))?;
    let horizon = first.controls.len();
    for t in 0..=horizon {
        for r in &run.rollouts {
            let mut rec = vec![t.to_string(), r.policy.to_string()];
            rec.extend(r.states[t].iter().map(|&x| num(x)));
            match r.controls.get(t) {
                Some(u) => rec.extend(u.iter().map(|&x| num(x))),
                None => rec.extend(std::iter::repeat_n(String::new(), m)),
            }
            rec.push(num(r.stage_costs[t]));
            rec.push(r.disturbed.get(t).copied().unwrap_or(false).to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([r.horizon.to_string(), r.budget.to_string(), num(r.norm_diff)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics_csv<W: Write>(rows: &[DiagnosticRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIAGNOSTICS_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.horizon.to_string(),
            r.budget.to_string(),
            num(r.r0_norm),
            num(r.r_max_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per trial, then one `trial = max` summary row per budget.
pub fn write_bounds_csv<W: Write>(runs: &[BoundVerification], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUNDS_COLUMNS)?;
    for run in runs {
        let rep = &run.report;
        for t in &run.trials {
            w.write_record([
                t.trial.to_string(),
                t.d_count.to_string(),
                num(t.w_hat),
                num(t.emp_blind_vs_offline),
                num(t.emp_blind_vs_nominal),
                num(t.emp_nominal_vs_offline),
                opt(rep.thm3),
                num(rep.thm4),
                opt(rep.thm5),
                opt_ratio(t.ratio3),
                num(t.ratio4.value),
                opt_ratio(t.ratio5),
                rep.assumption1_ok.to_string(),
                t.zero_over_zero().to_string(),
            ])?;
        }
    }
    for run in runs.iter().filter(|r| !r.trials.is_empty()) {
        let rep = &run.report;
        w.write_record([
            "max".to_string(),
            rep.d_count.to_string(),
            num(rep.w_hat),
            num(run.max_blind_vs_offline()),
            num(run.max_blind_vs_nominal()),
            num(run.max_nominal_vs_offline()),
            opt(rep.thm3),
            num(rep.thm4),
            opt(rep.thm5),
            opt(run.max_ratio3()),
            num(run.max_ratio4()),
            opt(run.max_ratio5()),
            rep.assumption1_ok.to_string(),
            run.any_zero_over_zero().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    artifact: &'a str,
    config_hash: String,
    seed: u64,
    software_version: &'static str,
    details: Value,
}

/// Writes `<dir>/<basename>.csv` and `<dir>/<basename>.meta.json`.
/// Neither file contains anything time-dependent.
pub fn write_artifact(
    dir: &Path,
    basename: &str,
    config: &ExperimentConfig,
    csv_bytes: &[u8],
    details: Value,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{basename}.csv"));
    fs::write(&csv_path, csv_bytes)?;
    let meta = Metadata {
        artifact: basename,
        config_hash: config.config_hash()?,
        seed: config.seed,
        software_version: env!("CARGO_PKG_VERSION"),
        details,
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(dir.join(format!("{basename}.meta.json")), text)?;
    Ok(csv_path)
}
