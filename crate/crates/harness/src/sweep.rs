//! Grids over `(theta, safety)`; every cell is an independent run.

use std::fs;
use std::path::Path;

use chambolle_pock::solver::ParamClass;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{execute, Outcome, Prepared};
use crate::trajectory::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome {
    Pass,
    Fail,
    Observational,
    ConfigError,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub safety: f64,
    pub product: Option<f64>,
    pub status: Option<ParamClass>,
    pub outcome: CellOutcome,
    pub v_monotone: Option<bool>,
    pub max_descent_residual: Option<f64>,
    pub max_lower_bound_residual: Option<f64>,
    pub final_ergodic_gap: Option<f64>,
    pub first_failure: Option<String>,
    pub error: Option<String>,
}

fn cell(prep: &Prepared, base: &ExperimentConfig, theta: f64, safety: f64) -> SweepRow {
    let mut cfg = base.clone();
    cfg.params.theta = theta;
    cfg.params.safety = safety;
    cfg.params.tau = None;
    cfg.params.sigma = None;
    let empty = SweepRow {
        theta,
        safety,
        product: None,
        status: None,
        outcome: CellOutcome::ConfigError,
        v_monotone: None,
        max_descent_residual: None,
        max_lower_bound_residual: None,
        final_ergodic_gap: None,
        first_failure: None,
        error: None,
    };
    match execute(prep, &cfg, false) {
        Ok(r) => {
            let s = &r.summary;
            let c = &s.certificates;
            SweepRow {
                product: Some(s.status.product),
                status: Some(s.status.class),
                outcome: match s.outcome {
                    Outcome::Pass => CellOutcome::Pass,
                    Outcome::Fail => CellOutcome::Fail,
                    Outcome::Observational => CellOutcome::Observational,
                },
                v_monotone: Some(c.monotone.fail == 0),
                max_descent_residual: c.max_descent_residual,
                max_lower_bound_residual: c.max_lower_bound_residual,
                final_ergodic_gap: s.final_ergodic_gap,
                first_failure: c.first_failure.as_ref().map(|(k, name)| format!("{name} at k = {k}")),
                ..empty
            }
        }
        Err(e) => SweepRow {
            outcome: if e.exit_code() == 1 { CellOutcome::Fail } else { CellOutcome::ConfigError },
            error: Some(e.to_string()),
            ..empty
        },
    }
}

/// Runs every `(theta, safety)` cell in parallel; rows come back in grid order
/// (thetas outer, safeties inner).
pub fn run_sweep(prep: &Prepared, cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let grid = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Config("sweep needs a [sweep] table".into()))?;
    if grid.thetas.is_empty() || grid.safeties.is_empty() {
        return Err(HarnessError::Config("sweep grid is empty".into()));
    }
    let cells: Vec<(f64, f64)> = grid
        .thetas
        .iter()
        .flat_map(|&t| grid.safeties.iter().map(move |&s| (t, s)))
        .collect();
    Ok(cells.par_iter().map(|&(t, s)| cell(prep, cfg, t, s)).collect())
}

/// 1 if any asserted cell failed, else 2 if any cell had a config error, else 0.
pub fn sweep_exit_code(rows: &[SweepRow]) -> i32 {
    if rows.iter().any(|r| r.outcome == CellOutcome::Fail) {
        1
    } else if rows.iter().any(|r| r.outcome == CellOutcome::ConfigError) {
        2
    } else {
        0
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "theta",
        "safety",
        "product",
        "status",
        "outcome",
        "v_monotone",
        "max_descent_residual",
        "max_lower_bound_residual",
        "final_ergodic_gap",
        "first_failure",
        "error",
    ])?;
    for r in rows {
        let outcome = serde_json::to_value(r.outcome)?;
        w.write_record([
            fmt_f64(r.theta),
            fmt_f64(r.safety),
            opt(r.product),
            r.status.map(|s| s.as_str().to_string()).unwrap_or_default(),
            outcome.as_str().unwrap_or_default().to_string(),
            r.v_monotone.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.max_descent_residual),
            opt(r.max_lower_bound_residual),
            opt(r.final_ergodic_gap),
            r.first_failure.clone().unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.into_inner().map_err(|e| HarnessError::Usage(e.to_string()))
}

/// Writes `sweep.csv` and `sweep.json`.
pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let csv_path = dir.join("sweep.csv");
    fs::write(&csv_path, sweep_to_csv(rows)?).map_err(|e| HarnessError::io(&csv_path, e))?;
    let json_path = dir.join("sweep.json");
    let mut json = serde_json::to_string_pretty(rows)?;
    json.push('\n');
    fs::write(&json_path, json).map_err(|e| HarnessError::io(&json_path, e))
}
