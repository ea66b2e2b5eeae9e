//! Subcommand bodies. Each writes its artifacts into the output directory and
//! returns the value that decides the exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bitop_core::dynamics::{integrate, Trajectory};
use bitop_core::hierarchy::{hier_integrate, hier_isospectral_drift, hierarchy_report, HierState};
use bitop_core::reduction::reduction_report;
use bitop_core::spectral::{
    covering_curves, covering_match, curve_summary, double_point_check, pq_from_state,
};
use serde::Serialize;
use serde_json::json;

use crate::checks::{self, trajectory, VerifyReport};
use crate::config::RunSetup;
use crate::CliError;

pub const CSV_HEADER: &str = "t,m12,m13,m14,m23,m24,m34,g12,g13,g14,g23,g24,g34";

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_file(dir, name, &text)
}

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::with_capacity(t.len() * 13 * 24);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (time, s) in t.times.iter().zip(&t.states) {
        let _ = write!(out, "{time:.16e}");
        for v in s.to_array() {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRung {
    pub dt: f64,
    pub steps: usize,
    /// sup-norm distance of the endpoint from the next finer rung
    pub endpoint_change: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceLadder {
    pub horizon: f64,
    pub rungs: Vec<ConvergenceRung>,
    /// `log2` of the ratio of successive endpoint changes
    pub observed_order: Option<f64>,
}

/// Endpoint self-convergence at `T = dt * steps` on a ladder of step sizes, starting
/// coarse enough that truncation error dominates round-off.
pub fn convergence_ladder(setup: &RunSetup) -> Result<ConvergenceLadder, CliError> {
    let horizon = setup.dt * setup.steps as f64;
    let base_steps = 50usize;
    let ends = (0..3)
        .map(|k| {
            let n = base_steps << k;
            integrate(&setup.initial, &setup.params, horizon / n as f64, n, setup.method)
                .map(|t| (horizon / n as f64, n, *t.last()))
                .map_err(CliError::Core)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let changes: Vec<f64> = ends.windows(2).map(|w| (w[0].2 - w[1].2).max_abs()).collect();
    let observed_order = match changes.as_slice() {
        [a, b] if *a > 0.0 && *b > 0.0 => Some((a / b).log2()),
        _ => None,
    };
    Ok(ConvergenceLadder {
        horizon,
        rungs: ends
            .iter()
            .enumerate()
            .map(|(k, e)| ConvergenceRung {
                dt: e.0,
                steps: e.1,
                endpoint_change: changes.get(k).copied(),
            })
            .collect(),
        observed_order,
    })
}

pub fn simulate(setup: &RunSetup, out: &Path) -> Result<(), CliError> {
    let t = trajectory(setup)?;
    write_file(out, "trajectory.csv", &trajectory_csv(&t))?;
    let ladder = convergence_ladder(setup)?;
    write_json(
        out,
        "run.json",
        &json!({
            "setup": setup,
            "samples": t.len(),
            "convergence": ladder,
        }),
    )
}

pub fn verify(setup: &RunSetup, selection: &[&'static str], out: &Path) -> Result<VerifyReport, CliError> {
    let report = checks::verify(setup, selection)?;
    write_json(out, "report.json", &report)?;
    Ok(report)
}

pub fn spectral(setup: &RunSetup, out: &Path) -> Result<(), CliError> {
    let (s, p) = (&setup.initial, &setup.params);
    let (pp, qq) = pq_from_state(s, p);
    let summary = curve_summary(&pp, &qq).map_err(CliError::Core)?;
    let double_points = double_point_check(s, p).map_err(|e| e.to_string());
    let covering = covering_curves(&pp, &qq, p);
    let matched = covering_match(s, p).map_err(|e| e.to_string());
    write_json(
        out,
        "spectral.json",
        &json!({
            "setup": setup,
            "p": pp,
            "q": qq,
            "summary": summary,
            "double_points": double_points,
            "covering_curves": covering,
            "covering_match": matched,
        }),
    )
}

pub fn reduce(setup: &RunSetup, out: &Path) -> Result<(), CliError> {
    let t = trajectory(setup)?;
    let rep = reduction_report(&t, setup.tolerance("reduction-closure")).map_err(CliError::Core)?;
    write_json(out, "reduction.json", &json!({ "setup": setup, "reduction": rep }))
}

pub fn hierarchy(setup: &RunSetup, out: &Path) -> Result<(), CliError> {
    let p = &setup.params;
    let hs = HierState::new(setup.hierarchy_d, setup.hierarchy_mats.clone()).map_err(CliError::Core)?;
    let rep = hierarchy_report(&hs, p, setup.hierarchy_policy).map_err(CliError::Core)?;
    let flow = hier_integrate(&hs, p, setup.hierarchy_policy, setup.dt, setup.steps).map_err(CliError::Core)?;
    let drift = hier_isospectral_drift(&flow, p, 500).map_err(|e| e.to_string());
    write_json(
        out,
        "hierarchy.json",
        &json!({
            "setup": setup,
            "hierarchy": rep,
            "flow": {
                "horizon": setup.dt * setup.steps as f64,
                "max_constraint_residual": flow.max_residual(),
                "isospectral_drift": drift,
            },
        }),
    )
}
