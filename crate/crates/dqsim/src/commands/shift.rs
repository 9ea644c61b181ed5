//! Bath-induced frequency shift versus damping: the bath-integral value and
//! the stochastic free-decay fit side by side, with straight-line summaries.
//! Fit failures are recorded per row and the sweep continues.

use super::bath_at_gamma;
use crate::config::{Resolved, SolverName};
use crate::output::{Cell, OutputWriter, Table};
use crate::CliError;
use driven_qubit::fit::linear_fit;
use driven_qubit::propagate::EnsemblePlan;
use driven_qubit::spectroscopy::{measure_shift, ShiftMethod};
use serde_json::json;

pub fn run(r: &Resolved, out: &mut OutputWriter) -> Result<(), CliError> {
    let gammas: Vec<f64> = if r.gamma_list.is_empty() {
        // Default six-point log sweep across the weak-coupling window.
        (0..6)
            .map(|i| r.omega_q * 1e-3 * (30.0f64).powf(i as f64 / 5.0))
            .collect()
    } else {
        r.gamma_list.clone()
    };
    let run_sled = r.solvers.contains(&SolverName::Sled);

    let mut table = Table::new(
        "shift_scan",
        &["gamma", "delta_s_lme", "delta_s_sled", "stderr", "fit_status"],
    );
    let mut analytic = Vec::new();
    let mut fitted: Vec<(f64, f64)> = Vec::new();
    let mut failures = Vec::new();

    for &gamma in &gammas {
        let spec = bath_at_gamma(r, gamma)?;
        let exact = measure_shift(&spec, &ShiftMethod::Analytic)
            .map_err(|e| CliError::config(e.to_string()))?;
        analytic.push((gamma, exact.delta_s));

        let (sled_value, sled_err, status) = if run_sled {
            let method = ShiftMethod::SledFit {
                ensemble: EnsemblePlan {
                    n_traj: r.n_traj,
                    base_seed: r.base_seed,
                },
                horizon: None,
                dt: None,
            };
            match measure_shift(&spec, &method) {
                Ok(p) => {
                    fitted.push((gamma, p.delta_s));
                    (p.delta_s, p.uncertainty, "ok")
                }
                Err(e) => {
                    failures.push(json!({ "gamma": gamma, "error": e.to_string() }));
                    (f64::NAN, f64::NAN, "failed")
                }
            }
        } else {
            (f64::NAN, f64::NAN, "skipped")
        };

        table.push(vec![
            gamma.into(),
            exact.delta_s.into(),
            sled_value.into(),
            sled_err.into(),
            Cell::from(status),
        ]);
    }
    out.write_table(&table)?;

    let line_json = |pts: &[(f64, f64)]| -> Result<serde_json::Value, CliError> {
        if pts.len() < 2 {
            return Ok(json!(null));
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let line = linear_fit(&xs, &ys)?;
        Ok(json!({
            "slope": line.slope,
            "intercept": line.intercept,
            "r_squared": line.r_squared,
            "points_used": pts.len(),
        }))
    };
    let summary = json!({
        "analytic_line": line_json(&analytic)?,
        "sled_line": line_json(&fitted)?,
        "fit_failures": failures,
    });
    out.write_json_value("shift_summary.json", &summary)?;
    Ok(())
}
