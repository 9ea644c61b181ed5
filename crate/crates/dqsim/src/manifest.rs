//! Reproducibility manifest: resolved parameters in internal units, derived
//! bath quantities, seeds, code version, wall-clock, and a hash-indexed list
//! of every data file the command emitted.

use crate::config::Resolved;
use crate::CliError;
use driven_qubit::bath;
use serde_json::{json, Map, Value};

/// Internal-unit snapshot of the parameters the run actually used.
fn resolved_block(r: &Resolved) -> Value {
    json!({
        "omega_q_rad_per_ns": r.omega_q,
        "bath": {
            "eta": r.bath.eta,
            "omega_c_rad_per_ns": r.bath.omega_c,
            "hbar_beta_ns": r.bath.hbar_beta,
        },
        "gamma_list_rad_per_ns": r.gamma_list,
        "drive": {
            "amplitude_rad_per_ns": r.drive_amplitude,
            "probe_amplitude_rad_per_ns": r.probe_amplitude,
            "frequency_policy": match r.frequency_policy {
                crate::config::FrequencyPolicy::Bare => "bare",
                crate::config::FrequencyPolicy::Shifted => "shifted",
            },
            "probe_span_over_drive": r.probe_span,
            "probe_points": r.probe_points,
            "beat_periods": r.beat_periods,
        },
        "solvers": r.solvers.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
        "plan": {
            "dt_scale": r.dt_scale,
            "t_final_over_gamma": r.t_final_over_gamma,
            "n_traj": r.n_traj,
            "base_seed": r.base_seed,
            "record_stride": r.record_stride,
        },
        "resonator": {
            "omega_r_rad_per_ns": r.resonator.omega_r,
            "kappa_rad_per_ns": r.resonator.kappa,
            "chi_rad_per_ns": r.resonator.chi,
            "drive_amplitude_rad_per_ns": r.resonator.drive_amplitude,
            "drive_frequency_rad_per_ns": r.resonator.drive_frequency,
        },
    })
}

/// Bath quantities implied by the resolved parameters, including the
/// frequency shift each solver applies.
fn derived_block(r: &Resolved) -> Result<Value, CliError> {
    let rates = bath::rates(&r.bath)?;
    let mut shifts = Map::new();
    for s in &r.solvers {
        let delta_s = if s.uses_shift() { rates.delta_s } else { 0.0 };
        shifts.insert(s.as_str().to_string(), json!(delta_s));
    }
    Ok(json!({
        "gamma_rad_per_ns": rates.gamma,
        "gamma_beta_rad_per_ns": rates.gamma_beta,
        "gamma_down_rad_per_ns": rates.gamma_down,
        "gamma_up_rad_per_ns": rates.gamma_up,
        "n_bar": rates.gamma_up / rates.gamma,
        "delta_s_rad_per_ns": rates.delta_s,
        "delta_s_applied": Value::Object(shifts),
    }))
}

/// Assembles the manifest document.  `files` are (name, sha256) pairs; the
/// wall clock lives only here, keeping the data files reproducible.
pub fn build(
    command: &str,
    r: &Resolved,
    workers: Option<usize>,
    wall_clock_seconds: f64,
    files: &[(String, String)],
) -> Result<Value, CliError> {
    let file_list: Vec<Value> = files
        .iter()
        .map(|(name, hash)| json!({ "name": name, "sha256": hash }))
        .collect();
    Ok(json!({
        "command": command,
        "profile": r.profile.name(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "workers": workers,
        "wall_clock_seconds": wall_clock_seconds,
        "resolved": resolved_block(r),
        "derived": derived_block(r)?,
        "files": file_list,
    }))
}
