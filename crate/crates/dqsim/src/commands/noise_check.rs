//! Validation sweep for the colored-noise synthesizer: ensemble
//! autocorrelation at configured lags against the bath-correlation oracle.

use crate::config::Resolved;
use crate::output::{OutputWriter, Table};
use crate::CliError;
use driven_qubit::bath;
use driven_qubit::noise::{build_kernel, estimate_autocorrelation, synthesize, NoiseGrid};
use rayon::prelude::*;
use std::f64::consts::PI;

pub fn run(r: &Resolved, out: &mut OutputWriter) -> Result<(), CliError> {
    // Fine grid: Nyquist at 16ω_c, comfortably above the spectral support.
    let dt = PI / (16.0 * r.bath.omega_c);
    let grid = NoiseGrid::new(dt, r.noise_samples, 8.0 * r.bath.omega_c)?;
    for &steps in &r.noise_lag_steps {
        if steps > r.noise_samples / 2 {
            return Err(CliError::config(format!(
                "noise.lag_steps entry {steps} exceeds half the record ({})",
                r.noise_samples / 2
            )));
        }
    }

    let kernel = build_kernel(&r.bath, grid)?;
    let trajectories: Vec<_> = (0..r.n_traj as u64)
        .into_par_iter()
        .map(|i| synthesize(&kernel, r.base_seed.wrapping_add(i)))
        .collect();

    let lags: Vec<f64> = r.noise_lag_steps.iter().map(|&s| s as f64 * dt).collect();
    let stats = estimate_autocorrelation(&trajectories, &lags)?;

    let mut table = Table::new(
        "noise_check",
        &["tau", "l_prime_target", "estimate", "stderr"],
    );
    for (lag, (mean, se)) in lags.iter().zip(&stats) {
        let target = bath::real_correlation_reduced(&r.bath, *lag)?;
        table.push(vec![(*lag).into(), target.into(), (*mean).into(), (*se).into()]);
    }
    out.write_table(&table)?;
    Ok(())
}
