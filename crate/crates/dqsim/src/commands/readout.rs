//! Dispersive-readout forward model: maps qubit populations (given directly
//! or read from a previous pump-probe scan) through the resonator and
//! reports quadratures plus the closed-form/ODE cross-check per row.

use crate::config::Resolved;
use crate::output::{OutputWriter, Table};
use crate::CliError;
use driven_qubit::propagate::StepPlan;
use driven_qubit::readout::{cavity_field_closed_form, cavity_field_ode};
use num_complex::Complex64 as C64;
use std::path::Path;

/// Extracts the `sigma_z_bar` column from a previously emitted CSV.
fn sigma_z_from_scan(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config(format!("cannot read scan file {}: {e}", path.display()))
    })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{}: empty scan file", path.display())))?;
    let column = header
        .split(',')
        .position(|c| c == "sigma_z_bar")
        .ok_or_else(|| {
            CliError::config(format!("{}: no sigma_z_bar column", path.display()))
        })?;
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cell = line.split(',').nth(column).ok_or_else(|| {
            CliError::config(format!("{}: short row {}", path.display(), i + 2))
        })?;
        let v: f64 = cell.parse().map_err(|_| {
            CliError::config(format!("{}: bad number {cell:?} in row {}", path.display(), i + 2))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::config(format!(
            "{}: scan file holds no rows",
            path.display()
        )));
    }
    Ok(values)
}

pub fn run(r: &Resolved, out: &mut OutputWriter) -> Result<(), CliError> {
    let populations = match &r.readout_scan_file {
        Some(path) => sigma_z_from_scan(Path::new(path))?,
        None => r.readout_sigma_z.clone(),
    };
    let res = &r.resonator;
    let scale = res.drive_amplitude / res.kappa;

    // Cross-check plan: integrate the transient over 20/κ and compare with
    // the closed form at every recorded step.
    let dt = 2e-3 / res.kappa;
    let n_steps = 10_000usize;
    let plan = StepPlan::new(dt, n_steps as f64 * dt, 100)?;
    // A horizon long enough that the transient term has fully left the
    // closed form, leaving the steady field.
    let t_steady = 200.0 / res.kappa;

    let mut table = Table::new(
        "readout",
        &["sigma_z_bar", "amplitude", "i", "q", "phi", "closed_vs_ode"],
    );
    for &z in &populations {
        let steady = cavity_field_closed_form(res, z, C64::new(0.0, 0.0), t_steady);
        let series = cavity_field_ode(res, |_| z, C64::new(0.0, 0.0), &plan)?;
        let mut dev = 0.0f64;
        for (t, point) in series.times.iter().zip(&series.points) {
            let exact = cavity_field_closed_form(res, z, C64::new(0.0, 0.0), *t);
            dev = dev.max((point.a - exact.a).norm() / scale);
        }
        table.push(vec![
            z.into(),
            steady.amplitude.into(),
            steady.i.into(),
            steady.q.into(),
            steady.phase.into(),
            dev.into(),
        ]);
    }
    out.write_table(&table)?;
    Ok(())
}
