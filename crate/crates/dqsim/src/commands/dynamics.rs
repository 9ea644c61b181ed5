//! Bloch-vector dynamics under a resonant lab-frame drive, reported in the
//! frame rotating at the drive frequency; optionally sweeps damping and
//! summarizes solver agreement as windowed fidelities.

use super::{bath_at_gamma, gamma_suffix, sweep_gammas};
use crate::config::{FrequencyPolicy, Resolved, SolverName};
use crate::output::{OutputWriter, Table};
use crate::CliError;
use driven_qubit::algebra::{rotating_frame_bloch, DensityMatrix};
use driven_qubit::bath;
use driven_qubit::propagate::{
    avg_fidelity_over_window, default_dt, propagate_lme, propagate_sled_ensemble, DriveSpec,
    EnsemblePlan, LindbladModel, SledModel, StepPlan, TrajectorySeries,
};

enum SolverRun {
    Deterministic(TrajectorySeries),
    Ensemble(driven_qubit::propagate::EnsembleSeries),
}

pub fn run(r: &Resolved, out: &mut OutputWriter) -> Result<(), CliError> {
    let gammas = sweep_gammas(r);
    let want_fidelity = !r.gamma_list.is_empty()
        && r.solvers.contains(&SolverName::Sled)
        && r.solvers.iter().any(|s| *s != SolverName::Sled);
    let mut summary = Table::new(
        "dynamics_fidelity",
        &["gamma", "f_sled_lme", "f_sled_lme_nes"],
    );

    for (gi, &gamma) in gammas.iter().enumerate() {
        let bath_spec = bath_at_gamma(r, gamma)?;
        let rates = bath::rates(&bath_spec)?;
        let omega_d = match r.frequency_policy {
            FrequencyPolicy::Bare => r.omega_q,
            FrequencyPolicy::Shifted => r.omega_q + rates.delta_s,
        };
        let drive = DriveSpec::single(r.drive_amplitude, omega_d)?;

        // One shared step so every solver records the same grid; the
        // stochastic solver's cutoff-resolving bound applies when present.
        let omega_c_bound = if r.solvers.contains(&SolverName::Sled) {
            Some(bath_spec.omega_c)
        } else {
            None
        };
        let dt = r.dt_scale * default_dt(r.omega_q, &drive, omega_c_bound);
        let t_final = r.profile.horizon_scale() * r.t_final_over_gamma / gamma;
        let n_steps =
            (t_final / dt / r.record_stride as f64).ceil().max(1.0) as usize * r.record_stride;
        let plan = StepPlan::new(dt, n_steps as f64 * dt, r.record_stride)?;
        let rho0 = DensityMatrix::thermal(bath_spec.hbar_beta * r.omega_q);

        let mut runs: Vec<(SolverName, SolverRun)> = Vec::new();
        for &solver in &r.solvers {
            let result = match solver {
                SolverName::Lme | SolverName::LmeNes => {
                    let model = LindbladModel {
                        omega_q: r.omega_q,
                        bath_rates: rates.clone(),
                        drive: drive.clone(),
                        include_shift: solver.uses_shift(),
                    };
                    SolverRun::Deterministic(propagate_lme(&model, &rho0, &plan)?)
                }
                SolverName::Sled => {
                    let model = SledModel {
                        omega_q: r.omega_q,
                        bath: bath_spec,
                        drive: drive.clone(),
                    };
                    let ensemble = EnsemblePlan {
                        n_traj: r.n_traj,
                        base_seed: r.base_seed,
                    };
                    SolverRun::Ensemble(propagate_sled_ensemble(&model, &rho0, &plan, &ensemble)?)
                }
            };
            runs.push((solver, result));
        }

        for (solver, result) in &runs {
            let suffix = gamma_suffix(gammas.len(), gi);
            let name = format!("dynamics_{}{suffix}", solver.as_str());
            let table = match result {
                SolverRun::Deterministic(series) => {
                    let mut t = Table::new(&name, &["t", "sx", "sy", "sz"]);
                    for (time, state) in series.times.iter().zip(&series.states) {
                        let b = rotating_frame_bloch(state, omega_d, *time)?;
                        t.push(vec![(*time).into(), b.x.into(), b.y.into(), b.z.into()]);
                    }
                    t
                }
                SolverRun::Ensemble(series) => {
                    let mut t = Table::new(&name, &["t", "sx", "sy", "sz", "sz_stderr"]);
                    for ((time, state), se) in
                        series.times.iter().zip(&series.mean_states).zip(&series.stderr)
                    {
                        let b = rotating_frame_bloch(state, omega_d, *time)?;
                        t.push(vec![
                            (*time).into(),
                            b.x.into(),
                            b.y.into(),
                            b.z.into(),
                            se.z.into(),
                        ]);
                    }
                    t
                }
            };
            out.write_table(&table)?;
        }

        if want_fidelity {
            let sled = runs.iter().find_map(|(s, run)| match (s, run) {
                (SolverName::Sled, SolverRun::Ensemble(e)) => Some(e),
                _ => None,
            });
            let window = (0.0, plan.t_final);
            let fid_against = |name: SolverName| -> Result<f64, CliError> {
                for (s, run) in &runs {
                    if *s == name {
                        if let (Some(sled), SolverRun::Deterministic(lme)) = (sled, run) {
                            return Ok(avg_fidelity_over_window(sled, lme, window)?);
                        }
                    }
                }
                Ok(f64::NAN)
            };
            summary.push(vec![
                gamma.into(),
                fid_against(SolverName::Lme)?.into(),
                fid_against(SolverName::LmeNes)?.into(),
            ]);
        }
    }

    if want_fidelity {
        out.write_table(&summary)?;
    }
    Ok(())
}
