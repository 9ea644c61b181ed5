//! Pump–probe spectroscopy and bath-shift extraction.
//!
//! A strong drive dresses the qubit; a weak probe at a nearby frequency
//! beats against it and modulates the population.  Scanning the probe
//! frequency and recording the windowed time average of ⟨σ_z⟩ (and the
//! size of its residual oscillation) maps out the dressed-state sidebands.
//! The same machinery extracts the bath-induced frequency shift from
//! free-decay records by fitting a damped cosine to ⟨σ_x⟩(t).

use crate::algebra::DensityMatrix;
use crate::bath::{self, BathError, BathSpec};
use crate::fit::{self, FitError, LinearFit};
use crate::propagate::{
    bloch_series, default_dt, propagate_lme, propagate_sled_ensemble, DriveSpec, EnsemblePlan,
    LindbladModel, PropagateError, SledModel, StepPlan,
};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectroscopyError {
    #[error("invalid scan setup: {0}")]
    InvalidScan(String),
    #[error("averaging window [{t0}, {t1}] not covered by the recorded series: {detail}")]
    Window { t0: f64, t1: f64, detail: String },
    #[error(transparent)]
    Bath(#[from] BathError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Which evolution generates the scanned records.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// Weak-coupling master equation including the bath-induced shift of the
    /// qubit frequency.
    Lme,
    /// Same master equation with the frequency shift switched off.
    LmeNoShift,
    /// Stochastic ensemble solver; the shift emerges on its own.
    Sled,
}

/// Relative detuning below which the probe is treated as resonant with the
/// drive, where the beat period diverges and a fixed fallback window is used
/// instead.
const RESONANT_REL_TOL: f64 = 1e-9;

fn beat_window(omega_d: f64, omega_p: f64, n_p: usize, fallback: f64) -> f64 {
    let delta = omega_p - omega_d;
    if delta.abs() <= RESONANT_REL_TOL * (omega_d.abs() + omega_p.abs()) {
        fallback
    } else {
        n_p as f64 * TAU / delta.abs()
    }
}

/// Time average of ⟨σ_z⟩ over the last `n_p` beat periods before `t_f`
/// (trapezoidal rule on the recorded grid).  When probe and drive are
/// resonant the beat period diverges and the average is taken over the final
/// `fallback_window` instead.
pub fn time_average_sigma_z(
    times: &[f64],
    sigma_z: &[f64],
    omega_d: f64,
    omega_p: f64,
    n_p: usize,
    t_f: f64,
    fallback_window: f64,
) -> Result<f64, SpectroscopyError> {
    if times.len() != sigma_z.len() {
        return Err(SpectroscopyError::InvalidScan(
            "times/values length mismatch".into(),
        ));
    }
    if n_p == 0 || !(fallback_window > 0.0) {
        return Err(SpectroscopyError::InvalidScan(
            "need n_p ≥ 1 and a positive fallback window".into(),
        ));
    }
    let window = beat_window(omega_d, omega_p, n_p, fallback_window);
    windowed_trapezoid_mean(times, sigma_z, t_f - window, t_f)
}

fn window_indices(
    times: &[f64],
    t0: f64,
    t1: f64,
) -> Result<(usize, usize), SpectroscopyError> {
    if !(t1 > t0) || times.is_empty() {
        return Err(SpectroscopyError::Window {
            t0,
            t1,
            detail: "empty window or series".into(),
        });
    }
    let slack = 1e-9 * (t1 - t0);
    let lo = times.partition_point(|&t| t < t0 - slack);
    let hi = times.partition_point(|&t| t <= t1 + slack);
    if hi - lo < 2 {
        return Err(SpectroscopyError::Window {
            t0,
            t1,
            detail: format!("only {} recorded samples inside", hi - lo),
        });
    }
    Ok((lo, hi))
}

fn windowed_trapezoid_mean(
    times: &[f64],
    values: &[f64],
    t0: f64,
    t1: f64,
) -> Result<f64, SpectroscopyError> {
    let (lo, hi) = window_indices(times, t0, t1)?;
    let span = times[hi - 1] - times[lo];
    if span < 0.8 * (t1 - t0) {
        return Err(SpectroscopyError::Window {
            t0,
            t1,
            detail: format!(
                "recorded samples cover only {span:.3} of the {:.3} window",
                t1 - t0
            ),
        });
    }
    let mut integral = 0.0;
    for k in lo..hi - 1 {
        integral += 0.5 * (values[k] + values[k + 1]) * (times[k + 1] - times[k]);
    }
    Ok(integral / span)
}

/// Half the peak-to-peak excursion of `values` inside the window.
pub fn oscillation_amplitude(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> Result<f64, SpectroscopyError> {
    if times.len() != values.len() {
        return Err(SpectroscopyError::InvalidScan(
            "times/values length mismatch".into(),
        ));
    }
    let (lo, hi) = window_indices(times, window.0, window.1)?;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in &values[lo..hi] {
        min = min.min(v);
        max = max.max(v);
    }
    Ok(0.5 * (max - min))
}

/// One probe frequency of a scan: the windowed population average, the size
/// of the residual oscillation, and the horizon actually integrated to.
#[derive(Clone, Copy, Debug)]
pub struct ProbePoint {
    pub omega_p: f64,
    pub sigma_z_bar: f64,
    pub h_z: f64,
    pub t_f: f64,
}

/// Result of a probe-frequency scan.
#[derive(Clone, Debug)]
pub struct ProbeScan {
    /// Drive (pump) frequency the scan was centered on, after any
    /// bath-shift correction.
    pub omega_d: f64,
    /// Beat periods averaged per point.
    pub n_p: usize,
    pub points: Vec<ProbePoint>,
    pub warnings: Vec<String>,
}

impl ProbeScan {
    pub fn omega_p(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega_p).collect()
    }
    pub fn sigma_z_bar(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.sigma_z_bar).collect()
    }
    pub fn h_z(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.h_z).collect()
    }
}

/// Scan setup shared by every probe point.
#[derive(Clone, Debug)]
pub struct PumpProbeConfig {
    pub solver: SolverKind,
    pub omega_q: f64,
    /// Pump Rabi amplitude Ω_d.
    pub drive_amplitude: f64,
    /// Probe Rabi amplitude Ω_p; should stay well below the pump.
    pub probe_amplitude: f64,
    /// Beat periods to average over at each grid point.
    pub n_p: usize,
    /// Minimum horizon; each point runs to at least transient guard plus
    /// averaging window, whichever is longer.
    pub t_f_min: f64,
    /// Step override; defaults to the drive-resolving step for the chosen
    /// solver.
    pub dt: Option<f64>,
    /// Trajectory budget for the stochastic solver (ignored otherwise).
    pub ensemble: EnsemblePlan,
}

/// Probe-frequency scan of the driven, damped qubit.
///
/// The drive frequency follows the solver: solvers that know about the
/// bath-induced shift drive at the shifted splitting ω_q + Δ_s, the
/// shift-free master equation drives at the bare ω_q.  Each grid point
/// integrates from the thermal state through a transient guard of 10/γ and
/// then averages ⟨σ_z⟩ over `n_p` beat periods.
pub fn pump_probe_scan(
    cfg: &PumpProbeConfig,
    bath_spec: &BathSpec,
    omega_p_grid: &[f64],
) -> Result<ProbeScan, SpectroscopyError> {
    if omega_p_grid.is_empty() || omega_p_grid.iter().any(|w| !w.is_finite()) {
        return Err(SpectroscopyError::InvalidScan(
            "probe grid must be non-empty and finite".into(),
        ));
    }
    if !(cfg.drive_amplitude > 0.0) || !(cfg.probe_amplitude >= 0.0) || cfg.n_p == 0 {
        return Err(SpectroscopyError::InvalidScan(
            "need drive amplitude > 0, probe amplitude ≥ 0, n_p ≥ 1".into(),
        ));
    }
    let rates = bath::rates(bath_spec)?;
    if !(rates.gamma > 0.0) {
        return Err(SpectroscopyError::InvalidScan(
            "scan needs a dissipative bath (γ > 0)".into(),
        ));
    }
    let mut warnings = Vec::new();
    if cfg.probe_amplitude > 0.2 * cfg.drive_amplitude {
        warnings.push(format!(
            "probe amplitude {:.3e} exceeds 20% of the drive amplitude {:.3e}; \
             the weak-probe picture degrades",
            cfg.probe_amplitude, cfg.drive_amplitude
        ));
    }

    let omega_d = match cfg.solver {
        SolverKind::Lme | SolverKind::Sled => cfg.omega_q + rates.delta_s,
        SolverKind::LmeNoShift => cfg.omega_q,
    };
    let guard = 10.0 / rates.gamma;
    let fallback_window = 20.0 / cfg.drive_amplitude;
    let rho0 = DensityMatrix::thermal(bath_spec.hbar_beta * bath_spec.omega_q);

    let mut points = Vec::with_capacity(omega_p_grid.len());
    for &omega_p in omega_p_grid {
        let drive = DriveSpec::pump_probe(
            cfg.drive_amplitude,
            omega_d,
            cfg.probe_amplitude,
            omega_p,
        )?;
        let dt = cfg.dt.unwrap_or_else(|| {
            let cutoff = match cfg.solver {
                SolverKind::Sled => Some(bath_spec.omega_c),
                _ => None,
            };
            default_dt(cfg.omega_q, &drive, cutoff)
        });
        let window = beat_window(omega_d, omega_p, cfg.n_p, fallback_window);
        let t_f = cfg.t_f_min.max(guard + window);
        // Keep at least ~128 samples per beat period in the record without
        // storing every step of the long transient.
        let target_records = match beat_window(omega_d, omega_p, 1, fallback_window) {
            p if p < window => 128.0 * window / p,
            _ => 512.0,
        };
        let stride = ((window / (dt * target_records)).floor() as usize).max(1);
        let plan = StepPlan::new(dt, t_f, stride)?;

        let (times, z): (Vec<f64>, Vec<f64>) = match cfg.solver {
            SolverKind::Lme | SolverKind::LmeNoShift => {
                let model = LindbladModel {
                    omega_q: cfg.omega_q,
                    bath_rates: rates,
                    drive,
                    include_shift: cfg.solver == SolverKind::Lme,
                };
                let series = propagate_lme(&model, &rho0, &plan)?;
                let bloch = bloch_series(&series)?;
                (series.times, bloch.iter().map(|b| b.z).collect())
            }
            SolverKind::Sled => {
                let model = SledModel {
                    omega_q: cfg.omega_q,
                    bath: *bath_spec,
                    drive,
                };
                let series = propagate_sled_ensemble(&model, &rho0, &plan, &cfg.ensemble)?;
                let bloch = bloch_series(&series)?;
                (series.times, bloch.iter().map(|b| b.z).collect())
            }
        };
        let sigma_z_bar = time_average_sigma_z(
            &times,
            &z,
            omega_d,
            omega_p,
            cfg.n_p,
            t_f,
            fallback_window,
        )?;
        let h_z = oscillation_amplitude(&times, &z, (t_f - window, t_f))?;
        points.push(ProbePoint {
            omega_p,
            sigma_z_bar,
            h_z,
            t_f,
        });
    }
    Ok(ProbeScan {
        omega_d,
        n_p: cfg.n_p,
        points,
        warnings,
    })
}

/// Weak-coupling window for shift extraction, with one-part-in-10⁹ slack so
/// that dampings constructed to sit exactly on an endpoint survive the
/// η ↔ γ round trip.
fn in_shift_window(gamma: f64, omega_q: f64) -> bool {
    gamma >= 5e-4 * omega_q * (1.0 - 1e-9) && gamma <= 0.1 * omega_q * (1.0 + 1e-9)
}

/// How the frequency shift is measured at each damping value.
#[derive(Clone, Debug)]
pub enum ShiftMethod {
    /// Evaluate the bath-integral expression directly.
    Analytic,
    /// Run free-decay ensembles with the stochastic solver and fit the
    /// oscillation frequency of ⟨σ_x⟩(t).
    SledFit {
        ensemble: EnsemblePlan,
        /// Integration horizon; `None` picks ≈ 3 transverse decay times.
        horizon: Option<f64>,
        dt: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct ShiftPoint {
    pub gamma: f64,
    pub delta_s: f64,
    /// 1σ uncertainty of the extracted shift (zero for the analytic route).
    pub uncertainty: f64,
}

/// Frequency shift versus damping, with a straight-line summary fit.
#[derive(Clone, Debug)]
pub struct ShiftScan {
    pub points: Vec<ShiftPoint>,
    pub line: LinearFit,
}

/// Measures the bath-induced frequency shift at a single damping value,
/// either from the bath integral or from a stochastic free-decay fit.
pub fn measure_shift(
    spec: &BathSpec,
    method: &ShiftMethod,
) -> Result<ShiftPoint, SpectroscopyError> {
    let gamma = spec.gamma();
    if !(gamma > 0.0) || !in_shift_window(gamma, spec.omega_q) {
        return Err(SpectroscopyError::InvalidScan(format!(
            "damping {gamma:.3e} outside the weak-coupling window [5e-4, 1e-1]·ω_q"
        )));
    }
    match method {
        ShiftMethod::Analytic => Ok(ShiftPoint {
            gamma,
            delta_s: bath::energy_shift(spec)?,
            uncertainty: 0.0,
        }),
        ShiftMethod::SledFit {
            ensemble,
            horizon,
            dt,
        } => {
            let rates = bath::rates(spec)?;
            let t_final = horizon.unwrap_or(6.0 / rates.gamma_beta);
            let drive = DriveSpec::free();
            let dt = dt.unwrap_or_else(|| default_dt(spec.omega_q, &drive, Some(spec.omega_c)));
            // ≥ 16 samples per carrier period keeps the frequency fit
            // well conditioned without recording every step.
            let stride = ((TAU / spec.omega_q / (16.0 * dt)).floor() as usize).max(1);
            let plan = StepPlan::new(dt, t_final, stride)?;
            let model = SledModel {
                omega_q: spec.omega_q,
                bath: *spec,
                drive,
            };
            let rho0 = DensityMatrix::plus_x();
            let series = propagate_sled_ensemble(&model, &rho0, &plan, ensemble)?;
            let bloch = bloch_series(&series)?;
            let xs: Vec<f64> = bloch.iter().map(|b| b.x).collect();
            let fitres = fit::fit_damped_cosine(&series.times, &xs)?;
            Ok(ShiftPoint {
                gamma,
                delta_s: fitres.frequency - spec.omega_q,
                uncertainty: fitres.stderr[2],
            })
        }
    }
}

/// Measures the bath-induced frequency shift across a grid of damping rates
/// (all other bath parameters taken from `template`) and fits Δ_s versus γ
/// to a straight line.
pub fn shift_scan(
    template: &BathSpec,
    gamma_grid: &[f64],
    method: &ShiftMethod,
) -> Result<ShiftScan, SpectroscopyError> {
    if gamma_grid.len() < 2 {
        return Err(SpectroscopyError::InvalidScan(
            "need at least two damping values".into(),
        ));
    }
    for &g in gamma_grid {
        if !(g > 0.0) || !in_shift_window(g, template.omega_q) {
            return Err(SpectroscopyError::InvalidScan(format!(
                "damping {g:.3e} outside the weak-coupling window [5e-4, 1e-1]·ω_q"
            )));
        }
    }
    let mut points = Vec::with_capacity(gamma_grid.len());
    for &gamma in gamma_grid {
        let spec =
            BathSpec::from_gamma(gamma, template.omega_c, template.hbar_beta, template.omega_q)?;
        points.push(measure_shift(&spec, method)?);
    }
    let gs: Vec<f64> = points.iter().map(|p| p.gamma).collect();
    let ds: Vec<f64> = points.iter().map(|p| p.delta_s).collect();
    let line = fit::linear_fit(&gs, &ds)?;
    Ok(ShiftScan { points, line })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_averages_to_itself() {
        let times: Vec<f64> = (0..1000).map(|i| i as f64 * 0.1).collect();
        let values = vec![0.42; 1000];
        let avg = time_average_sigma_z(&times, &values, 10.0, 10.5, 5, 99.9, 1.0).unwrap();
        assert!((avg - 0.42).abs() < 1e-14);
    }

    #[test]
    fn whole_periods_of_a_beat_average_to_zero() {
        // Beat detuning 0.5 rad/ns → period 4π; average over 3 periods.
        let dt = 0.001;
        let times: Vec<f64> = (0..60000).map(|i| i as f64 * dt).collect();
        let values: Vec<f64> = times.iter().map(|&t| (0.5 * t).sin()).collect();
        let t_f = times[times.len() - 1];
        let avg = time_average_sigma_z(&times, &values, 10.0, 10.5, 3, t_f, 1.0).unwrap();
        assert!(avg.abs() < 1e-4, "average {avg}");
        let h = oscillation_amplitude(&times, &values, (t_f - 3.0 * 4.0 * std::f64::consts::PI, t_f))
            .unwrap();
        assert!((h - 1.0).abs() < 1e-4);
    }

    #[test]
    fn window_outside_series_is_rejected() {
        let times: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let values = vec![0.0; 100];
        assert!(matches!(
            time_average_sigma_z(&times, &values, 1.0, 1.1, 5, 500.0, 1.0),
            Err(SpectroscopyError::Window { .. })
        ));
    }

    #[test]
    fn analytic_shift_scan_is_linear_in_damping() {
        let omega_q = TAU * 5.0;
        let template = BathSpec::new(5e-3, 50.0 * omega_q, 5.0 / omega_q, omega_q).unwrap();
        let grid = [0.005 * omega_q, 0.01 * omega_q, 0.02 * omega_q];
        let scan = shift_scan(&template, &grid, &ShiftMethod::Analytic).unwrap();
        assert!(scan.line.r_squared > 1.0 - 1e-12);
        assert!(scan.line.slope < 0.0);
        // The shift is a pure multiple of γ for this cutoff and temperature.
        assert!(
            (scan.line.slope + 1.036).abs() < 5e-3,
            "slope {}",
            scan.line.slope
        );
        for p in &scan.points {
            assert!(p.delta_s < 0.0);
        }
    }

    #[test]
    fn lme_pump_probe_smoke() {
        let omega_q = TAU * 5.0;
        let bath_spec = BathSpec::from_gamma(0.3, 50.0 * omega_q, 5.0 / omega_q, omega_q).unwrap();
        let cfg = PumpProbeConfig {
            solver: SolverKind::Lme,
            omega_q,
            drive_amplitude: TAU * 0.05,
            probe_amplitude: TAU * 0.005,
            n_p: 2,
            t_f_min: 0.0,
            dt: None,
            ensemble: EnsemblePlan {
                n_traj: 1,
                base_seed: 1,
            },
        };
        let center = omega_q + bath::rates(&bath_spec).unwrap().delta_s;
        let grid = [center - 0.5, center, center + 0.5];
        let scan = pump_probe_scan(&cfg, &bath_spec, &grid).unwrap();
        assert_eq!(scan.points.len(), 3);
        assert!((scan.omega_d - center).abs() < 1e-12);
        assert!(scan.warnings.is_empty());
        for p in &scan.points {
            assert!(p.sigma_z_bar.is_finite() && p.sigma_z_bar.abs() <= 1.0);
            assert!(p.h_z >= 0.0 && p.h_z <= 1.0);
        }
        // The resonant midpoint uses the fallback horizon: guard + 20/Ω_d.
        let guard = 10.0 / 0.3;
        assert!((scan.points[1].t_f - (guard + 20.0 / (TAU * 0.05))).abs() < 1e-9);
    }
}
