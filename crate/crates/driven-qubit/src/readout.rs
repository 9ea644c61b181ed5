//! Semiclassical dispersive readout: a driven, damped resonator whose
//! frequency is pulled by the qubit population.
//!
//! The resonator is never co-propagated with the qubit.  The qubit dynamics
//! are solved first; the resulting population (or its windowed average) is
//! fed into the linear cavity equation
//!
//! ȧ = −iΩ_m/2 − [iΔ_rm + iχ·σ_z(t) + κ/2]·a,
//!
//! which has a closed-form solution for constant σ_z and a cheap Runge–Kutta
//! integration for time-dependent input.  Transmission amplitude and phase
//! follow directly from the field.

use crate::propagate::StepPlan;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReadoutError {
    #[error("invalid resonator: {0}")]
    InvalidSpec(String),
    #[error("integration step unstable: kappa*dt = {kappa_dt:.3} exceeds 0.5")]
    UnstableStep { kappa_dt: f64 },
    #[error(
        "transmitted_amplitude requires a resonant measurement tone (Delta_rm = 0, got \
         {delta_rm:.3e}); use cavity_field_closed_form for detuned operation"
    )]
    DetunedResonator { delta_rm: f64 },
}

/// Driven readout resonator, dispersively coupled to the qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonatorSpec {
    /// Bare resonator frequency ω_r (rad/ns).
    pub omega_r: f64,
    /// Photon decay rate κ (rad/ns).
    pub kappa: f64,
    /// Dispersive shift χ (rad/ns); negative for a qubit above the cavity.
    pub chi: f64,
    /// Measurement drive amplitude Ω_m (rad/ns).
    pub drive_amplitude: f64,
    /// Measurement drive frequency ω_m (rad/ns).
    pub drive_frequency: f64,
}

impl ResonatorSpec {
    pub fn new(
        omega_r: f64,
        kappa: f64,
        chi: f64,
        drive_amplitude: f64,
        drive_frequency: f64,
    ) -> Result<Self, ReadoutError> {
        let spec = Self {
            omega_r,
            kappa,
            chi,
            drive_amplitude,
            drive_frequency,
        };
        if ![omega_r, kappa, chi, drive_amplitude, drive_frequency]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(ReadoutError::InvalidSpec("non-finite parameter".into()));
        }
        if !(kappa > 0.0) {
            return Err(ReadoutError::InvalidSpec(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if drive_amplitude < 0.0 {
            return Err(ReadoutError::InvalidSpec(format!(
                "drive amplitude must be ≥ 0, got {drive_amplitude}"
            )));
        }
        Ok(spec)
    }

    /// Measurement-tone detuning Δ_rm = ω_r − ω_m.
    pub fn delta_rm(&self) -> f64 {
        self.omega_r - self.drive_frequency
    }

    /// Complex cavity pole μ(σ_z) = i(Δ_rm + χσ_z) + κ/2.
    fn pole(&self, sigma_z: f64) -> C64 {
        C64::new(0.5 * self.kappa, self.delta_rm() + self.chi * sigma_z)
    }
}

/// Transmitted field at one instant: complex amplitude plus derived
/// quadratures, magnitude, and phase on the branch (−π, π].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPoint {
    pub a: C64,
    /// In-phase quadrature I = Re a.
    pub i: f64,
    /// Out-of-phase quadrature Q = Im a.
    pub q: f64,
    /// Amplitude A = √(I² + Q²).
    pub amplitude: f64,
    /// Phase arg(a) ∈ (−π, π].
    pub phase: f64,
}

impl FieldPoint {
    pub fn from_field(a: C64) -> Self {
        let (i, q, amplitude, phase) = quadratures_phase(a);
        Self {
            a,
            i,
            q,
            amplitude,
            phase,
        }
    }

    /// Field in units of the overdamped resonant response Ω_m/κ.
    pub fn normalized(&self, res: &ResonatorSpec) -> C64 {
        if res.drive_amplitude == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            self.a * (res.kappa / res.drive_amplitude)
        }
    }
}

/// Quadratures, amplitude, and phase of a complex field; the phase uses the
/// branch (−π, π] (a = −1 reports +π).
pub fn quadratures_phase(a: C64) -> (f64, f64, f64, f64) {
    let i = a.re;
    let q = a.im;
    let amplitude = a.norm();
    let mut phase = q.atan2(i);
    if phase <= -std::f64::consts::PI {
        phase = std::f64::consts::PI;
    }
    (i, q, amplitude, phase)
}

/// Exact cavity field for constant qubit population:
/// a(t) = a₀e^{−μt} − (iΩ_m/2)·(1 − e^{−μt})/μ with μ = i(Δ_rm + χσ̄_z) + κ/2.
/// For t → ∞ this settles to the fixed point −iΩ_m/(κ + 2i(Δ_rm + χσ̄_z)).
pub fn cavity_field_closed_form(
    res: &ResonatorSpec,
    sigma_z_bar: f64,
    a0: C64,
    t: f64,
) -> FieldPoint {
    assert!(t >= 0.0, "cavity field requested at negative time {t}");
    let mu = res.pole(sigma_z_bar);
    let decay = (-mu * t).exp();
    let drive = C64::new(0.0, -0.5 * res.drive_amplitude);
    // κ > 0 keeps Re μ > 0, so the resolvent never becomes singular.
    let a = a0 * decay + drive * (C64::new(1.0, 0.0) - decay) / mu;
    FieldPoint::from_field(a)
}

/// Cavity field series under a time-dependent population, recorded on the
/// plan's stride grid.
#[derive(Clone, Debug)]
pub struct FieldSeries {
    pub times: Vec<f64>,
    pub points: Vec<FieldPoint>,
}

/// Classical 4th-order Runge–Kutta integration of the cavity equation with
/// σ_z supplied as a function of time.  Serves as the numerical oracle for
/// the closed form and handles the general time-dependent case.
pub fn cavity_field_ode<F>(
    res: &ResonatorSpec,
    sigma_z_of_t: F,
    a0: C64,
    plan: &StepPlan,
) -> Result<FieldSeries, ReadoutError>
where
    F: Fn(f64) -> f64,
{
    let kappa_dt = res.kappa * plan.dt;
    if kappa_dt > 0.5 {
        return Err(ReadoutError::UnstableStep { kappa_dt });
    }
    let drive = C64::new(0.0, -0.5 * res.drive_amplitude);
    let rhs = |t: f64, a: C64| drive - res.pole(sigma_z_of_t(t)) * a;

    let n_steps = plan.n_steps();
    let dt = plan.dt;
    let mut a = a0;
    let mut times = Vec::new();
    let mut points = Vec::new();
    times.push(0.0);
    points.push(FieldPoint::from_field(a));
    for k in 0..n_steps {
        let t = k as f64 * dt;
        let k1 = rhs(t, a);
        let k2 = rhs(t + 0.5 * dt, a + k1 * (0.5 * dt));
        let k3 = rhs(t + 0.5 * dt, a + k2 * (0.5 * dt));
        let k4 = rhs(t + dt, a + k3 * dt);
        a += (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
        let step = k + 1;
        if step % plan.record_stride == 0 || step == n_steps {
            times.push(step as f64 * dt);
            points.push(FieldPoint::from_field(a));
        }
    }
    Ok(FieldSeries { times, points })
}

/// Long-time transmitted amplitude for a resonant measurement tone:
/// A = (Ω_m/κ)/√(1 + (2χσ̄_z/κ)²).  Valid only at Δ_rm = 0; detuned
/// operation must evaluate the closed form instead.
pub fn transmitted_amplitude(res: &ResonatorSpec, sigma_z_bar: f64) -> Result<f64, ReadoutError> {
    let delta_rm = res.delta_rm();
    if delta_rm.abs() > 1e-9 * res.kappa {
        return Err(ReadoutError::DetunedResonator { delta_rm });
    }
    let x = 2.0 * res.chi * sigma_z_bar / res.kappa;
    Ok(res.drive_amplitude / res.kappa / (1.0 + x * x).sqrt())
}
