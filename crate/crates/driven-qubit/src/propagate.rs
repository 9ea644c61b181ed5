//! Time-dependent Liouvillians for the Lindblad and SLED equations of the
//! driven qubit, a second-order Magnus stepper in Liouville space, and
//! single-trajectory / ensemble propagation with deterministic seeding.
//!
//! Both solvers integrate dvec(ρ)/dt = L(t)·vec(ρ) by the midpoint Magnus
//! rule: state ← exp(dt·L(t+dt/2))·state.  The Lindblad generator is
//!
//!   L(t) = −i[H_S + H_s + H_d(t), ·] + Γ↓ D(|0⟩⟨1|) + Γ↑ D(|1⟩⟨0|),
//!
//! with H_S = −ω_q σ_z/2, the optional bath-induced shift H_s = −Δ_s σ_z/2,
//! and H_d(t) = f(t)σ_x.  The SLED generator replaces the golden-rule rates
//! by a colored-noise force plus two deterministic friction terms:
//!
//!   L(t) = −i[H_S + (f(t) − ξ(t))σ_x, ·] − (η/ħβ)[σ_x,[σ_x, ·]]
//!          − i(ηω_q/2)[σ_x, {σ_y, ·}],
//!
//! where ξ(t) is a realization from [`crate::noise`].  A single SLED
//! trajectory is deterministic given its noise record; the physical state is
//! the trajectory average.

use crate::algebra::{
    commutator_superop, devectorize, exp_action, identity2, kron2, matrix_exp, sigma_x, sigma_y,
    sigma_z, to_bloch, vectorize, AlgebraError, BlochVector, DensityMatrix, LiouvilleVector, Mat2,
    Superoperator, Vec4,
};
use crate::bath::{BathRates, BathSpec};
use crate::noise::{build_kernel, synthesize, NoiseError, NoiseGrid, NoiseTrajectory};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PropagateError {
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid step plan: {0}")]
    InvalidPlan(String),
    #[error("noise grid incompatible with step plan: {0}")]
    GridMismatch(String),
    #[error("state left tolerance at t = {t}: {detail}; reduce the step size")]
    Unphysical { t: f64, detail: String },
    #[error("empty or uncovered comparison window [{t0}, {t1}]")]
    EmptyWindow { t0: f64, t1: f64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// One monochromatic drive tone Ω cos(ωt + φ) multiplying σ_x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tone {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

/// Classical drive f(t) = Σ_k Ω_k cos(ω_k t + φ_k) entering as H_d = f(t)σ_x.
///
/// In `rwa` mode the single permitted tone is treated in the rotating-wave
/// approximation: propagation happens in the frame co-rotating at the tone
/// frequency and recorded states are rotating-frame states.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSpec {
    pub tones: Vec<Tone>,
    pub rwa: bool,
}

impl DriveSpec {
    pub fn new(tones: Vec<Tone>, rwa: bool) -> Result<Self, PropagateError> {
        for t in &tones {
            if !(t.amplitude >= 0.0) || !t.amplitude.is_finite() {
                return Err(PropagateError::InvalidDrive(format!(
                    "tone amplitude {} must be ≥ 0",
                    t.amplitude
                )));
            }
            if !(t.frequency >= 0.0) || !t.frequency.is_finite() || !t.phase.is_finite() {
                return Err(PropagateError::InvalidDrive(
                    "tone frequency must be ≥ 0 and finite, phase finite".into(),
                ));
            }
        }
        if rwa && tones.len() != 1 {
            return Err(PropagateError::InvalidDrive(format!(
                "rwa mode needs exactly one tone, got {}",
                tones.len()
            )));
        }
        Ok(Self { tones, rwa })
    }

    /// No drive at all.
    pub fn free() -> Self {
        Self {
            tones: Vec::new(),
            rwa: false,
        }
    }

    /// Single lab-frame cosine tone with zero phase.
    pub fn single(amplitude: f64, frequency: f64) -> Result<Self, PropagateError> {
        Self::new(
            vec![Tone {
                amplitude,
                frequency,
                phase: 0.0,
            }],
            false,
        )
    }

    /// Drive plus a π/2-shifted probe tone.
    pub fn pump_probe(
        omega_d_amp: f64,
        omega_d: f64,
        omega_p_amp: f64,
        omega_p: f64,
    ) -> Result<Self, PropagateError> {
        Self::new(
            vec![
                Tone {
                    amplitude: omega_d_amp,
                    frequency: omega_d,
                    phase: 0.0,
                },
                Tone {
                    amplitude: omega_p_amp,
                    frequency: omega_p,
                    phase: std::f64::consts::FRAC_PI_2,
                },
            ],
            false,
        )
    }

    /// Single tone handled in the rotating-wave approximation.
    pub fn rwa_tone(amplitude: f64, frequency: f64) -> Result<Self, PropagateError> {
        Self::new(
            vec![Tone {
                amplitude,
                frequency,
                phase: 0.0,
            }],
            true,
        )
    }

    /// Largest tone frequency (0 for a free evolution); sets the step-size
    /// resolution requirement together with ω_q.
    pub fn max_frequency(&self) -> f64 {
        self.tones.iter().map(|t| t.frequency).fold(0.0, f64::max)
    }
}

/// Lab-frame drive value f(t); only meaningful outside RWA mode.
pub fn drive_value(drive: &DriveSpec, t: f64) -> Result<f64, PropagateError> {
    if drive.rwa {
        return Err(PropagateError::InvalidDrive(
            "drive_value is a lab-frame scalar; rwa mode uses the rotating-frame generator".into(),
        ));
    }
    Ok(drive
        .tones
        .iter()
        .map(|tone| tone.amplitude * (tone.frequency * t + tone.phase).cos())
        .sum())
}

/// Lindblad master equation of the driven qubit.  `include_shift` toggles the
/// bath-induced σ_z shift term; excluding it gives the "no-energy-shift"
/// variant used as a comparison point.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    pub omega_q: f64,
    pub bath_rates: BathRates,
    pub drive: DriveSpec,
    pub include_shift: bool,
}

impl LindbladModel {
    /// Effective qubit frequency entering the σ_z commutator.
    pub fn omega_eff(&self) -> f64 {
        self.omega_q + if self.include_shift { self.bath_rates.delta_s } else { 0.0 }
    }

    fn validate(&self) -> Result<(), PropagateError> {
        if !(self.omega_q > 0.0) {
            return Err(PropagateError::InvalidModel(format!(
                "omega_q = {} must be > 0",
                self.omega_q
            )));
        }
        let r = &self.bath_rates;
        if !(r.gamma_down >= 0.0 && r.gamma_up >= 0.0 && r.gamma_beta >= 0.0) {
            return Err(PropagateError::InvalidModel("negative bath rate".into()));
        }
        Ok(())
    }
}

/// Stochastic Liouville equation with dissipation for the same qubit; the
/// bath enters through (η, ħβ) and the synthesized noise, never through
/// golden-rule rates.  The drive must be a lab-frame (non-RWA) field.
#[derive(Clone, Debug, PartialEq)]
pub struct SledModel {
    pub omega_q: f64,
    pub bath: BathSpec,
    pub drive: DriveSpec,
}

impl SledModel {
    fn validate(&self) -> Result<(), PropagateError> {
        if self.drive.rwa {
            return Err(PropagateError::InvalidModel(
                "SLED propagates in the lab frame; rwa drive is not supported".into(),
            ));
        }
        if !(self.omega_q > 0.0) {
            return Err(PropagateError::InvalidModel(format!(
                "omega_q = {} must be > 0",
                self.omega_q
            )));
        }
        if !(self.bath.eta >= 0.0) {
            return Err(PropagateError::InvalidModel("negative coupling".into()));
        }
        Ok(())
    }
}

/// Fixed-step integration plan.  `record_stride` keeps every k-th state
/// (index 0 is always kept).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
}

impl StepPlan {
    pub fn new(dt: f64, t_final: f64, record_stride: usize) -> Result<Self, PropagateError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(PropagateError::InvalidPlan(format!("dt = {dt} must be > 0")));
        }
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(PropagateError::InvalidPlan(format!(
                "t_final = {t_final} must be ≥ 0"
            )));
        }
        if record_stride == 0 {
            return Err(PropagateError::InvalidPlan("record_stride must be ≥ 1".into()));
        }
        Ok(Self {
            dt,
            t_final,
            record_stride,
        })
    }

    /// Number of integrator steps covering `t_final`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Default step size: 1/64 of the fastest drive/qubit period, further capped
/// to π/(8ω_c) when a bath cutoff must be resolved (SLED noise bandwidth).
pub fn default_dt(omega_q: f64, drive: &DriveSpec, omega_c: Option<f64>) -> f64 {
    let omega_fast = omega_q.max(drive.max_frequency());
    let mut dt = 2.0 * std::f64::consts::PI / (64.0 * omega_fast);
    if let Some(wc) = omega_c {
        dt = dt.min(std::f64::consts::PI / (8.0 * wc));
    }
    dt
}

/// Trajectory-count and seeding contract for ensemble runs; trajectory i uses
/// seed `base_seed + i`, which makes results independent of worker count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsemblePlan {
    pub n_traj: usize,
    pub base_seed: u64,
}

/// States of one deterministic run on the recorded time grid.
#[derive(Clone, Debug)]
pub struct TrajectorySeries {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

/// Trajectory-averaged states plus a per-time standard error of each Bloch
/// component estimated from the trajectory-to-trajectory spread.
#[derive(Clone, Debug)]
pub struct EnsembleSeries {
    pub times: Vec<f64>,
    pub mean_states: Vec<DensityMatrix>,
    pub stderr: Vec<BlochVector>,
    pub n_traj: usize,
}

/// Anything that exposes a recorded time grid of states.
pub trait Series {
    fn times(&self) -> &[f64];
    fn states(&self) -> &[DensityMatrix];
}

impl Series for TrajectorySeries {
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn states(&self) -> &[DensityMatrix] {
        &self.states
    }
}

impl Series for EnsembleSeries {
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn states(&self) -> &[DensityMatrix] {
        &self.mean_states
    }
}

/// Bloch components of every recorded state.
pub fn bloch_series<S: Series>(series: &S) -> Result<Vec<BlochVector>, PropagateError> {
    series
        .states()
        .iter()
        .map(|s| to_bloch(s).map_err(PropagateError::from))
        .collect()
}

// ---------------------------------------------------------------------------
// Generator assembly
// ---------------------------------------------------------------------------

fn commutator_of_sigma_x() -> Superoperator {
    commutator_superop(&sigma_x()).expect("σ_x is Hermitian")
}

/// Constant part of the Lindblad generator plus the σ_x commutator that the
/// drive multiplies.
fn lme_parts(model: &LindbladModel) -> (Superoperator, Superoperator) {
    let h0 = sigma_z() * C64::new(-0.5 * model.omega_eff(), 0.0);
    let mut l0 = commutator_superop(&h0).expect("σ_z is Hermitian");
    let down = crate::algebra::dissipator_superop(0, 1) * model.bath_rates.gamma_down;
    let up = crate::algebra::dissipator_superop(1, 0) * model.bath_rates.gamma_up;
    l0 = l0 + down + up;
    (l0, commutator_of_sigma_x())
}

/// Rotating-frame generator for the single-tone RWA drive: constant in time,
/// with detuning Δ_q = ω_eff − ω_d and the tone phase rotating the transverse
/// drive axis.
fn rwa_generator(model: &LindbladModel) -> Superoperator {
    let tone = model.drive.tones[0];
    let detuning = model.omega_eff() - tone.frequency;
    let (s, c) = tone.phase.sin_cos();
    let h = sigma_z() * C64::new(-0.5 * detuning, 0.0)
        + sigma_x() * C64::new(0.5 * tone.amplitude * c, 0.0)
        + sigma_y() * C64::new(-0.5 * tone.amplitude * s, 0.0);
    let mut l = commutator_superop(&h).expect("rotating-frame Hamiltonian is Hermitian");
    l = l + crate::algebra::dissipator_superop(0, 1) * model.bath_rates.gamma_down;
    l + crate::algebra::dissipator_superop(1, 0) * model.bath_rates.gamma_up
}

/// Full Lindblad generator at time t.  In RWA mode the generator is constant
/// (the rotating frame absorbs the carrier) and `t` is ignored.
pub fn lme_liouvillian(model: &LindbladModel, t: f64) -> Result<Superoperator, PropagateError> {
    model.validate()?;
    if model.drive.rwa {
        return Ok(rwa_generator(model));
    }
    let (l0, c_sx) = lme_parts(model);
    Ok(l0 + c_sx * drive_value(&model.drive, t)?)
}

/// Constant part of the SLED generator: free precession, the ħβ-scaled
/// double-commutator damping, and the friction anticommutator.
fn sled_constant_part(model: &SledModel) -> Superoperator {
    let h0 = sigma_z() * C64::new(-0.5 * model.omega_q, 0.0);
    let unitary = commutator_superop(&h0).expect("σ_z is Hermitian");

    let id = identity2();
    let left_x = kron2(&id, &sigma_x());
    let right_x = kron2(&sigma_x().transpose(), &id);
    let comm_x = left_x - right_x;
    // [σ_x,[σ_x, ·]] with weight −η/(ħβ).
    let double_comm = Superoperator(comm_x * comm_x) * (-model.bath.eta / model.bath.hbar_beta);
    // −i(ηω_q/2)[σ_x, {σ_y, ·}].
    let anti_y = kron2(&id, &sigma_y()) + kron2(&sigma_y().transpose(), &id);
    let friction =
        Superoperator(comm_x * anti_y) * C64::new(0.0, -0.5 * model.bath.eta * model.omega_q);

    unitary + double_comm + friction
}

/// Full SLED generator at time t for an instantaneous noise value ξ.
pub fn sled_liouvillian(
    model: &SledModel,
    t: f64,
    xi: f64,
) -> Result<Superoperator, PropagateError> {
    model.validate()?;
    if !xi.is_finite() {
        return Err(PropagateError::InvalidModel(format!("non-finite noise value {xi}")));
    }
    let l0 = sled_constant_part(model);
    Ok(l0 + commutator_of_sigma_x() * (drive_value(&model.drive, t)? - xi))
}

/// One second-order Magnus step: state ← exp(dt·L(t + dt/2))·state.
pub fn magnus2_step<F: Fn(f64) -> Superoperator>(
    l_of_t: F,
    t: f64,
    dt: f64,
    state: &LiouvilleVector,
) -> LiouvilleVector {
    let l_mid = l_of_t(t + 0.5 * dt);
    exp_action(&l_mid, dt, state)
}

// ---------------------------------------------------------------------------
// Propagation drivers
// ---------------------------------------------------------------------------

/// Per-record state checks shared by both solvers.
fn check_recorded(
    state: &Mat2,
    t: f64,
    require_positive: bool,
) -> Result<DensityMatrix, PropagateError> {
    let tr = state[(0, 0)] + state[(1, 1)];
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(PropagateError::Unphysical {
            t,
            detail: format!("trace drifted to {tr}"),
        });
    }
    let herm = crate::algebra::hermiticity_residue(state);
    if herm > 1e-9 {
        return Err(PropagateError::Unphysical {
            t,
            detail: format!("Hermiticity residue {herm:.3e}"),
        });
    }
    let dm = DensityMatrix::new_unchecked(*state);
    if require_positive && !dm.is_physical(1e-8) {
        return Err(PropagateError::Unphysical {
            t,
            detail: format!("negative eigenvalue {:.3e}", dm.eigenvalues().0),
        });
    }
    Ok(dm)
}

/// Integrates the Lindblad equation.  In RWA mode the recorded states live in
/// the frame rotating at the drive frequency; otherwise they are lab-frame.
pub fn propagate_lme(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    plan: &StepPlan,
) -> Result<TrajectorySeries, PropagateError> {
    model.validate()?;
    let n_steps = plan.n_steps();
    let dt = plan.dt;
    let mut state = vectorize(rho0);
    let mut times = Vec::new();
    let mut states = Vec::new();

    let mut record = |k: usize, v: &LiouvilleVector| -> Result<(), PropagateError> {
        let t = k as f64 * dt;
        let dm = check_recorded(devectorize(v).mat(), t, true)?;
        times.push(t);
        states.push(dm);
        Ok(())
    };

    record(0, &state)?;
    if model.drive.rwa {
        // Constant generator: exponentiate once, then repeatedly apply.
        let step = matrix_exp(&(rwa_generator(model) * dt))?;
        for k in 1..=n_steps {
            state = step.apply(&state);
            if k % plan.record_stride == 0 {
                record(k, &state)?;
            }
        }
    } else {
        let (l0, c_sx) = lme_parts(model);
        for k in 1..=n_steps {
            let t_mid = (k as f64 - 0.5) * dt;
            let l = l0 + c_sx * drive_value(&model.drive, t_mid)?;
            state = exp_action(&l, dt, &state);
            if k % plan.record_stride == 0 {
                record(k, &state)?;
            }
        }
    }
    Ok(TrajectorySeries { times, states })
}

fn check_noise_alignment(
    plan: &StepPlan,
    noise: &NoiseTrajectory,
) -> Result<usize, PropagateError> {
    let dt_half = 0.5 * plan.dt;
    if (noise.grid.dt - dt_half).abs() > 1e-9 * dt_half {
        return Err(PropagateError::GridMismatch(format!(
            "noise spacing {} must equal dt/2 = {dt_half}",
            noise.grid.dt
        )));
    }
    let n_steps = plan.n_steps();
    if noise.grid.n_exposed() < 2 * n_steps {
        return Err(PropagateError::GridMismatch(format!(
            "noise record exposes {} samples, need {} to cover t_final",
            noise.grid.n_exposed(),
            2 * n_steps
        )));
    }
    Ok(n_steps)
}

/// Core SLED integration streaming recorded states into a sink; used by both
/// the single-trajectory and the ensemble drivers so ensembles never have to
/// materialize per-trajectory series.
fn propagate_sled_with<F>(
    model: &SledModel,
    rho0: &DensityMatrix,
    plan: &StepPlan,
    noise: &NoiseTrajectory,
    sink: &mut F,
) -> Result<(), PropagateError>
where
    F: FnMut(usize, f64, &DensityMatrix) -> Result<(), PropagateError>,
{
    model.validate()?;
    let n_steps = check_noise_alignment(plan, noise)?;
    let dt = plan.dt;
    let l0 = sled_constant_part(model);
    let c_sx = commutator_of_sigma_x();
    let mut state = vectorize(rho0);

    let record = |k: usize, v: &LiouvilleVector, sink: &mut F| -> Result<(), PropagateError> {
        let t = k as f64 * dt;
        let dm = check_recorded(devectorize(v).mat(), t, false)?;
        sink(k, t, &dm)
    };

    record(0, &state, sink)?;
    for k in 1..=n_steps {
        let t_mid = (k as f64 - 0.5) * dt;
        // Midpoint of step k−1→k is noise sample 2k−1 on the half-step grid.
        let xi = noise.samples[2 * k - 1];
        let f = drive_value(&model.drive, t_mid)?;
        let l = l0 + c_sx * (f - xi);
        state = exp_action(&l, dt, &state);
        if k % plan.record_stride == 0 {
            record(k, &state, sink)?;
        }
    }
    Ok(())
}

/// Integrates one SLED trajectory against a concrete noise record.  States
/// stay Hermitian with unit trace but may transiently leave the Bloch ball;
/// only the ensemble mean is a physical state.
pub fn propagate_sled_trajectory(
    model: &SledModel,
    rho0: &DensityMatrix,
    plan: &StepPlan,
    noise: &NoiseTrajectory,
) -> Result<TrajectorySeries, PropagateError> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    propagate_sled_with(model, rho0, plan, noise, &mut |_, t, dm| {
        times.push(t);
        states.push(*dm);
        Ok(())
    })?;
    Ok(TrajectorySeries { times, states })
}

/// Noise grid sized for a plan: half-step spacing, record at least twice the
/// horizon so only the wraparound-free first half is consumed.
pub fn noise_grid_for_plan(bath: &BathSpec, plan: &StepPlan) -> Result<NoiseGrid, PropagateError> {
    let dt_noise = 0.5 * plan.dt;
    let needed = 4 * plan.n_steps().max(1);
    let n = needed.next_power_of_two();
    // A decoupled bath has no spectral content to resolve.
    let omega_max = if bath.eta > 0.0 { 8.0 * bath.omega_c } else { 0.0 };
    Ok(NoiseGrid::new(dt_noise, n, omega_max)?)
}

const CHUNK: usize = 64;

/// Splits 0..n into fixed chunks, maps each chunk on the thread pool, and
/// folds both within and across chunks in index order.  The reduction tree is
/// fixed by the chunking alone, so sums are bit-identical for any worker
/// count.
fn chunked_try_reduce<A, F>(n: usize, make_zero: impl Fn() -> A + Sync, per_index: F) -> Result<A, PropagateError>
where
    A: Send + Merge,
    F: Fn(usize, &mut A) -> Result<(), PropagateError> + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<A> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = make_zero();
            for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(n) {
                per_index(i, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_, PropagateError>>()?;
    let mut total = make_zero();
    for p in partials {
        total.merge(p);
    }
    Ok(total)
}

trait Merge {
    fn merge(&mut self, other: Self);
}

/// Running sums for an ensemble of recorded series.
struct SeriesAccumulator {
    sum_vec: Vec<Vec4>,
    bloch_sum: Vec<[f64; 3]>,
    bloch_sumsq: Vec<[f64; 3]>,
}

impl SeriesAccumulator {
    fn zero(n_records: usize) -> Self {
        Self {
            sum_vec: vec![Vec4::zeros(); n_records],
            bloch_sum: vec![[0.0; 3]; n_records],
            bloch_sumsq: vec![[0.0; 3]; n_records],
        }
    }

    fn absorb(&mut self, slot: usize, dm: &DensityMatrix) -> Result<(), PropagateError> {
        self.sum_vec[slot] += vectorize(dm).0;
        let b = to_bloch(dm)?;
        for (j, v) in [b.x, b.y, b.z].into_iter().enumerate() {
            self.bloch_sum[slot][j] += v;
            self.bloch_sumsq[slot][j] += v * v;
        }
        Ok(())
    }
}

impl Merge for SeriesAccumulator {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.sum_vec.iter_mut().zip(other.sum_vec) {
            *a += b;
        }
        for (a, b) in self.bloch_sum.iter_mut().zip(other.bloch_sum) {
            for j in 0..3 {
                a[j] += b[j];
            }
        }
        for (a, b) in self.bloch_sumsq.iter_mut().zip(other.bloch_sumsq) {
            for j in 0..3 {
                a[j] += b[j];
            }
        }
    }
}

/// Trajectory-averaged SLED integration.  Noise for trajectory i is seeded
/// with `base_seed + i`; the chunked in-order reduction makes the result
/// bit-identical for any number of rayon workers.
pub fn propagate_sled_ensemble(
    model: &SledModel,
    rho0: &DensityMatrix,
    plan: &StepPlan,
    ensemble: &EnsemblePlan,
) -> Result<EnsembleSeries, PropagateError> {
    model.validate()?;
    if ensemble.n_traj == 0 {
        return Err(PropagateError::InvalidPlan("n_traj must be ≥ 1".into()));
    }
    let grid = noise_grid_for_plan(&model.bath, plan)?;
    let kernel = build_kernel(&model.bath, grid)?;

    // Record slots: step 0 plus every stride-th step.
    let n_steps = plan.n_steps();
    let n_records = n_steps / plan.record_stride + 1;
    let times: Vec<f64> = (0..n_records)
        .map(|r| (r * plan.record_stride) as f64 * plan.dt)
        .collect();

    let acc = chunked_try_reduce(
        ensemble.n_traj,
        || SeriesAccumulator::zero(n_records),
        |i, acc| {
            let noise = synthesize(&kernel, ensemble.base_seed.wrapping_add(i as u64));
            let mut slot = 0usize;
            propagate_sled_with(model, rho0, plan, &noise, &mut |_, _, dm| {
                acc.absorb(slot, dm)?;
                slot += 1;
                Ok(())
            })
        },
    )?;

    let n = ensemble.n_traj as f64;
    let mut mean_states = Vec::with_capacity(n_records);
    let mut stderr = Vec::with_capacity(n_records);
    for r in 0..n_records {
        let mean_vec = acc.sum_vec[r] / C64::new(n, 0.0);
        mean_states.push(devectorize(&LiouvilleVector(mean_vec)));
        let se = |j: usize| -> f64 {
            if ensemble.n_traj < 2 {
                return 0.0;
            }
            let s = acc.bloch_sum[r][j];
            let var = ((acc.bloch_sumsq[r][j] - s * s / n) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        };
        stderr.push(BlochVector {
            x: se(0),
            y: se(1),
            z: se(2),
        });
    }
    Ok(EnsembleSeries {
        times,
        mean_states,
        stderr,
        n_traj: ensemble.n_traj,
    })
}

/// Cross-trajectory statistics of the time-averaged Bloch vector over a
/// window: each trajectory is averaged over its recorded points in [t0, t1]
/// first, then the ensemble mean and standard error are taken across
/// trajectories.  This is the right estimator for steady-state observables,
/// where within-trajectory samples are strongly correlated in time.
pub fn sled_window_average(
    model: &SledModel,
    rho0: &DensityMatrix,
    plan: &StepPlan,
    ensemble: &EnsemblePlan,
    window: (f64, f64),
) -> Result<(BlochVector, BlochVector), PropagateError> {
    model.validate()?;
    if ensemble.n_traj == 0 {
        return Err(PropagateError::InvalidPlan("n_traj must be ≥ 1".into()));
    }
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(PropagateError::EmptyWindow { t0, t1 });
    }
    let grid = noise_grid_for_plan(&model.bath, plan)?;
    let kernel = build_kernel(&model.bath, grid)?;

    struct WindowAcc {
        sum: [f64; 3],
        sumsq: [f64; 3],
        any_points: bool,
    }
    impl Merge for WindowAcc {
        fn merge(&mut self, other: Self) {
            for j in 0..3 {
                self.sum[j] += other.sum[j];
                self.sumsq[j] += other.sumsq[j];
            }
            self.any_points |= other.any_points;
        }
    }

    let acc = chunked_try_reduce(
        ensemble.n_traj,
        || WindowAcc {
            sum: [0.0; 3],
            sumsq: [0.0; 3],
            any_points: true,
        },
        |i, acc| {
            let noise = synthesize(&kernel, ensemble.base_seed.wrapping_add(i as u64));
            let mut w = [0.0f64; 3];
            let mut count = 0usize;
            propagate_sled_with(model, rho0, plan, &noise, &mut |_, t, dm| {
                if t >= t0 - 1e-12 && t <= t1 + 1e-12 {
                    let b = to_bloch(dm)?;
                    w[0] += b.x;
                    w[1] += b.y;
                    w[2] += b.z;
                    count += 1;
                }
                Ok(())
            })?;
            if count == 0 {
                acc.any_points = false;
                return Ok(());
            }
            for j in 0..3 {
                let avg = w[j] / count as f64;
                acc.sum[j] += avg;
                acc.sumsq[j] += avg * avg;
            }
            Ok(())
        },
    )?;
    if !acc.any_points {
        return Err(PropagateError::EmptyWindow { t0, t1 });
    }
    let n = ensemble.n_traj as f64;
    let comp = |j: usize| {
        let mean = acc.sum[j] / n;
        let se = if ensemble.n_traj < 2 {
            0.0
        } else {
            let var = ((acc.sumsq[j] - acc.sum[j] * acc.sum[j] / n) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        };
        (mean, se)
    };
    let (mx, sx) = comp(0);
    let (my, sy) = comp(1);
    let (mz, sz) = comp(2);
    Ok((
        BlochVector { x: mx, y: my, z: mz },
        BlochVector { x: sx, y: sy, z: sz },
    ))
}

// ---------------------------------------------------------------------------
// Windowed fidelity
// ---------------------------------------------------------------------------

/// Maximum statistical negativity repaired silently when comparing ensemble
/// means; anything worse propagates as an error.
pub const ENSEMBLE_CLIP: f64 = 1e-4;

/// Mean fidelity over the recorded points of [t0, t1] plus the largest
/// eigenvalue clip that was needed to make the compared states physical.
pub fn windowed_fidelity_stats<A: Series, B: Series>(
    a: &A,
    b: &B,
    window: (f64, f64),
) -> Result<(f64, f64), PropagateError> {
    let (t0, t1) = window;
    let (ta, tb) = (a.times(), b.times());
    let (sa, sb) = (a.states(), b.states());
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut max_clip = 0.0f64;
    let mut ib = 0usize;
    for (ia, &t) in ta.iter().enumerate() {
        if t < t0 - 1e-12 || t > t1 + 1e-12 {
            continue;
        }
        // Advance through b's grid to the matching time.
        while ib < tb.len() && tb[ib] < t - 1e-9 {
            ib += 1;
        }
        if ib >= tb.len() || (tb[ib] - t).abs() > 1e-9 {
            return Err(PropagateError::GridMismatch(format!(
                "no matching record at t = {t} in the second series"
            )));
        }
        let (ra, ca) = sa[ia].clip_to_physical(ENSEMBLE_CLIP)?;
        let (rb, cb) = sb[ib].clip_to_physical(ENSEMBLE_CLIP)?;
        max_clip = max_clip.max(ca).max(cb);
        sum += crate::algebra::fidelity(&ra, &rb)?;
        count += 1;
    }
    if count == 0 {
        return Err(PropagateError::EmptyWindow { t0, t1 });
    }
    Ok((sum / count as f64, max_clip))
}

/// Mean state fidelity over the recorded points falling inside [t0, t1].
pub fn avg_fidelity_over_window<A: Series, B: Series>(
    a: &A,
    b: &B,
    window: (f64, f64),
) -> Result<f64, PropagateError> {
    Ok(windowed_fidelity_stats(a, b, window)?.0)
}
