//! Closed-form rotating-frame steady states of the driven, damped qubit and
//! the derived measures built on them: detuning-induced Bloch shifts, the
//! steady-state failure witness, the shifted-vs-resonant fidelity, and the
//! critical drive/dissipation ratio where that fidelity is minimal.

use crate::algebra::{devectorize, BlochVector, DensityMatrix, Mat4, Superoperator, Vec4};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SteadyError {
    #[error("invalid steady-state parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Liouvillian null-space solve failed (singular system)")]
    Singular,
}

/// Parameters of the rotating-frame steady state: drive Rabi amplitude Ω_d,
/// relaxation scale γ, transverse decoherence γ_β = γ(2n̄+1), and the
/// detuning Δ_q = ω_q + Δ_s − ω_d of the (shifted) qubit from the drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyParams {
    pub omega_d: f64,
    pub gamma: f64,
    pub gamma_beta: f64,
    pub delta_q: f64,
}

impl SteadyParams {
    pub fn new(
        omega_d: f64,
        gamma: f64,
        gamma_beta: f64,
        delta_q: f64,
    ) -> Result<Self, SteadyError> {
        if !(omega_d >= 0.0) || !omega_d.is_finite() {
            return Err(SteadyError::InvalidParams(format!(
                "Omega_d = {omega_d} must be ≥ 0"
            )));
        }
        if !(gamma > 0.0) || !(gamma_beta >= gamma) {
            return Err(SteadyError::InvalidParams(format!(
                "need gamma_beta ≥ gamma > 0, got gamma = {gamma}, gamma_beta = {gamma_beta}"
            )));
        }
        if !delta_q.is_finite() {
            return Err(SteadyError::InvalidParams("non-finite detuning".into()));
        }
        Ok(Self {
            omega_d,
            gamma,
            gamma_beta,
            delta_q,
        })
    }

    fn at_resonance(&self) -> Self {
        Self {
            delta_q: 0.0,
            ..*self
        }
    }
}

/// Rotating-frame steady-state Bloch vector of the Lindblad dynamics under a
/// single RWA drive tone:
///
///   σ_x = −4γΩ_dΔ_q / [γ_β(2Ω_d² + γ_β² + 4Δ_q²)]
///   σ_y = −2γΩ_d / (2Ω_d² + γ_β² + 4Δ_q²)
///   σ_z =  γ(γ_β² + 4Δ_q²) / [γ_β(2Ω_d² + γ_β² + 4Δ_q²)]
pub fn steady_bloch_rwa(p: &SteadyParams) -> BlochVector {
    let d = 2.0 * p.omega_d * p.omega_d + p.gamma_beta * p.gamma_beta
        + 4.0 * p.delta_q * p.delta_q;
    BlochVector {
        x: -4.0 * p.gamma * p.omega_d * p.delta_q / (p.gamma_beta * d),
        y: -2.0 * p.gamma * p.omega_d / d,
        z: p.gamma * (p.gamma_beta * p.gamma_beta + 4.0 * p.delta_q * p.delta_q)
            / (p.gamma_beta * d),
    }
}

/// Componentwise difference between the detuned and the resonant steady
/// state, in the closed scaled forms
///
///   Δσ_x = −4(γ/γ_β)(Δ_q/Ω_d)/D₁,
///   Δσ_y = 8(γ/Ω_d)(Δ_q/Ω_d)²/(D₁D₂),
///   Δσ_z = 8(γ/γ_β)(Δ_q/Ω_d)²/(D₁D₂),
///
/// with D₁ = 2 + (γ_β/Ω_d)² + 4(Δ_q/Ω_d)² and D₂ = 2 + (γ_β/Ω_d)².  Δσ_z and
/// Δσ_y are nonnegative and even in Δ_q; Δσ_x is odd.
pub fn delta_sigma(p: &SteadyParams) -> (f64, f64, f64) {
    if p.omega_d == 0.0 {
        // Without drive the steady state is detuning-independent.
        return (0.0, 0.0, 0.0);
    }
    let gb = p.gamma_beta / p.omega_d;
    let dq = p.delta_q / p.omega_d;
    let d1 = 2.0 + gb * gb + 4.0 * dq * dq;
    let d2 = 2.0 + gb * gb;
    (
        -4.0 * (p.gamma / p.gamma_beta) * dq / d1,
        8.0 * (p.gamma / p.omega_d) * dq * dq / (d1 * d2),
        8.0 * (p.gamma / p.gamma_beta) * dq * dq / (d1 * d2),
    )
}

/// Steady-state failure witness: the measured long-time rotating-frame σ_z
/// minus the resonant Lindblad prediction σ_z^ss(Δ_q = 0).  Any dynamics that
/// is actually Lindbladian gives a nonnegative value (the detuned σ_z is
/// always above the resonant one), so a negative result certifies that the
/// time-local master equation fails for the system measured.
pub fn failure_measure(measured_sigma_z: f64, p_at_resonance: &SteadyParams) -> f64 {
    measured_sigma_z - steady_bloch_rwa(&p_at_resonance.at_resonance()).z
}

/// Fidelity between the steady states with and without the bath-induced
/// detuning Δ_s, in the γ_β ≈ γ approximation:
///
///   F = 1 − 4Δ_s²Ω_d² / [(2Ω_d² + γ² + 4Δ_s²)(2Ω_d² + γ²)].
pub fn lme_detuning_fidelity(delta_s: f64, omega_d: f64, gamma: f64) -> f64 {
    let b = 2.0 * omega_d * omega_d + gamma * gamma;
    1.0 - 4.0 * delta_s * delta_s * omega_d * omega_d / ((b + 4.0 * delta_s * delta_s) * b)
}

/// Critical drive/dissipation ratio ε_c = γ_c/Ω_d at which
/// [`lme_detuning_fidelity`] with Δ_s = −αγ is minimal:
/// ε_c = √2/(1 + 4α²)^{1/4}.
pub fn critical_ratio(alpha: f64) -> Result<f64, SteadyError> {
    if !(alpha > 0.0) {
        return Err(SteadyError::Domain(format!("alpha = {alpha} must be > 0")));
    }
    Ok(std::f64::consts::SQRT_2 / (1.0 + 4.0 * alpha * alpha).powf(0.25))
}

/// Steady state of a time-independent generator, found by replacing the
/// redundant first row of L·vec(ρ) = 0 with the trace constraint and solving
/// the resulting linear system.
pub fn steady_state_numeric(l: &Superoperator) -> Result<DensityMatrix, SteadyError> {
    let mut m: Mat4 = l.0;
    for j in 0..4 {
        m[(0, j)] = C64::new(0.0, 0.0);
    }
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(0, 3)] = C64::new(1.0, 0.0);
    let rhs = Vec4::new(
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    );
    let sol = m.lu().solve(&rhs).ok_or(SteadyError::Singular)?;
    Ok(devectorize(&crate::algebra::LiouvilleVector(sol)))
}
