//! Ohmic bath with a quartic Drude cutoff: spectral density, occupation
//! numbers, golden-rule transition rates, the bath-induced shift of the qubit
//! frequency, and the white-noise-deducted spectrum that feeds colored-noise
//! synthesis.
//!
//! The spectral density is J(ω) = 2ηω/(1 + ω²/ω_c²)², extended oddly to
//! negative frequencies.  In the wide-cutoff limit this gives the qubit an
//! effective dissipation rate γ = 2ηω_q.

use crate::quad;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BathError {
    #[error("invalid bath specification: {0}")]
    InvalidSpec(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature for {context} did not converge (error {achieved:.3e} > tol {requested:.3e})")]
    Quadrature {
        context: &'static str,
        achieved: f64,
        requested: f64,
    },
}

fn quad_err(context: &'static str) -> impl Fn(quad::QuadratureError) -> BathError {
    move |e| BathError::Quadrature {
        context,
        achieved: e.achieved,
        requested: e.requested,
    }
}

/// Ohmic environment parameters.  Internally everything is an angular
/// frequency in rad per time unit with ħ = k_B = 1, so `hbar_beta` carries
/// time units and ħβω is the dimensionless Boltzmann exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpec {
    /// Dimensionless coupling strength η.
    pub eta: f64,
    /// Cutoff angular frequency ω_c.
    pub omega_c: f64,
    /// Inverse temperature ħβ in time units.
    pub hbar_beta: f64,
    /// Reference qubit angular frequency ω_q.
    pub omega_q: f64,
}

impl BathSpec {
    pub fn new(eta: f64, omega_c: f64, hbar_beta: f64, omega_q: f64) -> Result<Self, BathError> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(BathError::InvalidSpec(format!("eta = {eta} must be ≥ 0")));
        }
        for (name, v) in [("omega_c", omega_c), ("hbar_beta", hbar_beta), ("omega_q", omega_q)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(BathError::InvalidSpec(format!("{name} = {v} must be > 0")));
            }
        }
        Ok(Self {
            eta,
            omega_c,
            hbar_beta,
            omega_q,
        })
    }

    /// η expressed through the effective dissipation rate γ = 2ηω_q.
    pub fn from_gamma(
        gamma: f64,
        omega_c: f64,
        hbar_beta: f64,
        omega_q: f64,
    ) -> Result<Self, BathError> {
        Self::new(gamma / (2.0 * omega_q), omega_c, hbar_beta, omega_q)
    }

    /// γ = 2ηω_q.
    pub fn gamma(&self) -> f64 {
        2.0 * self.eta * self.omega_q
    }

    /// The rate mapping γ = 2ηω_q assumes ω_c ≫ ω_q; flag marginal cutoffs.
    pub fn cutoff_is_marginal(&self) -> bool {
        self.omega_c < 10.0 * self.omega_q
    }
}

/// Golden-rule rates of the bath at the qubit frequency, plus the energy
/// shift Δ_s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathRates {
    /// γ = 2ηω_q.
    pub gamma: f64,
    /// γ_β = γ(2n̄ + 1) = Γ↓ + Γ↑, the transverse decoherence scale.
    pub gamma_beta: f64,
    /// Downward (emission) rate Γ(ω_q) = γ(n̄ + 1).
    pub gamma_down: f64,
    /// Upward (absorption) rate Γ(−ω_q) = γn̄.
    pub gamma_up: f64,
    /// Bath-induced shift of the qubit frequency.
    pub delta_s: f64,
}

/// coth(y) − 1/y, series-evaluated near zero to dodge the cancellation.
pub(crate) fn coth_minus_inv(y: f64) -> f64 {
    if y.abs() < 1e-3 {
        let y2 = y * y;
        y * (1.0 / 3.0 - y2 / 45.0 + 2.0 * y2 * y2 / 945.0)
    } else {
        1.0 / y.tanh() - 1.0 / y
    }
}

/// y·coth(y), stable through y = 0 where it equals 1.
fn y_coth_y(y: f64) -> f64 {
    y * coth_minus_inv(y) + 1.0
}

/// J(ω) = 2ηω/(1 + ω²/ω_c²)², odd in ω.
pub fn spectral_density(spec: &BathSpec, omega: f64) -> f64 {
    let u = omega / spec.omega_c;
    let d = 1.0 + u * u;
    2.0 * spec.eta * omega / (d * d)
}

/// Mean occupation n̄(ω) = 1/(e^{ħβω} − 1) for ω > 0.
pub fn bose_occupation(spec: &BathSpec, omega: f64) -> Result<f64, BathError> {
    if !(omega > 0.0) {
        return Err(BathError::Domain(format!(
            "bose_occupation requires omega > 0, got {omega}"
        )));
    }
    Ok(1.0 / (spec.hbar_beta * omega).exp_m1())
}

/// Quantum noise power spectrum S(ω) = J(ω)[n̄(ω) + 1], valid for all real ω
/// with S(0) = 2η/(ħβ) and detailed balance S(−ω) = e^{−ħβω}S(ω).
pub fn power_spectrum(spec: &BathSpec, omega: f64) -> f64 {
    let x = spec.hbar_beta * omega;
    // J(ω)(n̄+1) = [2η/(ħβ)] · x/(1−e^{−x}) / (1+ω²/ω_c²)²; the middle factor
    // extends smoothly through x = 0 with value 1.
    let g = if x == 0.0 { 1.0 } else { x / (-(-x).exp_m1()) };
    let u = omega / spec.omega_c;
    let d = 1.0 + u * u;
    2.0 * spec.eta / spec.hbar_beta * g / (d * d)
}

/// White-noise-deducted spectrum L̃'_r(ω) = J(ω)[coth(ħβω/2) − 2/(ħβω)]/2,
/// even and nonnegative; this is what the colored-noise kernel is built from.
pub fn reduced_spectrum(spec: &BathSpec, omega: f64) -> f64 {
    0.5 * spectral_density(spec, omega) * coth_minus_inv(0.5 * spec.hbar_beta * omega)
}

/// Real part of the reduced bath correlation,
/// L'_r(τ) = (1/π)∫₀^∞ L̃'_r(ω) cos(ωτ) dω, by adaptive quadrature up to
/// 50·ω_c (the quartic cutoff makes the tail ~ω⁻³).
pub fn real_correlation_reduced(spec: &BathSpec, tau: f64) -> Result<f64, BathError> {
    if spec.eta == 0.0 {
        return Ok(0.0);
    }
    let scale = spec.eta * spec.omega_c * spec.omega_c;
    let f = |omega: f64| reduced_spectrum(spec, omega) * (omega * tau).cos();
    let v = quad::integrate(&f, 0.0, 50.0 * spec.omega_c, 1e-9 * scale * spec.omega_c)
        .map_err(quad_err("real_correlation_reduced"))?;
    Ok(v / std::f64::consts::PI)
}

/// J(ω)·coth(ħβω/2), the even integrand of the shift integral, computed in a
/// form that is regular through ω = 0 where it equals 4η/(ħβ).
fn shift_integrand_numerator(spec: &BathSpec, omega: f64) -> f64 {
    let u = omega / spec.omega_c;
    let d = 1.0 + u * u;
    4.0 * spec.eta / spec.hbar_beta * y_coth_y(0.5 * spec.hbar_beta * omega) / (d * d)
}

/// Bath-induced energy shift of the qubit frequency,
///
///   Δ_s = (ω_q/π) · PV∫₀^∞ dω J(ω)coth(ħβω/2)/(ω_q² − ω²),
///
/// evaluated by splitting off a symmetric window [ω_q/2, 3ω_q/2] around the
/// pole: inside it the integrand value at ω_q is subtracted (leaving a smooth
/// difference quotient) and added back through the exact principal value
/// (1/2ω_q)·ln[(2ω_q+δ)/(2ω_q−δ)].  Negative for the default parameters and
/// exactly linear in η.
pub fn energy_shift(spec: &BathSpec) -> Result<f64, BathError> {
    if spec.eta == 0.0 {
        return Ok(0.0);
    }
    let wq = spec.omega_q;
    let delta = 0.5 * wq;
    let upper = 50.0 * spec.omega_c;
    // Absolute tolerance 1e-10·γ on Δ_s itself; the bracket below is scaled
    // by ω_q/π at the end, so compensate here and split across the pieces.
    let tol = 1e-10 * spec.gamma() * std::f64::consts::PI / wq / 3.0;

    let h = |omega: f64| shift_integrand_numerator(spec, omega);
    let h_q = h(wq);
    let plain = |omega: f64| h(omega) / ((wq - omega) * (wq + omega));
    let low = quad::integrate(&plain, 0.0, wq - delta, tol).map_err(quad_err("energy_shift"))?;
    let high =
        quad::integrate(&plain, wq + delta, upper, tol).map_err(quad_err("energy_shift"))?;

    // Smooth window part: [h(ω) − h(ω_q)]/(ω_q² − ω²) has a removable
    // singularity at ω_q with limit −h'(ω_q)/(2ω_q).
    let smooth = |omega: f64| {
        if (omega - wq).abs() < 1e-8 * wq {
            let step = 1e-5 * wq;
            let dh = (h(wq + step) - h(wq - step)) / (2.0 * step);
            -dh / (2.0 * wq)
        } else {
            (h(omega) - h_q) / ((wq - omega) * (wq + omega))
        }
    };
    let window =
        quad::integrate(&smooth, wq - delta, wq + delta, tol).map_err(quad_err("energy_shift"))?;
    let pv = h_q / (2.0 * wq) * ((2.0 * wq + delta) / (2.0 * wq - delta)).ln();

    Ok(wq / std::f64::consts::PI * (low + high + window + pv))
}

/// All golden-rule rates plus the energy shift for a given bath.
pub fn rates(spec: &BathSpec) -> Result<BathRates, BathError> {
    let gamma = spec.gamma();
    let n_bar = bose_occupation(spec, spec.omega_q)?;
    Ok(BathRates {
        gamma,
        gamma_beta: gamma * (2.0 * n_bar + 1.0),
        gamma_down: gamma * (n_bar + 1.0),
        gamma_up: gamma * n_bar,
        delta_s: energy_shift(spec)?,
    })
}
