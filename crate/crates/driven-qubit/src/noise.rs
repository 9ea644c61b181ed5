//! Frequency-domain synthesis of the real stationary Gaussian process ξ(t)
//! whose autocorrelation is the reduced bath correlation L'_r(τ).
//!
//! The recipe: draw Hermitian-symmetric complex Gaussians z_m on the discrete
//! frequency grid, weight them by the kernel G̃(ω_m) = √(L̃'_r(ω_m)), and take
//! the real part of the unnormalized inverse FFT.  With per-bin variance
//! L̃'_r(ω_m)·Δω/2π the sample autocorrelation is exactly the Riemann
//! discretization of L'_r.
//!
//! Reproducibility contract: Gaussians come from a ChaCha8 stream seeded
//! directly with the trajectory seed, transformed by Box–Muller (u₁ mapped to
//! (0,1], angle 2πu₂, cosine first with the sine partner cached), drawn in
//! the fixed bin order m = 0, n/2, then pairs m = 1..n/2.  Identical
//! (kernel, seed) inputs therefore give bit-identical samples on every call,
//! on any number of worker threads.

use crate::bath::{reduced_spectrum, BathSpec};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("invalid noise grid: {0}")]
    InvalidGrid(String),
    #[error("reduced spectrum is negative at ω = {omega}: {value:.3e}")]
    SpectralNegativity { omega: f64, value: f64 },
    #[error("lag {lag} steps would wrap the record (limit {max} steps)")]
    CircularCorrelation { lag: usize, max: usize },
    #[error("lag {lag} is not a multiple of the sample spacing {dt}")]
    LagOffGrid { lag: f64, dt: f64 },
    #[error("autocorrelation needs ≥ 2 trajectories on a shared grid")]
    BadEnsemble,
}

/// Uniform sampling grid for one noise record.  Only the first half of the
/// record is ever handed to consumers, so the circular wraparound of the FFT
/// synthesis never touches the data actually used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseGrid {
    /// Sample spacing.
    pub dt: f64,
    /// Number of samples; a power of two.
    pub n: usize,
}

impl NoiseGrid {
    /// A grid must resolve the highest angular frequency the caller cares
    /// about: π/dt ≥ `omega_max`.
    pub fn new(dt: f64, n: usize, omega_max: f64) -> Result<Self, NoiseError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(NoiseError::InvalidGrid(format!("dt = {dt} must be > 0")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(NoiseError::InvalidGrid(format!(
                "n = {n} must be a power of two ≥ 2"
            )));
        }
        let nyquist = std::f64::consts::PI / dt;
        if nyquist < omega_max {
            return Err(NoiseError::InvalidGrid(format!(
                "Nyquist frequency {nyquist:.3e} below requested ω_max {omega_max:.3e}"
            )));
        }
        Ok(Self { dt, n })
    }

    pub fn duration(&self) -> f64 {
        self.n as f64 * self.dt
    }

    /// Angular frequency of FFT bin m, with the upper half of the bins folded
    /// onto negative frequencies (only the magnitude matters for the even
    /// kernel).
    pub fn bin_frequency(&self, m: usize) -> f64 {
        let folded = m.min(self.n - m);
        2.0 * std::f64::consts::PI * folded as f64 / (self.n as f64 * self.dt)
    }

    /// Number of leading samples exposed to consumers.
    pub fn n_exposed(&self) -> usize {
        self.n / 2
    }
}

/// Spectral kernel G̃(ω_m) = √(L̃'_r(ω_m)) on a [`NoiseGrid`], with the
/// inverse-FFT plan cached for reuse across trajectories.
#[derive(Clone)]
pub struct NoiseKernel {
    pub grid: NoiseGrid,
    /// G̃ at each FFT bin; even under the bin folding, zero at m = 0.
    pub g_tilde: Vec<f64>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NoiseKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseKernel")
            .field("grid", &self.grid)
            .field("g_tilde", &format_args!("[{} bins]", self.g_tilde.len()))
            .finish()
    }
}

/// One synthesized record of ξ(t); immutable after creation.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTrajectory {
    pub grid: NoiseGrid,
    pub samples: Vec<f64>,
    pub seed: u64,
}

impl NoiseTrajectory {
    /// The first half of the record — the only part consumers should read.
    pub fn exposed(&self) -> &[f64] {
        &self.samples[..self.grid.n_exposed()]
    }
}

/// Builds the spectral kernel for a bath on a grid.  The grid must oversample
/// the cutoff (Nyquist ≥ 8·ω_c) so the neglected spectral tail is ≪ 1% of the
/// integrated power.
pub fn build_kernel(bath: &BathSpec, grid: NoiseGrid) -> Result<NoiseKernel, NoiseError> {
    let nyquist = std::f64::consts::PI / grid.dt;
    if bath.eta > 0.0 && nyquist < 8.0 * bath.omega_c {
        return Err(NoiseError::InvalidGrid(format!(
            "Nyquist {nyquist:.3e} under-resolves the cutoff: need ≥ 8·ω_c = {:.3e}",
            8.0 * bath.omega_c
        )));
    }
    let mut g_tilde = Vec::with_capacity(grid.n);
    for m in 0..grid.n {
        let omega = grid.bin_frequency(m);
        let l = reduced_spectrum(bath, omega);
        if l < -1e-15 {
            return Err(NoiseError::SpectralNegativity { omega, value: l });
        }
        g_tilde.push(l.max(0.0).sqrt());
    }
    let ifft = FftPlanner::new().plan_fft_inverse(grid.n);
    Ok(NoiseKernel {
        grid,
        g_tilde,
        ifft,
    })
}

/// Box–Muller transform over a ChaCha8 stream; drawing order and the exact
/// transform are part of the reproducibility contract.
struct Gaussian {
    rng: ChaCha8Rng,
    cache: Option<f64>,
}

impl Gaussian {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cache: None,
        }
    }

    fn next(&mut self) -> f64 {
        if let Some(v) = self.cache.take() {
            return v;
        }
        let u1 = 1.0 - self.rng.random::<f64>(); // (0, 1]: keeps ln finite
        let u2: f64 = self.rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.cache = Some(r * s);
        r * c
    }
}

/// Draws one noise realization: Hermitian frequency bins z_m scaled by
/// G̃(ω_m)/√(n·dt), inverse-FFT'd, real part taken.  Deterministic in
/// (kernel, seed).
pub fn synthesize(kernel: &NoiseKernel, seed: u64) -> NoiseTrajectory {
    let n = kernel.grid.n;
    let scale = 1.0 / (n as f64 * kernel.grid.dt).sqrt();
    let mut gauss = Gaussian::new(seed);
    let mut bins = vec![C64::new(0.0, 0.0); n];
    // Real bins first (self-conjugate under m → n−m), then conjugate pairs.
    bins[0] = C64::new(gauss.next() * kernel.g_tilde[0] * scale, 0.0);
    bins[n / 2] = C64::new(gauss.next() * kernel.g_tilde[n / 2] * scale, 0.0);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for m in 1..n / 2 {
        let a = gauss.next() * half;
        let b = gauss.next() * half;
        let w = kernel.g_tilde[m] * scale;
        bins[m] = C64::new(a * w, b * w);
        bins[n - m] = C64::new(a * w, -b * w);
    }
    kernel.ifft.process(&mut bins);
    // The Hermitian construction makes the transform real up to rounding.
    let mut rms = 0.0;
    let mut im_max: f64 = 0.0;
    for b in &bins {
        rms += b.re * b.re;
        im_max = im_max.max(b.im.abs());
    }
    rms = (rms / n as f64).sqrt();
    debug_assert!(
        rms == 0.0 || im_max <= 1e-10 * rms,
        "imaginary synthesis residue {im_max:.3e} vs RMS {rms:.3e}"
    );
    NoiseTrajectory {
        grid: kernel.grid,
        samples: bins.iter().map(|b| b.re).collect(),
        seed,
    }
}

/// Cross-trajectory estimate of E[ξ(t₀)ξ(t₀+τ)] at a fixed anchor t₀ one
/// quarter into each record, for each requested lag.  Returns (mean, standard
/// error of the mean) per lag; the standard error comes from the
/// trajectory-to-trajectory spread, so estimates at different lags are
/// directly comparable.
pub fn estimate_autocorrelation(
    trajectories: &[NoiseTrajectory],
    lags: &[f64],
) -> Result<Vec<(f64, f64)>, NoiseError> {
    let Some(first) = trajectories.first() else {
        return Err(NoiseError::BadEnsemble);
    };
    if trajectories.len() < 2 || trajectories.iter().any(|t| t.grid != first.grid) {
        return Err(NoiseError::BadEnsemble);
    }
    let grid = first.grid;
    let anchor = grid.n / 4;
    let max_lag = grid.n / 2;
    let mut out = Vec::with_capacity(lags.len());
    for &lag in lags {
        let steps_f = lag / grid.dt;
        let steps = steps_f.round();
        if (steps_f - steps).abs() > 1e-9 {
            return Err(NoiseError::LagOffGrid { lag, dt: grid.dt });
        }
        let steps = steps as usize;
        if steps > max_lag {
            return Err(NoiseError::CircularCorrelation {
                lag: steps,
                max: max_lag,
            });
        }
        let m = trajectories.len() as f64;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for t in trajectories {
            let p = t.samples[anchor] * t.samples[anchor + steps];
            sum += p;
            sum_sq += p * p;
        }
        let mean = sum / m;
        let var = ((sum_sq - sum * sum / m) / (m - 1.0)).max(0.0);
        out.push((mean, (var / m).sqrt()));
    }
    Ok(out)
}
