//! Least-squares machinery for signal extraction: straight lines, damped
//! cosines (frequency-shift measurement on free-decay coherences), and
//! two-Lorentzian line shapes (sideband spectroscopy).
//!
//! The nonlinear fits run a Levenberg-style damped Gauss–Newton iteration
//! with forward-difference Jacobians.  Initial guesses are deterministic:
//! frequency from the discrete-Fourier peak with parabolic refinement, decay
//! from a log-envelope regression, phase from a small grid probe.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("time grid must be uniform for the spectral initial guess")]
    NonUniformGrid,
    #[error("normal equations are singular")]
    Singular,
    #[error("no convergence after {iterations} iterations (cost {cost:.3e})")]
    NoConvergence { iterations: usize, cost: f64 },
    #[error("fit rejected: relative residual {rel_residual:.3} exceeds {limit}")]
    PoorFit { rel_residual: f64, limit: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

/// Ordinary least-squares line y = slope·x + intercept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, FitError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(FitError::InsufficientData(format!(
            "need ≥ 2 paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(FitError::Domain("all x values identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - slope * a - intercept;
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

// ---------------------------------------------------------------------------
// Damped Gauss–Newton core
// ---------------------------------------------------------------------------

struct LevenbergResult {
    params: Vec<f64>,
    stderr: Vec<f64>,
    ssr: f64,
}

/// Minimizes ‖r(p)‖² from the starting point `p0`.  `scales` sets the
/// forward-difference step and keeps parameters of wildly different
/// magnitudes comparable.
fn levenberg<F>(residual: F, p0: &[f64], scales: &[f64], n_data: usize) -> Result<LevenbergResult, FitError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n_p = p0.len();
    if n_data <= n_p {
        return Err(FitError::InsufficientData(format!(
            "{n_data} points cannot constrain {n_p} parameters"
        )));
    }
    let mut p = p0.to_vec();
    let mut r = vec![0.0; n_data];
    let mut r_trial = vec![0.0; n_data];
    residual(&p, &mut r);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut jac = DMatrix::<f64>::zeros(n_data, n_p);
    let mut converged = false;

    for _iter in 0..200 {
        // Forward-difference Jacobian of the residual vector.
        for j in 0..n_p {
            let h = 1e-7 * p[j].abs().max(scales[j].abs()).max(1e-300);
            let saved = p[j];
            p[j] = saved + h;
            residual(&p, &mut r_trial);
            p[j] = saved;
            for i in 0..n_data {
                jac[(i, j)] = (r_trial[i] - r[i]) / h;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let rhs = &jt * DVector::from_column_slice(&r);

        let mut accepted = false;
        for _damping_round in 0..30 {
            let mut a = jtj.clone();
            for j in 0..n_p {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-300);
            }
            let Some(delta) = a.lu().solve(&rhs) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = (0..n_p).map(|j| p[j] - delta[j]).collect();
            residual(&trial, &mut r_trial);
            let trial_cost: f64 = r_trial.iter().map(|v| v * v).sum();
            if trial_cost.is_finite() && trial_cost <= cost {
                let step: f64 = (0..n_p)
                    .map(|j| (delta[j] / scales[j].abs().max(1e-300)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let improvement = cost - trial_cost;
                p = trial;
                std::mem::swap(&mut r, &mut r_trial);
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-14);
                if step < 1e-10 || improvement <= 1e-12 * cost.max(1e-300) {
                    converged = true;
                }
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // Damping exhausted without a downhill step: the current point is
            // (numerically) a minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(FitError::NoConvergence {
            iterations: 200,
            cost,
        });
    }

    // Parameter covariance σ²(JᵀJ)⁻¹ with σ² = SSR/(N−P), from the Jacobian
    // at the solution.
    for j in 0..n_p {
        let h = 1e-7 * p[j].abs().max(scales[j].abs()).max(1e-300);
        let saved = p[j];
        p[j] = saved + h;
        residual(&p, &mut r_trial);
        p[j] = saved;
        for i in 0..n_data {
            jac[(i, j)] = (r_trial[i] - r[i]) / h;
        }
    }
    let jtj = jac.transpose() * &jac;
    let sigma2 = cost / (n_data - n_p) as f64;
    let stderr = match jtj.clone().try_inverse() {
        Some(inv) => (0..n_p)
            .map(|j| (sigma2 * inv[(j, j)].max(0.0)).sqrt())
            .collect(),
        None => vec![f64::NAN; n_p],
    };
    Ok(LevenbergResult {
        params: p,
        stderr,
        ssr: cost,
    })
}

// ---------------------------------------------------------------------------
// Damped cosine
// ---------------------------------------------------------------------------

/// A·e^{−λt}·cos(ω̃t + φ) + c with 1σ uncertainties from the fit covariance.
#[derive(Clone, Debug)]
pub struct DampedCosineFit {
    pub amplitude: f64,
    pub decay_rate: f64,
    pub frequency: f64,
    pub phase: f64,
    pub offset: f64,
    /// 1σ uncertainties in the same order (amplitude, decay, frequency,
    /// phase, offset).
    pub stderr: [f64; 5],
    /// ‖residual‖ / ‖signal − mean‖; fits above 5% are rejected before this
    /// struct is ever produced.
    pub rel_residual: f64,
}

/// Maximum relative residual for a damped-cosine fit to count as valid.
pub const DAMPED_COSINE_RESIDUAL_LIMIT: f64 = 0.05;

fn check_uniform(times: &[f64]) -> Result<f64, FitError> {
    if times.len() < 2 {
        return Err(FitError::InsufficientData("need ≥ 2 samples".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(FitError::NonUniformGrid);
    }
    for k in 1..times.len() {
        if ((times[k] - times[k - 1]) - dt).abs() > 1e-6 * dt {
            return Err(FitError::NonUniformGrid);
        }
    }
    Ok(dt)
}

/// Dominant angular frequency of a uniformly sampled signal: FFT magnitude
/// peak with three-point parabolic interpolation.
fn dominant_frequency(values: &[f64], dt: f64) -> Result<f64, FitError> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let (mut best_k, mut best_mag) = (0usize, 0.0f64);
    for (k, b) in buf.iter().enumerate().take(half).skip(1) {
        let mag = b.norm();
        if mag > best_mag {
            best_mag = mag;
            best_k = k;
        }
    }
    if best_k == 0 || best_mag == 0.0 {
        return Err(FitError::InsufficientData(
            "no oscillatory content found".into(),
        ));
    }
    let mut k_refined = best_k as f64;
    if best_k + 1 < half && best_k >= 1 {
        let (ym, y0, yp) = (
            buf[best_k - 1].norm(),
            best_mag,
            buf[best_k + 1].norm(),
        );
        let denom = ym - 2.0 * y0 + yp;
        if denom.abs() > 1e-300 {
            let delta = 0.5 * (ym - yp) / denom;
            if delta.abs() <= 0.5 {
                k_refined += delta;
            }
        }
    }
    Ok(2.0 * std::f64::consts::PI * k_refined / (n as f64 * dt))
}

/// Decay-rate guess: regression of the log RMS of the detrended signal over
/// a handful of equal time segments.
fn decay_guess(times: &[f64], values: &[f64], mean: f64) -> f64 {
    let n_seg = 8.min(values.len() / 8).max(2);
    let seg_len = values.len() / n_seg;
    let mut xs = Vec::with_capacity(n_seg);
    let mut ys = Vec::with_capacity(n_seg);
    for s in 0..n_seg {
        let lo = s * seg_len;
        let hi = (lo + seg_len).min(values.len());
        let rms = (values[lo..hi]
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (hi - lo) as f64)
            .sqrt();
        if rms > 0.0 {
            xs.push(0.5 * (times[lo] + times[hi - 1]));
            ys.push(rms.ln());
        }
    }
    match linear_fit(&xs, &ys) {
        Ok(f) => (-f.slope).max(0.0),
        Err(_) => 0.0,
    }
}

/// Fits A·e^{−λt}cos(ω̃t+φ)+c to a uniformly sampled record covering at
/// least 8 periods of the dominant frequency.  The fit is rejected unless the
/// relative residual is below 5%.  A tiny negative decay estimate (pure
/// cosine plus rounding) is clamped to zero.
pub fn fit_damped_cosine(times: &[f64], values: &[f64]) -> Result<DampedCosineFit, FitError> {
    if times.len() != values.len() {
        return Err(FitError::InsufficientData("length mismatch".into()));
    }
    let dt = check_uniform(times)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let omega0 = dominant_frequency(values, dt)?;
    let span = times[times.len() - 1] - times[0];
    let periods = span * omega0 / (2.0 * std::f64::consts::PI);
    if periods < 8.0 {
        return Err(FitError::InsufficientData(format!(
            "record covers {periods:.1} periods of the dominant frequency; need ≥ 8"
        )));
    }
    let amp0 = values
        .iter()
        .map(|&v| (v - mean).abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let lambda0 = decay_guess(times, values, mean);

    let model = |p: &[f64], t: f64| -> f64 {
        p[0] * (-p[1] * t).exp() * (p[2] * t + p[3]).cos() + p[4]
    };
    let residual = |p: &[f64], out: &mut [f64]| {
        for (i, (&t, &v)) in times.iter().zip(values).enumerate() {
            out[i] = model(p, t) - v;
        }
    };

    // Phase is the one guess with no cheap estimator; probe a coarse grid.
    let mut best = (0.0, f64::INFINITY);
    let mut scratch = vec![0.0; values.len()];
    for k in 0..4 {
        let phi = 0.5 * std::f64::consts::PI * k as f64;
        residual(&[amp0, lambda0, omega0, phi, mean], &mut scratch);
        let cost: f64 = scratch.iter().map(|v| v * v).sum();
        if cost < best.1 {
            best = (phi, cost);
        }
    }
    let p0 = [amp0, lambda0, omega0, best.0, mean];
    let scales = [amp0, omega0 * 0.01, omega0, 1.0, amp0];
    let sol = levenberg(residual, &p0, &scales, values.len())?;

    let signal_norm = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<f64>()
        .sqrt();
    let rel_residual = if signal_norm > 0.0 {
        sol.ssr.sqrt() / signal_norm
    } else {
        0.0
    };
    if rel_residual > DAMPED_COSINE_RESIDUAL_LIMIT {
        return Err(FitError::PoorFit {
            rel_residual,
            limit: DAMPED_COSINE_RESIDUAL_LIMIT,
        });
    }

    let [mut a, mut lam, mut w, mut phi, c] =
        [sol.params[0], sol.params[1], sol.params[2], sol.params[3], sol.params[4]];
    // Canonical form: positive amplitude and frequency, phase in (−π, π].
    if a < 0.0 {
        a = -a;
        phi += std::f64::consts::PI;
    }
    if w < 0.0 {
        w = -w;
        phi = -phi;
    }
    phi = phi.rem_euclid(2.0 * std::f64::consts::PI);
    if phi > std::f64::consts::PI {
        phi -= 2.0 * std::f64::consts::PI;
    }
    lam = lam.max(0.0);
    Ok(DampedCosineFit {
        amplitude: a,
        decay_rate: lam,
        frequency: w,
        phase: phi,
        offset: c,
        stderr: [
            sol.stderr[0],
            sol.stderr[1],
            sol.stderr[2],
            sol.stderr[3],
            sol.stderr[4],
        ],
        rel_residual,
    })
}

// ---------------------------------------------------------------------------
// Lorentzian pair
// ---------------------------------------------------------------------------

/// b + h₁w₁²/((x−c₁)²+w₁²) + h₂w₂²/((x−c₂)²+w₂²), centers ordered c₁ ≤ c₂.
/// Heights are signed (spectral dips fit as negative heights); widths are
/// half-widths at half maximum.
#[derive(Clone, Debug)]
pub struct LorentzianPairFit {
    pub baseline: f64,
    pub centers: [f64; 2],
    pub widths: [f64; 2],
    pub heights: [f64; 2],
    /// 1σ uncertainties, same layout: baseline, centers, widths, heights.
    pub baseline_err: f64,
    pub center_err: [f64; 2],
    pub width_err: [f64; 2],
    pub height_err: [f64; 2],
    pub rel_residual: f64,
    /// Centers farther apart than the sum of the widths: the two features are
    /// actually distinguishable.
    pub resolved_pair: bool,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Index of the extreme |y − b| with indices in `masked` excluded; returns
/// the local half-width walked out from the extremum.
fn find_extreme(x: &[f64], y: &[f64], b: f64, masked: &[bool]) -> Option<(usize, f64)> {
    let mut best: Option<usize> = None;
    for i in 0..y.len() {
        if masked[i] {
            continue;
        }
        if best.is_none_or(|j| (y[i] - b).abs() > (y[j] - b).abs()) {
            best = Some(i);
        }
    }
    let i = best?;
    let h = y[i] - b;
    if h == 0.0 {
        return None;
    }
    // Walk outward until the deviation halves to estimate the width.
    let mut w = (x[x.len() - 1] - x[0]) / 10.0;
    for d in 1..x.len() {
        let lo = i.checked_sub(d);
        let hi = if i + d < x.len() { Some(i + d) } else { None };
        let crossed = |j: usize| (y[j] - b).abs() < 0.5 * h.abs();
        if lo.map(crossed).unwrap_or(false) || hi.map(crossed).unwrap_or(false) {
            w = d as f64 * (x[1] - x[0]).abs();
            break;
        }
    }
    Some((i, w))
}

/// Fits a two-Lorentzian line shape to scan data.  Initial centers come from
/// the two largest baseline deviations (the second sought outside a masked
/// neighborhood of the first).
pub fn fit_lorentzian_pair(x: &[f64], y: &[f64]) -> Result<LorentzianPairFit, FitError> {
    if x.len() != y.len() || x.len() < 8 {
        return Err(FitError::InsufficientData(format!(
            "need ≥ 8 paired points, got {}",
            x.len().min(y.len())
        )));
    }
    let b0 = median(y);
    let mut masked = vec![false; x.len()];
    let Some((i1, w1)) = find_extreme(x, y, b0, &masked) else {
        return Err(FitError::InsufficientData("flat scan".into()));
    };
    for (j, m) in masked.iter_mut().enumerate() {
        if (x[j] - x[i1]).abs() < 3.0 * w1 {
            *m = true;
        }
    }
    let (i2, w2) = find_extreme(x, y, b0, &masked).unwrap_or((if i1 == 0 { x.len() - 1 } else { 0 }, w1));

    let model = |p: &[f64], xi: f64| -> f64 {
        let l1 = p[3] * p[2] * p[2] / ((xi - p[1]).powi(2) + p[2] * p[2]);
        let l2 = p[6] * p[5] * p[5] / ((xi - p[4]).powi(2) + p[5] * p[5]);
        p[0] + l1 + l2
    };
    let residual = |p: &[f64], out: &mut [f64]| {
        for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
            out[i] = model(p, xi) - yi;
        }
    };
    let span = (x[x.len() - 1] - x[0]).abs();
    let height_scale = (y[i1] - b0).abs().max(1e-300);
    let p0 = [
        b0,
        x[i1],
        w1.max(1e-3 * span),
        y[i1] - b0,
        x[i2],
        w2.max(1e-3 * span),
        y[i2] - b0,
    ];
    let scales = [
        height_scale,
        span,
        0.1 * span,
        height_scale,
        span,
        0.1 * span,
        height_scale,
    ];
    let sol = levenberg(residual, &p0, &scales, x.len())?;
    let p = &sol.params;
    let e = &sol.stderr;

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let signal_norm = y.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>().sqrt();
    let rel_residual = if signal_norm > 0.0 {
        sol.ssr.sqrt() / signal_norm
    } else {
        0.0
    };

    // Order the two components by center and take widths as magnitudes.
    let mut comps = [(p[1], p[2].abs(), p[3], e[1], e[2], e[3]),
        (p[4], p[5].abs(), p[6], e[4], e[5], e[6])];
    if comps[0].0 > comps[1].0 {
        comps.swap(0, 1);
    }
    if comps[0].1 == 0.0 || comps[1].1 == 0.0 {
        return Err(FitError::Domain("zero-width component".into()));
    }
    // Two features count as resolved only if they are separated by more than
    // their summed widths, are of comparable size (a tiny secondary component
    // is a tail correction, not a second peak), and both sit inside the
    // scanned range.
    let (x_min, x_max) = (x[0].min(x[x.len() - 1]), x[0].max(x[x.len() - 1]));
    let (h_lo, h_hi) = (
        comps[0].2.abs().min(comps[1].2.abs()),
        comps[0].2.abs().max(comps[1].2.abs()),
    );
    let resolved = (comps[1].0 - comps[0].0).abs() > comps[0].1 + comps[1].1
        && h_lo >= 0.2 * h_hi
        && comps.iter().all(|c| c.0 >= x_min && c.0 <= x_max);
    Ok(LorentzianPairFit {
        baseline: p[0],
        centers: [comps[0].0, comps[1].0],
        widths: [comps[0].1, comps[1].1],
        heights: [comps[0].2, comps[1].2],
        baseline_err: e[0],
        center_err: [comps[0].3, comps[1].3],
        width_err: [comps[0].4, comps[1].4],
        height_err: [comps[0].5, comps[1].5],
        rel_residual,
        resolved_pair: resolved,
    })
}
