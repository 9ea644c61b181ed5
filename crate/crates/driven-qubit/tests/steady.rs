//! Cross-checks of the closed-form steady-state results against direct
//! numerics: scaled component differences vs. literal subtraction, the
//! Liouvillian null space vs. the algebraic Bloch vector, the detuning
//! fidelity vs. a state-overlap oracle, and the critical-ratio formula vs.
//! a brute-force scan of the fidelity minimum.

use driven_qubit::algebra::{fidelity, from_bloch, to_bloch};
use driven_qubit::bath::BathRates;
use driven_qubit::propagate::{lme_liouvillian, DriveSpec, LindbladModel};
use driven_qubit::steady::{
    critical_ratio, delta_sigma, lme_detuning_fidelity, steady_bloch_rwa, steady_state_numeric,
    SteadyParams,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::TAU;

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    lo * (hi / lo).powf(rng.random::<f64>())
}

#[test]
fn scaled_differences_match_direct_subtraction_everywhere() {
    let mut rng = StdRng::seed_from_u64(71);
    for _ in 0..10_000 {
        let gamma = log_uniform(&mut rng, 1e-3, 1.0);
        let gamma_beta = gamma * (1.0 + rng.random::<f64>());
        let omega_d = log_uniform(&mut rng, 1e-3, 10.0);
        let delta_q = (rng.random::<f64>() - 0.5) * 20.0 * omega_d;
        let p = SteadyParams::new(omega_d, gamma, gamma_beta, delta_q).unwrap();
        let resonant = SteadyParams::new(omega_d, gamma, gamma_beta, 0.0).unwrap();

        let direct = {
            let d = steady_bloch_rwa(&p);
            let r = steady_bloch_rwa(&resonant);
            (d.x - r.x, d.y - r.y, d.z - r.z)
        };
        let (dx, dy, dz) = delta_sigma(&p);
        assert!((dx - direct.0).abs() < 1e-12, "dx {dx} vs {}", direct.0);
        assert!((dy - direct.1).abs() < 1e-12, "dy {dy} vs {}", direct.1);
        assert!((dz - direct.2).abs() < 1e-12, "dz {dz} vs {}", direct.2);

        // The longitudinal and y differences are nonnegative for any
        // detuning; x is odd in Δ_q while the others are even.
        assert!(dy >= 0.0 && dz >= 0.0);
        let flipped = SteadyParams { delta_q: -delta_q, ..p };
        let (fx, fy, fz) = delta_sigma(&flipped);
        assert_eq!(fx, -dx);
        assert_eq!(fy, dy);
        assert_eq!(fz, dz);
    }
}

#[test]
fn null_space_agrees_with_closed_form_for_random_rwa_drives() {
    let omega_q = TAU * 5.0;
    let mut rng = StdRng::seed_from_u64(72);
    for _ in 0..1000 {
        let gamma = log_uniform(&mut rng, 1e-4, 0.1) * omega_q;
        let n_bar = 2.0 * rng.random::<f64>();
        let gamma_beta = gamma * (2.0 * n_bar + 1.0);
        let omega_d = gamma * log_uniform(&mut rng, 1e-3, 1e2);
        // Keep the tone frequency positive: the generator only sees Δ_q and
        // Ω_d, so capping the detuning loses no coverage.
        let delta_q = ((rng.random::<f64>() - 0.5) * 10.0 * omega_d.max(gamma))
            .clamp(-0.4 * omega_q, 0.4 * omega_q);

        let model = LindbladModel {
            omega_q,
            bath_rates: BathRates {
                gamma,
                gamma_beta,
                gamma_down: gamma * (n_bar + 1.0),
                gamma_up: gamma * n_bar,
                delta_s: 0.0,
            },
            drive: DriveSpec::rwa_tone(omega_d, omega_q - delta_q).unwrap(),
            include_shift: false,
        };
        let l = lme_liouvillian(&model, 0.0).unwrap();
        let numeric = to_bloch(&steady_state_numeric(&l).unwrap()).unwrap();
        let closed =
            steady_bloch_rwa(&SteadyParams::new(omega_d, gamma, gamma_beta, delta_q).unwrap());
        assert!((numeric.x - closed.x).abs() < 1e-9, "x: {} vs {}", numeric.x, closed.x);
        assert!((numeric.y - closed.y).abs() < 1e-9, "y: {} vs {}", numeric.y, closed.y);
        assert!((numeric.z - closed.z).abs() < 1e-9, "z: {} vs {}", numeric.z, closed.z);
    }
}

#[test]
fn detuning_fidelity_equals_state_overlap_at_equal_rates() {
    let mut rng = StdRng::seed_from_u64(73);
    for _ in 0..200 {
        let gamma = log_uniform(&mut rng, 1e-3, 1.0);
        let omega_d = log_uniform(&mut rng, 1e-3, 1.0);
        let delta_s = -(rng.random::<f64>() * 4.0) * gamma;

        let resonant = SteadyParams::new(omega_d, gamma, gamma, 0.0).unwrap();
        let detuned = SteadyParams { delta_q: delta_s, ..resonant };
        let overlap = fidelity(
            &from_bloch(&steady_bloch_rwa(&resonant)).unwrap(),
            &from_bloch(&steady_bloch_rwa(&detuned)).unwrap(),
        )
        .unwrap();
        let closed = lme_detuning_fidelity(delta_s, omega_d, gamma);
        assert!(
            (overlap - closed).abs() < 1e-12,
            "overlap {overlap} vs closed form {closed}"
        );
    }
}

#[test]
fn critical_ratio_sits_at_the_scanned_fidelity_minimum() {
    for alpha in [0.5, 1.0, 2.0] {
        // Scan ε = γ/Ω_d on a log grid with Ω_d = 1 and Δ_s = −αγ.
        let (lo, hi, n) = (0.2f64, 5.0f64, 4001usize);
        let step = (hi / lo).ln() / (n - 1) as f64;
        let fid = |eps: f64| lme_detuning_fidelity(-alpha * eps, 1.0, eps);
        let (mut k_min, mut f_min) = (0, f64::INFINITY);
        for k in 0..n {
            let f = fid(lo * (step * k as f64).exp());
            if f < f_min {
                (k_min, f_min) = (k, f);
            }
        }
        assert!(k_min > 0 && k_min < n - 1, "minimum hit the scan edge");

        // Parabolic refinement in log-ε around the grid minimum.
        let f = |k: usize| fid(lo * (step * k as f64).exp());
        let (fm, f0, fp) = (f(k_min - 1), f(k_min), f(k_min + 1));
        let shift = 0.5 * (fm - fp) / (fm - 2.0 * f0 + fp);
        let eps_scan = lo * (step * (k_min as f64 + shift)).exp();

        let eps_closed = critical_ratio(alpha).unwrap();
        assert!(
            ((eps_scan - eps_closed) / eps_closed).abs() < 1e-5,
            "alpha {alpha}: scan {eps_scan} vs closed {eps_closed}"
        );
        // The scanned value is a genuine interior minimum.
        assert!(fid(eps_closed * 0.5) > f_min && fid(eps_closed * 2.0) > f_min);
    }
}
