//! One module per subcommand.  Each command is a pure function of the
//! resolved configuration and the seed: all randomness flows through the
//! per-trajectory seeding contract, and files are written in a fixed order.

pub mod dynamics;
pub mod noise_check;
pub mod pump_probe;
pub mod readout;
pub mod shift;
pub mod steady;

use crate::config::Resolved;
use crate::CliError;
use driven_qubit::bath::BathSpec;

/// Bath with the damping replaced, all other parameters from the run.
pub(crate) fn bath_at_gamma(r: &Resolved, gamma: f64) -> Result<BathSpec, CliError> {
    Ok(BathSpec::from_gamma(
        gamma,
        r.bath.omega_c,
        r.bath.hbar_beta,
        r.omega_q,
    )?)
}

/// Damping values a sweep command iterates over: the configured list, or the
/// single bath value when no list was given.
pub(crate) fn sweep_gammas(r: &Resolved) -> Vec<f64> {
    if r.gamma_list.is_empty() {
        vec![r.bath.gamma()]
    } else {
        r.gamma_list.clone()
    }
}

/// File stem suffix distinguishing sweep points: empty for a single run.
pub(crate) fn gamma_suffix(n_gammas: usize, index: usize) -> String {
    if n_gammas > 1 {
        format!("_g{index}")
    } else {
        String::new()
    }
}
