//! Experiment runner for the driven-qubit toolkit: resolves a unit-tagged
//! JSON configuration, orchestrates the solvers over parameter grids, and
//! serializes CSV/JSON results with a hashed reproducibility manifest.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

use thiserror::Error;

/// Process-level failure classes; the exit code encodes which one occurred.
#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration could not be parsed or validated (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// A solver, fit, or output stage failed at runtime (exit code 3).
    #[error("runtime error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn config(msg: String) -> Self {
        Self::Config(msg)
    }

    pub fn numeric(msg: String) -> Self {
        Self::Numeric(msg)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

macro_rules! numeric_from {
    ($($ty:ty),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Numeric(e.to_string())
            }
        })*
    };
}

numeric_from!(
    driven_qubit::algebra::AlgebraError,
    driven_qubit::bath::BathError,
    driven_qubit::fit::FitError,
    driven_qubit::noise::NoiseError,
    driven_qubit::propagate::PropagateError,
    driven_qubit::readout::ReadoutError,
    driven_qubit::spectroscopy::SpectroscopyError,
    driven_qubit::steady::SteadyError,
    serde_json::Error,
    std::io::Error,
);
