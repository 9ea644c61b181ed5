//! Run configuration: a single JSON document in which every physical
//! quantity is a `{value, unit}` pair drawn from a fixed unit whitelist.
//! Parsing maps everything onto internal units (angular frequency in
//! rad/ns, time in ns, temperature as ħβ in ns) and fills Table-style
//! defaults for anything omitted.

use crate::CliError;
use driven_qubit::bath::BathSpec;
use driven_qubit::readout::ResonatorSpec;
use driven_qubit::spectroscopy::SolverKind;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::Path;

/// ħ/k_B in mK·ns; converts a temperature in mK into ħβ in ns.
pub const HBAR_OVER_KB_MK_NS: f64 = 7.638_232_36;

// ---------------------------------------------------------------------------
// Quantities and units
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    GHz,
    MHz,
    #[serde(rename = "kHz")]
    KHz,
    #[serde(rename = "rad_per_s")]
    RadPerS,
    #[serde(rename = "mK")]
    MilliKelvin,
    #[serde(rename = "dimensionless")]
    Dimensionless,
}

/// A unit-tagged number as it appears in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    /// Angular frequency in rad/ns.  Plain-frequency units are multiplied
    /// by 2π; `rad_per_s` is only rescaled.
    pub fn angular_frequency(&self, field: &str) -> Result<f64, CliError> {
        let v = self.finite(field)?;
        match self.unit {
            Unit::GHz => Ok(TAU * v),
            Unit::MHz => Ok(TAU * v * 1e-3),
            Unit::KHz => Ok(TAU * v * 1e-6),
            Unit::RadPerS => Ok(v * 1e-9),
            u => Err(CliError::config(format!(
                "{field}: unit {u:?} is not a frequency unit"
            ))),
        }
    }

    /// Inverse temperature ħβ in ns from a temperature in mK.
    pub fn hbar_beta(&self, field: &str) -> Result<f64, CliError> {
        let v = self.finite(field)?;
        match self.unit {
            Unit::MilliKelvin if v > 0.0 => Ok(HBAR_OVER_KB_MK_NS / v),
            Unit::MilliKelvin => Err(CliError::config(format!(
                "{field}: temperature must be > 0, got {v}"
            ))),
            u => Err(CliError::config(format!(
                "{field}: unit {u:?} is not a temperature unit"
            ))),
        }
    }

    pub fn dimensionless(&self, field: &str) -> Result<f64, CliError> {
        let v = self.finite(field)?;
        match self.unit {
            Unit::Dimensionless => Ok(v),
            u => Err(CliError::config(format!(
                "{field}: expected a dimensionless value, got unit {u:?}"
            ))),
        }
    }

    fn finite(&self, field: &str) -> Result<f64, CliError> {
        if self.value.is_finite() {
            Ok(self.value)
        } else {
            Err(CliError::config(format!(
                "{field}: non-finite value {}",
                self.value
            )))
        }
    }

    /// Expresses an internal angular frequency (rad/ns) in the given unit.
    pub fn from_angular(omega: f64, unit: Unit) -> Self {
        let value = match unit {
            Unit::GHz => omega / TAU,
            Unit::MHz => omega / TAU * 1e3,
            Unit::KHz => omega / TAU * 1e6,
            Unit::RadPerS => omega * 1e9,
            Unit::MilliKelvin | Unit::Dimensionless => {
                unreachable!("not a frequency unit")
            }
        };
        Self { value, unit }
    }

    /// Expresses an internal ħβ (ns) as a temperature in mK.
    pub fn from_hbar_beta(hbar_beta: f64) -> Self {
        Self {
            value: HBAR_OVER_KB_MK_NS / hbar_beta,
            unit: Unit::MilliKelvin,
        }
    }

    pub fn bare(value: f64) -> Self {
        Self {
            value,
            unit: Unit::Dimensionless,
        }
    }
}

// ---------------------------------------------------------------------------
// Raw document model
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub qubit: QubitSection,
    pub bath: BathSection,
    pub drive: DriveSection,
    /// Solvers to run: any of "lme", "lme-nes" (no energy shift), "sled".
    pub solvers: Option<Vec<String>>,
    pub plan: PlanSection,
    pub readout: ReadoutSection,
    pub steady: SteadySection,
    pub noise: NoiseSection,
    pub readout_input: ReadoutInputSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitSection {
    pub omega_q: Option<Quantity>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathSection {
    /// Dimensionless coupling; exactly one of `eta` and `gamma` may be set.
    pub eta: Option<Quantity>,
    /// Relaxation rate γ = 2ηω_q as a frequency.
    pub gamma: Option<Quantity>,
    pub omega_c: Option<Quantity>,
    /// Bath temperature; exactly one of `temperature` and
    /// `hbar_beta_omega_q` may be set.
    pub temperature: Option<Quantity>,
    pub hbar_beta_omega_q: Option<Quantity>,
    /// Damping sweep for the dynamics fidelity summary and the shift scan.
    pub gamma_list: Option<Vec<Quantity>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    /// Pump Rabi amplitude Ω_d.
    pub amplitude: Option<Quantity>,
    /// "bare" drives at ω_q; "shifted" drives at ω_q + Δ_s.
    pub frequency_policy: Option<String>,
    /// Probe Rabi amplitude Ω_p.
    pub probe_amplitude: Option<Quantity>,
    /// Probe grid half-span in units of Ω_d around the pump frequency.
    pub probe_span_over_drive: Option<Quantity>,
    pub probe_points: Option<usize>,
    /// Beat periods averaged per probe point.
    pub beat_periods: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    /// Multiplier on the solver's default time step.
    pub dt_scale: Option<Quantity>,
    /// Horizon in units of 1/γ.
    pub t_final_over_gamma: Option<Quantity>,
    pub n_traj: Option<usize>,
    pub base_seed: Option<u64>,
    pub record_stride: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutSection {
    pub omega_r: Option<Quantity>,
    pub kappa: Option<Quantity>,
    pub chi: Option<Quantity>,
    pub drive_amplitude: Option<Quantity>,
    /// Measurement tone; defaults to ω_r (resonant readout).
    pub drive_frequency: Option<Quantity>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadySection {
    /// Damping grid for the maps, in units of Ω_d (log-spaced).
    pub gamma_over_drive_min: Option<Quantity>,
    pub gamma_over_drive_max: Option<Quantity>,
    pub gamma_points: Option<usize>,
    /// Detuning grid half-span in units of Ω_d (linear).
    pub detuning_span_over_drive: Option<Quantity>,
    pub detuning_points: Option<usize>,
    /// Damping values for the failure-witness curve.
    pub witness_gammas: Option<Vec<Quantity>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// Autocorrelation lags in units of the noise grid step.
    pub lag_steps: Option<Vec<usize>>,
    /// Samples per record (power of two).
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutInputSection {
    /// Qubit populations to map through the resonator.
    pub sigma_z: Option<Vec<Quantity>>,
    /// Alternatively, a pump-probe CSV whose sigma_z_bar column is mapped.
    pub scan_file: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Any of "csv", "json"; default both.
    pub formats: Option<Vec<String>>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
    }
}

// ---------------------------------------------------------------------------
// Profiles and solver names
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Desk-scale preset: 500 trajectories, halved horizons.
    Fast,
    /// Publication-scale preset: 10⁴ trajectories, full horizons.
    Paper,
}

impl Profile {
    pub fn default_n_traj(self) -> usize {
        match self {
            Profile::Fast => 500,
            Profile::Paper => 10_000,
        }
    }

    pub fn horizon_scale(self) -> f64 {
        match self {
            Profile::Fast => 0.5,
            Profile::Paper => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Fast => "fast",
            Profile::Paper => "paper",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverName {
    #[serde(rename = "lme")]
    Lme,
    #[serde(rename = "lme-nes")]
    LmeNes,
    #[serde(rename = "sled")]
    Sled,
}

impl SolverName {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "lme" => Ok(Self::Lme),
            "lme-nes" => Ok(Self::LmeNes),
            "sled" => Ok(Self::Sled),
            other => Err(CliError::config(format!(
                "unknown solver {other:?}; expected one of lme, lme-nes, sled"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lme => "lme",
            Self::LmeNes => "lme-nes",
            Self::Sled => "sled",
        }
    }

    pub fn kind(self) -> SolverKind {
        match self {
            Self::Lme => SolverKind::Lme,
            Self::LmeNes => SolverKind::LmeNoShift,
            Self::Sled => SolverKind::Sled,
        }
    }

    /// Whether this solver applies the bath-induced frequency shift when the
    /// drive policy asks for the shifted frame.
    pub fn uses_shift(self) -> bool {
        !matches!(self, Self::LmeNes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrequencyPolicy {
    Bare,
    Shifted,
}

// ---------------------------------------------------------------------------
// Resolved parameters (internal units)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Resolved {
    pub omega_q: f64,
    pub bath: BathSpec,
    pub gamma_list: Vec<f64>,
    pub drive_amplitude: f64,
    pub probe_amplitude: f64,
    pub frequency_policy: FrequencyPolicy,
    pub probe_span: f64,
    pub probe_points: usize,
    pub beat_periods: usize,
    pub solvers: Vec<SolverName>,
    pub dt_scale: f64,
    pub t_final_over_gamma: f64,
    pub n_traj: usize,
    pub base_seed: u64,
    pub record_stride: usize,
    pub resonator: ResonatorSpec,
    pub steady_gamma_over_drive: (f64, f64, usize),
    pub steady_detuning: (f64, usize),
    pub witness_gammas: Vec<f64>,
    pub noise_lag_steps: Vec<usize>,
    pub noise_samples: usize,
    pub readout_sigma_z: Vec<f64>,
    pub readout_scan_file: Option<String>,
    pub write_csv: bool,
    pub write_json: bool,
    pub profile: Profile,
}

fn exactly_one<T>(
    a: Option<T>,
    b: Option<T>,
    what: &str,
    names: (&str, &str),
) -> Result<Option<(bool, T)>, CliError> {
    match (a, b) {
        (Some(_), Some(_)) => Err(CliError::config(format!(
            "{what}: give {} or {}, not both",
            names.0, names.1
        ))),
        (Some(v), None) => Ok(Some((true, v))),
        (None, Some(v)) => Ok(Some((false, v))),
        (None, None) => Ok(None),
    }
}

impl RunConfig {
    /// Applies Table-style defaults and converts to internal units.  The
    /// profile supplies the trajectory budget and a horizon multiplier;
    /// `seed_override` (from --seed) wins over the config seed.
    pub fn resolve(
        &self,
        profile: Profile,
        seed_override: Option<u64>,
    ) -> Result<Resolved, CliError> {
        let omega_q = self
            .qubit
            .omega_q
            .unwrap_or(Quantity::new(5.0, Unit::GHz))
            .angular_frequency("qubit.omega_q")?;
        if !(omega_q > 0.0) {
            return Err(CliError::config(format!(
                "qubit.omega_q must be positive, got {omega_q} rad/ns"
            )));
        }

        let eta = match exactly_one(
            self.bath.eta,
            self.bath.gamma,
            "bath coupling",
            ("eta", "gamma"),
        )? {
            Some((true, q)) => q.dimensionless("bath.eta")?,
            Some((false, q)) => q.angular_frequency("bath.gamma")? / (2.0 * omega_q),
            None => 5e-3,
        };
        let omega_c = self
            .bath
            .omega_c
            .map(|q| q.angular_frequency("bath.omega_c"))
            .transpose()?
            .unwrap_or(50.0 * omega_q);
        let hbar_beta = match exactly_one(
            self.bath.temperature,
            self.bath.hbar_beta_omega_q,
            "bath temperature",
            ("temperature", "hbar_beta_omega_q"),
        )? {
            Some((true, q)) => q.hbar_beta("bath.temperature")?,
            Some((false, q)) => {
                let x = q.dimensionless("bath.hbar_beta_omega_q")?;
                if !(x > 0.0) {
                    return Err(CliError::config(format!(
                        "bath.hbar_beta_omega_q must be positive, got {x}"
                    )));
                }
                x / omega_q
            }
            None => 5.0 / omega_q,
        };
        let bath = BathSpec::new(eta, omega_c, hbar_beta, omega_q)
            .map_err(|e| CliError::config(format!("bath: {e}")))?;

        let gamma_list = self
            .bath
            .gamma_list
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .enumerate()
            .map(|(i, q)| q.angular_frequency(&format!("bath.gamma_list[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        for &g in &gamma_list {
            if !(g > 0.0) {
                return Err(CliError::config(format!(
                    "bath.gamma_list entries must be positive, got {g} rad/ns"
                )));
            }
        }

        let drive_amplitude = self
            .drive
            .amplitude
            .map(|q| q.angular_frequency("drive.amplitude"))
            .transpose()?
            .unwrap_or(TAU * 0.05);
        let probe_amplitude = self
            .drive
            .probe_amplitude
            .map(|q| q.angular_frequency("drive.probe_amplitude"))
            .transpose()?
            .unwrap_or(TAU * 0.005);
        if !(drive_amplitude > 0.0) || probe_amplitude < 0.0 {
            return Err(CliError::config(
                "drive amplitudes: need amplitude > 0 and probe_amplitude ≥ 0".into(),
            ));
        }
        let frequency_policy = match self.drive.frequency_policy.as_deref() {
            None | Some("bare") => FrequencyPolicy::Bare,
            Some("shifted") => FrequencyPolicy::Shifted,
            Some(other) => {
                return Err(CliError::config(format!(
                    "drive.frequency_policy {other:?}: expected \"bare\" or \"shifted\""
                )))
            }
        };
        let probe_span = self
            .drive
            .probe_span_over_drive
            .map(|q| q.dimensionless("drive.probe_span_over_drive"))
            .transpose()?
            .unwrap_or(1.5);
        let probe_points = self.drive.probe_points.unwrap_or(201);
        let beat_periods = self.drive.beat_periods.unwrap_or(20);
        if !(probe_span > 0.0) || probe_points < 2 || beat_periods == 0 {
            return Err(CliError::config(
                "probe grid: need span > 0, at least 2 points, beat_periods ≥ 1".into(),
            ));
        }

        let solvers = match &self.solvers {
            None => vec![SolverName::Lme],
            Some(names) => {
                if names.is_empty() {
                    return Err(CliError::config("solvers: list may not be empty".into()));
                }
                let mut out = Vec::new();
                for n in names {
                    let s = SolverName::parse(n)?;
                    if out.contains(&s) {
                        return Err(CliError::config(format!("solvers: duplicate entry {n:?}")));
                    }
                    out.push(s);
                }
                out
            }
        };

        let dt_scale = self
            .plan
            .dt_scale
            .map(|q| q.dimensionless("plan.dt_scale"))
            .transpose()?
            .unwrap_or(1.0);
        let t_final_over_gamma = self
            .plan
            .t_final_over_gamma
            .map(|q| q.dimensionless("plan.t_final_over_gamma"))
            .transpose()?
            .unwrap_or(10.0);
        if !(dt_scale > 0.0 && dt_scale <= 16.0) || !(t_final_over_gamma > 0.0) {
            return Err(CliError::config(
                "plan: need 0 < dt_scale ≤ 16 and t_final_over_gamma > 0".into(),
            ));
        }
        let n_traj = self.plan.n_traj.unwrap_or(profile.default_n_traj());
        if n_traj == 0 {
            return Err(CliError::config("plan.n_traj must be ≥ 1".into()));
        }
        let base_seed = seed_override.or(self.plan.base_seed).unwrap_or(1);
        let record_stride = self.plan.record_stride.unwrap_or(50).max(1);

        let omega_r = self
            .readout
            .omega_r
            .map(|q| q.angular_frequency("readout.omega_r"))
            .transpose()?
            .unwrap_or(TAU * 7.0);
        let kappa = self
            .readout
            .kappa
            .map(|q| q.angular_frequency("readout.kappa"))
            .transpose()?
            .unwrap_or(TAU * 2.5e-4);
        let chi = self
            .readout
            .chi
            .map(|q| q.angular_frequency("readout.chi"))
            .transpose()?
            .unwrap_or(-TAU * 5e-3);
        let readout_amp = self
            .readout
            .drive_amplitude
            .map(|q| q.angular_frequency("readout.drive_amplitude"))
            .transpose()?
            .unwrap_or(kappa);
        let readout_freq = self
            .readout
            .drive_frequency
            .map(|q| q.angular_frequency("readout.drive_frequency"))
            .transpose()?
            .unwrap_or(omega_r);
        let resonator = ResonatorSpec::new(omega_r, kappa, chi, readout_amp, readout_freq)
            .map_err(|e| CliError::config(format!("readout: {e}")))?;

        let g_lo = self
            .steady
            .gamma_over_drive_min
            .map(|q| q.dimensionless("steady.gamma_over_drive_min"))
            .transpose()?
            .unwrap_or(0.1);
        let g_hi = self
            .steady
            .gamma_over_drive_max
            .map(|q| q.dimensionless("steady.gamma_over_drive_max"))
            .transpose()?
            .unwrap_or(10.0);
        let g_pts = self.steady.gamma_points.unwrap_or(21);
        let d_span = self
            .steady
            .detuning_span_over_drive
            .map(|q| q.dimensionless("steady.detuning_span_over_drive"))
            .transpose()?
            .unwrap_or(3.0);
        let d_pts = self.steady.detuning_points.unwrap_or(21);
        if !(0.0 < g_lo && g_lo < g_hi) || g_pts < 2 || !(d_span > 0.0) || d_pts < 2 {
            return Err(CliError::config(
                "steady grids: need 0 < gamma_over_drive_min < max, span > 0, ≥ 2 points".into(),
            ));
        }
        let witness_gammas = match &self.steady.witness_gammas {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, q)| q.angular_frequency(&format!("steady.witness_gammas[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![0.01, 0.03, 0.1]
                .into_iter()
                .map(|r| r * omega_q)
                .collect(),
        };

        let noise_lag_steps = self
            .noise
            .lag_steps
            .clone()
            .unwrap_or_else(|| vec![0, 1, 2, 5, 10]);
        let noise_samples = self.noise.samples.unwrap_or(4096);
        if noise_lag_steps.is_empty() || !noise_samples.is_power_of_two() || noise_samples < 2 {
            return Err(CliError::config(
                "noise: need at least one lag and a power-of-two sample count ≥ 2".into(),
            ));
        }

        let readout_sigma_z = match &self.readout_input.sigma_z {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, q)| q.dimensionless(&format!("readout_input.sigma_z[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
            None => (0..21).map(|k| -1.0 + k as f64 * 0.1).collect(),
        };
        for &z in &readout_sigma_z {
            if !(-1.0..=1.0).contains(&z) {
                return Err(CliError::config(format!(
                    "readout_input.sigma_z value {z} outside [−1, 1]"
                )));
            }
        }

        let (mut write_csv, mut write_json) = (false, false);
        match self.output.formats.as_deref() {
            None => {
                write_csv = true;
                write_json = true;
            }
            Some(formats) => {
                for f in formats {
                    match f.as_str() {
                        "csv" => write_csv = true,
                        "json" => write_json = true,
                        other => {
                            return Err(CliError::config(format!(
                                "output.formats: unknown format {other:?}"
                            )))
                        }
                    }
                }
                if !write_csv && !write_json {
                    return Err(CliError::config(
                        "output.formats: at least one format required".into(),
                    ));
                }
            }
        }

        Ok(Resolved {
            omega_q,
            bath,
            gamma_list,
            drive_amplitude,
            probe_amplitude,
            frequency_policy,
            probe_span,
            probe_points,
            beat_periods,
            solvers,
            dt_scale,
            t_final_over_gamma,
            n_traj,
            base_seed,
            record_stride,
            resonator,
            steady_gamma_over_drive: (g_lo, g_hi, g_pts),
            steady_detuning: (d_span, d_pts),
            witness_gammas,
            noise_lag_steps,
            noise_samples,
            readout_sigma_z,
            readout_scan_file: self.readout_input.scan_file.clone(),
            write_csv,
            write_json,
            profile,
        })
    }
}

impl Resolved {
    /// Expresses the resolved core parameters back as a unit-tagged config
    /// (GHz / mK), the inverse of [`RunConfig::resolve`] for the fields that
    /// define the physics.
    pub fn to_config(&self) -> RunConfig {
        RunConfig {
            qubit: QubitSection {
                omega_q: Some(Quantity::from_angular(self.omega_q, Unit::GHz)),
            },
            bath: BathSection {
                eta: Some(Quantity::bare(self.bath.eta)),
                gamma: None,
                omega_c: Some(Quantity::from_angular(self.bath.omega_c, Unit::GHz)),
                temperature: Some(Quantity::from_hbar_beta(self.bath.hbar_beta)),
                hbar_beta_omega_q: None,
                gamma_list: None,
            },
            drive: DriveSection {
                amplitude: Some(Quantity::from_angular(self.drive_amplitude, Unit::MHz)),
                probe_amplitude: Some(Quantity::from_angular(self.probe_amplitude, Unit::MHz)),
                ..Default::default()
            },
            readout: ReadoutSection {
                omega_r: Some(Quantity::from_angular(self.resonator.omega_r, Unit::GHz)),
                kappa: Some(Quantity::from_angular(self.resonator.kappa, Unit::MHz)),
                chi: Some(Quantity::from_angular(self.resonator.chi, Unit::MHz)),
                drive_amplitude: Some(Quantity::from_angular(
                    self.resonator.drive_amplitude,
                    Unit::MHz,
                )),
                drive_frequency: Some(Quantity::from_angular(
                    self.resonator.drive_frequency,
                    Unit::GHz,
                )),
            },
            ..Default::default()
        }
    }
}
