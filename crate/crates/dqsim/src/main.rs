use clap::{Parser, Subcommand};
use dqsim::config::{Profile, RunConfig};
use dqsim::output::OutputWriter;
use dqsim::{commands, manifest, CliError};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Simulation experiments for a driven two-level system in an Ohmic bath.
#[derive(Parser)]
#[command(name = "dqsim", version, about)]
struct Cli {
    /// JSON configuration; Table-style defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (one per invocation); defaults to runs/<command>.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Desk-scale or publication-scale preset.
    #[arg(long, global = true, value_enum, default_value_t = Profile::Fast)]
    profile: Profile,
    /// Base seed override for all stochastic stages.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for trajectory ensembles (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Bloch-vector dynamics per solver, with a fidelity summary over a γ list.
    Dynamics,
    /// Steady-state detuning maps, shift markers, and the failure witness.
    Steady,
    /// Frequency shift vs damping: bath integral and stochastic fit.
    Shift,
    /// Two-tone probe scan with sideband fit and transmission.
    PumpProbe,
    /// Noise-synthesis autocorrelation against the bath oracle.
    NoiseCheck,
    /// Resonator forward model for given qubit populations.
    Readout,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Dynamics => "dynamics",
            Command::Steady => "steady",
            Command::Shift => "shift",
            Command::PumpProbe => "pump-probe",
            Command::NoiseCheck => "noise-check",
            Command::Readout => "readout",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::config("--workers must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::config(format!("--workers: {e}")))?;
    }

    let config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let resolved = config.resolve(cli.profile, cli.seed)?;

    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()));
    let mut writer = OutputWriter::new(&out_dir, resolved.write_csv, resolved.write_json)?;

    let start = Instant::now();
    match cli.command {
        Command::Dynamics => commands::dynamics::run(&resolved, &mut writer)?,
        Command::Steady => commands::steady::run(&resolved, &mut writer)?,
        Command::Shift => commands::shift::run(&resolved, &mut writer)?,
        Command::PumpProbe => commands::pump_probe::run(&resolved, &mut writer)?,
        Command::NoiseCheck => commands::noise_check::run(&resolved, &mut writer)?,
        Command::Readout => commands::readout::run(&resolved, &mut writer)?,
    }

    let doc = manifest::build(
        cli.command.name(),
        &resolved,
        cli.workers,
        start.elapsed().as_secs_f64(),
        writer.file_hashes(),
    )?;
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    let path = writer.dir().join("manifest.json");
    std::fs::write(&path, bytes)
        .map_err(|e| CliError::numeric(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dqsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
