//! `pfcircuit`: simulate and verify the coupled loss-gain circuit.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pfcircuit_core::Error;

use config::ConfigArgs;

#[derive(Debug, Parser)]
#[command(name = "pfcircuit", version, about = "Pseudo-fermionic analysis of a coupled loss-gain circuit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Check the regime conditions and emit the regime report
    Validate,
    /// Emit the closed-form spectrum
    Spectrum,
    /// Simulate the circuit and emit the trajectory with power and energy
    Simulate,
    /// Run the full identity suite
    Verify,
    /// Simulate the adjoint system and check its circuit reading
    Adjoint,
    /// Emit the diagonal H0 trajectories
    H0,
    /// Emit norm growth of the evolved number operators
    Heisenberg,
    /// Sweep (mu, gamma) and classify every grid point
    Sweep,
}

/// Unusable configuration: bad flags, bad file, inconsistent fields.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_REGIME: u8 = 3;

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() || err.downcast_ref::<std::io::Error>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::RegimeRejected(_)
            | Error::ZeroCoupling
            | Error::NearDegenerate { .. }
            | Error::CouplingOutOfRange { .. },
        ) => EXIT_REGIME,
        Some(
            Error::NonPositiveParameter { .. }
            | Error::GaugeDegenerate { .. }
            | Error::GridEmpty
            | Error::InvalidGrid(_)
            | Error::UnitMismatch(_)
            | Error::PairIndex(_),
        ) => EXIT_CONFIG,
        _ => EXIT_CHECK_FAILED,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .config
        .resolve()
        .map_err(anyhow::Error::from)
        .and_then(|cfg| commands::run(cli.command, &cfg));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
