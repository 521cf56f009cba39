mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::Artifacts;

/// Batch driver for the fluxlab experiments.
///
/// Every run reads one JSON config, writes CSV/JSON artifacts and a
/// `manifest.json` into the output directory, and exits with 2 on a bad
/// config, 3 on a numeric failure and 4 when the Fock cutoff leaks.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override a scalar config field, e.g. `--set drive.omega_q=1.0`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory; beats `output_dir` in the config.
    #[arg(short, long, env = "FLUXLAB_OUT", global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Energy levels and diagonal currents over a flux grid.
    Spectrum,
    /// Loop and third-junction current matrix elements over a flux grid.
    MatrixElements,
    /// Excited population against drive frequency.
    Spectroscopy,
    /// Excited population against the Bessel argument on resonance.
    Transparency,
    /// Survival against the Bessel argument for a qubit in a discrete bath.
    Zeno,
    /// Full qubit-oscillator trace at one tuning.
    Oscillator,
    /// Exact against dispersive low-lying levels.
    DispersiveCheck,
    /// Both tunings and their control cases.
    Coexistence,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::MatrixElements => "matrix-elements",
            Command::Spectroscopy => "spectroscopy",
            Command::Transparency => "transparency",
            Command::Zeno => "zeno",
            Command::Oscillator => "oscillator",
            Command::DispersiveCheck => "dispersive-check",
            Command::Coexistence => "coexistence",
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use fluxlab::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::CutoffLeak { .. } => 4,
                E::InvalidParameter(_)
                | E::Dimension { .. }
                | E::Range(_)
                | E::Arity { .. }
                | E::ParityUndefined { .. }
                | E::Normalization { .. }
                | E::SectorViolation { .. }
                | E::DispersiveRegime { .. }
                | E::DegenerateDressing => 2,
                _ => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}

fn run(cli: &Cli) -> anyhow::Result<PathBuf> {
    let path = cli.config.as_ref().ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    let cfg = RunConfig::load(path, &cli.overrides)?;
    let dir = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let mut out = Artifacts::create(&dir.join(cli.command.name()))?;
    match cli.command {
        Command::Spectrum => commands::spectrum(&cfg, &mut out),
        Command::MatrixElements => commands::matrix_elements(&cfg, &mut out),
        Command::Spectroscopy => commands::spectroscopy(&cfg, &mut out),
        Command::Transparency => commands::transparency(&cfg, &mut out),
        Command::Zeno => commands::zeno(&cfg, &mut out),
        Command::Oscillator => commands::oscillator(&cfg, &mut out),
        Command::DispersiveCheck => commands::dispersive_check(&cfg, &mut out),
        Command::Coexistence => commands::coexistence(&cfg, &mut out),
    }?;
    out.finish(cli.command.name(), &serde_json::to_value(&cfg)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
