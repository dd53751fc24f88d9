//! `acmor`: solve, reduce and certify parametrized Allen-Cahn runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use acmor_cli::commands::{self, RomMode};
use acmor_cli::config::ExperimentConfig;
use acmor_cli::{exit_code_for, exit_codes};

#[derive(Parser)]
#[command(
    name = "acmor",
    about = "Energy-stable reduced-order modelling of the 2D Allen-Cahn equation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Deim,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the full-order model and store trajectory and energy trace.
    Fom {
        #[arg(long)]
        config: PathBuf,
        /// Parameter value (defaults to the config's test value).
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random-initial-condition seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write vertices.csv / triangles.csv.
        #[arg(long)]
        export_mesh: bool,
        /// Also write the mass and unit stiffness in coordinate format.
        #[arg(long)]
        export_operators: bool,
    },
    /// Run the POD-greedy sampling loop and store the offline artifacts.
    Greedy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Online reduced solve at one parameter.
    Rom {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mu: Option<f64>,
        /// exact: projected full-order nonlinearity; deim: hyper-reduced.
        #[arg(long, value_enum, default_value = "deim")]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// FOM vs PODG vs PODG-DEIM errors and timings at a test parameter.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Best-of-3 wall-clock benchmark of the three solvers.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Step-size bounds certifying energy decrease of the DEIM solve.
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(config: &PathBuf, seed: Option<u64>) -> acmor::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.override_seed(seed)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> acmor::Result<()> {
    match cli.command {
        Command::Fom { config, mu, out, seed, export_mesh, export_operators } => {
            let cfg = load(&config, seed)?;
            commands::run_fom(&cfg, mu, &out, export_mesh, export_operators)
        }
        Command::Greedy { config, out, seed } => {
            let cfg = load(&config, seed)?;
            commands::run_greedy(&cfg, &out)
        }
        Command::Rom { config, mu, mode, out, seed } => {
            let cfg = load(&config, seed)?;
            let mode = match mode {
                ModeArg::Exact => RomMode::Exact,
                ModeArg::Deim => RomMode::Deim,
            };
            commands::run_rom(&cfg, mu, mode, &out)
        }
        Command::Compare { config, mu, out, seed } => {
            let cfg = load(&config, seed)?;
            commands::run_compare(&cfg, mu, &out)
        }
        Command::Bench { config, mu, out, seed } => {
            let cfg = load(&config, seed)?;
            commands::run_bench(&cfg, mu, &out)
        }
        Command::Stability { config, mu, out, seed } => {
            let cfg = load(&config, seed)?;
            commands::run_stability(&cfg, mu, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit_codes::OK as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}
