//! Experiment runner behind the `cfslab` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "cfslab", version, about = "Causal fermion system experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Outputs are byte-identical across runs at a fixed count.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Closed-chain spectra against dense operator products.
    Eigencheck,
    /// Dirac-sea epsilon sweep with Lagrangian statistics per causal class.
    VacuumSweep,
    /// Minimize the causal action over a finite measure.
    Minimize,
    /// Flow descent for the discrete variational principle.
    DiscreteVp,
    /// Convergence tables for the contour sea projector.
    SeaContour,
    /// Dyson truncation against the adaptive integrator.
    PexpTest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigencheck => "eigencheck",
            Command::VacuumSweep => "vacuum-sweep",
            Command::Minimize => "minimize",
            Command::DiscreteVp => "discrete-vp",
            Command::SeaContour => "sea-contour",
            Command::PexpTest => "pexp-test",
        }
    }

    /// Table name in the config file.
    pub fn section(self) -> &'static str {
        match self {
            Command::Eigencheck => "eigencheck",
            Command::VacuumSweep => "vacuum_sweep",
            Command::Minimize => "minimize",
            Command::DiscreteVp => "discrete_vp",
            Command::SeaContour => "sea_contour",
            Command::PexpTest => "pexp_test",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Compute(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Io(m) => ("io", m),
            CliError::Compute(m) => ("compute", m),
        };
        // diagnostics stay on one line
        write!(f, "{kind}: {}", msg.split_whitespace().collect::<Vec<_>>().join(" "))
    }
}

impl From<cfslab::Error> for CliError {
    fn from(e: cfslab::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<()> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let loaded = config::load(path, cli.command, cli.seed)?;
    if cli.threads == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    cfslab::par::set_threads(cli.threads).map_err(CliError::Config)?;
    let mut out = output::OutDir::create(&cli.out, cli.verbose)?;
    out.log(&format!("{} seed {} threads {}", cli.command.name(), loaded.seed, cli.threads));
    let summary = commands::dispatch(&loaded, &mut out)?;
    out.write_manifest(cli.command.name(), &loaded, cli.threads, summary)?;
    Ok(())
}
