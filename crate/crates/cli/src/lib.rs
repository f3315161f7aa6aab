//! Command-line orchestration of the connectedness and policy-shock pipeline.

pub mod config;
pub mod error;
pub mod stages;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Overrides, PipelineConfig};
pub use error::{CliError, ErrorKind};
use stages::Run;

#[derive(Debug, Parser)]
#[command(
    name = "mmconnect",
    version,
    about = "Multi-moment connectedness networks and policy-shock responses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Returns, summary statistics and mixture moments.
    Moments(CommonArgs),
    /// TVP-VAR connectedness for each moment layer.
    Connect(CommonArgs),
    /// Multi-layer network, projection layer and node metrics.
    Network(CommonArgs),
    /// Sign-identified monetary-policy and information shocks.
    Shocks(CommonArgs),
    /// Local projections of connectedness indices on the shocks.
    Lp(CommonArgs),
    /// Every stage in order.
    Pipeline(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Pipeline configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Seed for every stochastic stage.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Restrict to these layers (repeatable).
    #[arg(long)]
    pub layer: Vec<String>,
    /// More log output; repeat for debug detail.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Override a configuration key, e.g. `--set tvpvar.lambda=0.98`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Moments(_) => "moments",
            Command::Connect(_) => "connect",
            Command::Network(_) => "network",
            Command::Shocks(_) => "shocks",
            Command::Lp(_) => "lp",
            Command::Pipeline(_) => "pipeline",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Moments(a)
            | Command::Connect(a)
            | Command::Network(a)
            | Command::Shocks(a)
            | Command::Lp(a)
            | Command::Pipeline(a) => a,
        }
    }
}

/// Loads the configuration and runs `command`, writing the run manifest on
/// success.
pub fn execute(command: &Command) -> Result<(), CliError> {
    let args = command.args();
    let overrides = Overrides {
        seed: args.seed,
        out: args.out.clone(),
        threads: args.threads,
        layers: args.layer.clone(),
        set: args.set.clone(),
    };
    let cfg = PipelineConfig::load(&args.config, &overrides)?;
    if cfg.threads > 0 {
        // Fails only if a pool already exists, which keeps the first setting.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    let mut run = Run::new(cfg, command.name())?;
    match command {
        Command::Moments(_) => stages::cmd_moments(&mut run)?,
        Command::Connect(_) => stages::cmd_connect(&mut run)?,
        Command::Network(_) => stages::cmd_network(&mut run)?,
        Command::Shocks(_) => stages::cmd_shocks(&mut run)?,
        Command::Lp(_) => stages::cmd_lp(&mut run)?,
        Command::Pipeline(_) => stages::cmd_pipeline(&mut run)?,
    }
    run.finish()
}
