//! Batch harness for cascade synthesis rate regions and simulations.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cascade-synth", version, about = "Rate regions and exact simulations of secure cascade channel synthesis")]
pub struct Cli {
    /// Base seed; overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file; the format decides the extension when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Largest state space an exact computation may enumerate.
    #[arg(long, global = true)]
    pub guard: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Log and embed (JSON only) the wall-clock time.
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rate-region corners and hulls.
    #[command(subcommand)]
    Region(RegionCommand),
    /// Exact secrecy-TV sweeps of the likelihood-encoder cascade.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Soft-covering experiments.
    #[command(subcommand)]
    Softcover(SoftcoverCommand),
    /// Stitched two-stage relay scheme.
    Relay(ConfigArg),
    /// G-test of message/sequence independence on sampled cascade runs.
    EavesdropTest(ConfigArg),
}

#[derive(Subcommand, Debug)]
pub enum RegionCommand {
    /// Task-assignment region over (R0, R1, R2).
    Task(RegionArgs),
    /// Scatter relay region over (R1, R2).
    ScatterRelay(RegionArgs),
    /// Weighted rate minimization over auxiliary couplings.
    Optimize(ConfigArg),
}

#[derive(Subcommand, Debug)]
pub enum SimulateCommand {
    /// Three-node cascade.
    Cascade(ConfigArg),
    /// Cascade with any number of links.
    LongCascade(ConfigArg),
}

#[derive(Subcommand, Debug)]
pub enum SoftcoverCommand {
    Single(ConfigArg),
    Superposition(ConfigArg),
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConfigArg {
    #[arg(long)]
    pub config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error!("{f}");
            ExitCode::from(f.code as u8)
        }
    }
}
