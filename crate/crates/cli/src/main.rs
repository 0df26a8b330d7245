mod qkd_cmd;
mod report;
mod teleport_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::Outcome;

#[derive(Parser, Debug)]
#[command(
    name = "trihyper",
    version,
    about = "Three-photon hyper-entanglement: teleportation and QKD simulator"
)]
struct Cli {
    /// Write `duration_ms: null` so reports are byte-stable.
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-qubit teleportation.
    #[command(subcommand)]
    Teleport(TeleportCmd),
    /// Entanglement-based key distribution.
    #[command(subcommand)]
    Qkd(QkdCmd),
}

#[derive(Subcommand, Debug)]
pub enum TeleportCmd {
    /// Derive the correction table, sweep all 16 outcomes and audit the published table.
    Verify(VerifyArgs),
    /// Run sampled teleportation trials.
    Run(TeleportRunArgs),
}

#[derive(Subcommand, Debug)]
pub enum QkdCmd {
    /// Monte-Carlo protocol run.
    Run(QkdRunArgs),
    /// Analytic Born-rule values.
    Exact(QkdExactArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Seed for the random inputs of the fidelity sweep.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random inputs per outcome, in addition to the four basis inputs.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub inputs: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Circuit,
    Spdc,
}

#[derive(Args, Debug, Clone)]
pub struct TeleportRunArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// a_re,a_im,b_re,b_im,alpha_re,alpha_im,beta_re,beta_im
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "random"
    )]
    pub input: Option<Vec<f64>>,
    /// Draw a fresh Haar-random input for each trial (the default).
    #[arg(long)]
    pub random: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Circuit)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct EveArgs {
    /// none | pol | oam | both
    #[arg(long, default_value = "none")]
    pub eve: String,
    /// Eve's polarization analyzer angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub eve_angle: Option<f64>,
    /// Bob OAM setting (1..3) Eve measures in.
    #[arg(long)]
    pub eve_basis: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct QkdRunArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub eve: EveArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Number of contiguous block shards; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub shards: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct QkdExactArgs {
    #[command(flatten)]
    pub eve: EveArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Teleport(TeleportCmd::Verify(a)) => teleport_cmd::verify(a, cli.no_timing),
        Command::Teleport(TeleportCmd::Run(a)) => teleport_cmd::run(a, cli.no_timing),
        Command::Qkd(QkdCmd::Run(a)) => qkd_cmd::run(a, cli.no_timing),
        Command::Qkd(QkdCmd::Exact(a)) => qkd_cmd::exact(a, cli.no_timing),
    };
    match result {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(names)) => {
            eprintln!("assertion failures: {}", names.join(", "));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
