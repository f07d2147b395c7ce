mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use ftcluster::analytic::ComputationSize;
use ftcluster::gadgets::{Gadget, Mode};
use ftcluster::report::Format;

#[derive(Debug, Parser)]
#[command(
    name = "ftcluster",
    version,
    about = "Simulate and size verified concatenated cluster-state gadgets"
)]
#[command(
    after_help = "Any subcommand also takes --config <file> with flat key=value lines; flags override it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one gadget many times and report acceptance and logical error.
    Simulate(SimulateArgs),
    /// Print the analytic threshold, optionally with a Monte Carlo crossing.
    Threshold(ThresholdArgs),
    /// Evaluate the resource recurrence over a range of computation sizes.
    Resources(ResourcesArgs),
    /// Run one gadget over a grid of physical error rates.
    Sweep(SweepArgs),
    /// Cross-check the simulators against the independent oracles.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Physical two-qubit gate error rate p_e.
    #[arg(long = "pe", default_value_t = 1e-3)]
    pub p_e: f64,
    /// Measurement/preparation flip probability (default 4 p_e / 15).
    #[arg(long = "pm")]
    pub p_m: Option<f64>,
    /// Full two-qubit table as comma-separated `AB=p` pairs, e.g. `XI=1e-4,ZZ=2e-4`.
    #[arg(long)]
    pub table: Option<String>,
    /// Memory error per waiting step, relative to p_e.
    #[arg(long = "tau-m", default_value_t = 0.0)]
    pub tau_m: f64,
    /// Waiting steps per level.
    #[arg(long = "n-steps", default_value_t = 12)]
    pub n_steps: u32,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, env = "FTCLUSTER_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Reject the whole run on a failed check instead of retrying the segment.
    #[arg(long)]
    pub abort: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct GadgetArgs {
    /// hexa, cz_single, cz_double, encode_zero, encode_plus or readout.
    #[arg(long)]
    pub gadget: Gadget,
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// faithful simulates every lower level; fast injects homogeneous
    /// errors on fresh lower-level blocks.
    #[arg(long, default_value = "faithful")]
    pub mode: Mode,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub gadget: GadgetArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub gadget: GadgetArgs,
    /// Explicit comma-separated p_e grid.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    /// Geometric grid from --pe-lo to --pe-hi when --grid is absent.
    #[arg(long = "pe-lo", default_value_t = 3e-4)]
    pub pe_lo: f64,
    #[arg(long = "pe-hi", default_value_t = 3e-3)]
    pub pe_hi: f64,
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Override D (e.g. `1`, `17/15`, `1.2`).
    #[arg(long = "D")]
    pub d: Option<String>,
    /// Computation size for the memory-limited threshold, e.g. `1e20`.
    #[arg(long = "N")]
    pub n: Option<ComputationSize>,
    /// Also bisect for the level-1/level-2 Monte Carlo crossing.
    #[arg(long)]
    pub empirical: bool,
    #[arg(long, default_value = "readout")]
    pub gadget: Gadget,
    #[arg(long, default_value = "fast")]
    pub mode: Mode,
    #[arg(long = "p-lo", default_value_t = 0.01)]
    pub p_lo: f64,
    #[arg(long = "p-hi", default_value_t = 0.15)]
    pub p_hi: f64,
    #[arg(long, default_value_t = 6)]
    pub steps: u32,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ResourcesArgs {
    /// One computation size; otherwise the --n-lo..--n-hi decade grid.
    #[arg(long = "N")]
    pub n: Option<ComputationSize>,
    #[arg(long = "n-lo", default_value_t = 1)]
    pub n_lo: i64,
    #[arg(long = "n-hi", default_value_t = 50)]
    pub n_hi: i64,
    #[arg(long = "per-decade", default_value_t = 1)]
    pub per_decade: u32,
    /// Comma-separated physical error rates.
    #[arg(long = "pe", value_delimiter = ',', default_value = "0.001")]
    pub p_e: Vec<f64>,
    /// CSV with columns alpha,level,p[,source], or `unit`.
    #[arg(long = "success-table")]
    pub success_table: Option<String>,
    /// CSV with columns N,R merged as an extra column.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// A smaller suite that finishes in seconds.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, env = "FTCLUSTER_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Runs the dense simulator with S replaced by S† (negative control).
    #[arg(long = "corrupt-phase", hide = true)]
    pub corrupt_phase: bool,
}

fn parse_args() -> Result<Cli, ExitCode> {
    let mut args: Vec<OsString> = std::env::args_os().collect();
    let path = match config::take_config_path(&mut args) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Err(ExitCode::from(2));
        }
    };
    if let Some(path) = path {
        let merged = std::fs::read_to_string(&path)
            .map_err(anyhow::Error::from)
            .and_then(|text| config::merge(args, &Cli::command(), &text));
        match merged {
            Ok(m) => args = m,
            Err(e) => {
                eprintln!("error: config {path}: {e:#}");
                return Err(ExitCode::from(2));
            }
        }
    }
    let cmd = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let matches = cmd.try_get_matches_from(args).map_err(|e| {
        let _ = e.print();
        ExitCode::from(e.exit_code() as u8)
    })?;
    <Cli as clap::FromArgMatches>::from_arg_matches(&matches).map_err(|e| {
        let _ = e.print();
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(c) => c,
        Err(code) => return code,
    };
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
