use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use lre_core::Kernel;

#[derive(Debug, Parser)]
#[command(
    name = "pauli-lre",
    version,
    about = "Linear regression estimation tomography from Pauli measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a measurement record from a known state.
    Simulate(SimulateArgs),
    /// Reconstruct a density matrix from a record file.
    Reconstruct(ReconstructArgs),
    /// Compare an estimate with the true state, or run an error curve with --grid.
    Eval(EvalArgs),
    /// Print the predicted estimation error of a state.
    Predict(PredictArgs),
    /// Per-step reconstruction time against the number of qubits.
    BenchTime(BenchTimeArgs),
    /// Step (1) speed against the number of worker threads.
    BenchThreads(BenchThreadsArgs),
    /// Estimation error against copies per projector.
    BenchError(BenchErrorArgs),
}

/// Worker count, a positive integer or `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threads(pub usize);

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads(
                std::thread::available_parallelism().map_or(1, |n| n.get()),
            ));
        }
        match s.parse::<usize>() {
            Ok(0) => Err("threads must be >= 1".into()),
            Ok(k) => Ok(Threads(k)),
            Err(_) => Err(format!("expected a positive integer or `auto`, got `{s}`")),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExecArgs {
    /// Worker threads, a number or `auto`.
    #[arg(long, default_value = "auto")]
    pub threads: Threads,
    /// Step (1) kernel.
    #[arg(long, default_value_t = Kernel::Fast)]
    pub kernel: Kernel,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: u32,
    /// Shots per measurement setting.
    #[arg(long)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// maxmixed, ghz, productz:<bits> or random:<seed>.
    #[arg(long)]
    pub state: String,
    /// Write counts equal to shots times the exact probabilities instead of sampling.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value = "auto")]
    pub threads: Threads,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Record file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Binary state file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// State file or record file (a record is reconstructed first).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// True state.
    #[arg(long)]
    pub state: String,
    /// Qubit count; checked against the input when both are given.
    #[arg(long)]
    pub n: Option<u32>,
    /// Shots per setting behind a state file input.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Comma-separated copies-per-projector values for an error curve.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<u64>>,
    #[arg(long, default_value_t = 50)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output for --grid; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub n: u32,
    /// Shots per measurement setting.
    #[arg(long)]
    pub shots: u64,
    #[arg(long, default_value = "maxmixed")]
    pub state: String,
}

#[derive(Debug, Args)]
pub struct BenchTimeArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: u32,
    #[arg(long, default_value_t = 8)]
    pub n_max: u32,
    /// maxmixed, ghz or random:<seed>.
    #[arg(long, default_value = "maxmixed")]
    pub state: String,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Args)]
pub struct BenchThreadsArgs {
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    /// Comma-separated worker counts; defaults to 1, 2, 4, ... up to the core count.
    #[arg(long, value_delimiter = ',')]
    pub thread_list: Option<Vec<usize>>,
    #[arg(long, default_value = "maxmixed")]
    pub state: String,
    #[arg(long, default_value_t = Kernel::Fast)]
    pub kernel: Kernel,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchErrorArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value = "maxmixed")]
    pub state: String,
    /// Comma-separated copies-per-projector values.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "16,32,64,128,256,512,1024,2048,4096"
    )]
    pub grid: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub exec: ExecArgs,
}
