//! veingrow command-line interface.
//!
//! Subcommands: `cover-ratio` (mask cover-ratio upper bounds across design
//! complexities), `encode` (vein-tree JSON lines), `targets` (per-instance
//! weight maps), and `loss-check` (gradient and invariance verification).
//!
//! Exit codes are stable: 0 success, 1 check failure, 2 empty or invalid
//! corpus, 3 I/O error. Log verbosity comes from `VEINGROW_LOG`
//! (error|warn|info|debug).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "veingrow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure mask cover-ratio upper bounds over a corpus.
    CoverRatio(CorpusArgs),
    /// Encode instances into vein-tree JSON lines, one file per complexity.
    Encode(EncodeArgs),
    /// Write per-instance weight maps (centroidness plus the two
    /// centerness baselines) as PGM and CSV.
    Targets(CorpusArgs),
    /// Verify analytic loss gradients against finite differences and run
    /// the loss invariance suite.
    LossCheck(LossCheckArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// COCO-style annotation JSON.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Design complexities (polar direction counts) to sweep.
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,20,24")]
    complexities: Vec<usize>,
    /// Node search depth.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Rasterization supersampling factor (1, 2, 4, or 8).
    #[arg(long, default_value_t = 4)]
    supersample: u32,
    /// Drop instances below this area (px^2).
    #[arg(long, default_value_t = 0.0)]
    min_area: f64,
    /// Keep at most this many instances (in file order, after filters).
    #[arg(long)]
    max_instances: Option<usize>,
    /// Seed recorded in metadata; corpus commands are deterministic anyway.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Encode major veins only (no twisty-part refinement).
    #[arg(long)]
    no_minor: bool,
}

#[derive(Args)]
struct LossCheckArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random trials per loss.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Weights for the composed total loss summary line.
    #[arg(long, default_value_t = 1.0)]
    weight_riou: f64,
    #[arg(long, default_value_t = 1.0)]
    weight_fl: f64,
    #[arg(long, default_value_t = 1.0)]
    weight_ce: f64,
    /// Self-test hook: bias the analytic gradients so the run must fail.
    #[arg(long, hide = true)]
    corrupt_gradients: bool,
}

/// Failures mapped onto the exit-code contract.
#[derive(Debug)]
enum CliError {
    /// Empty or invalid corpus (exit 2).
    Corpus(String),
    /// A verification check failed (exit 1).
    Check(String),
    /// Filesystem trouble (exit 3).
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Corpus(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Corpus(m) => write!(f, "corpus error: {m}"),
            CliError::Check(m) => write!(f, "check failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("VEINGROW_LOG", "warn"),
    )
    .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::CoverRatio(args) => commands::cover_ratio::run(args),
        Command::Encode(args) => commands::encode::run(args),
        Command::Targets(args) => commands::targets::run(args),
        Command::LossCheck(args) => commands::loss_check::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("veingrow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
