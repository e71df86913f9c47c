//! `qpolar`: Clifford-coset tools, lemma verification, polarization reports,
//! code construction and block-error simulation.
//!
//! Exit status: 0 success, 1 verification failure, 2 usage or input error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qpolar", version, about = "Clifford-based polarization of Pauli channels")]
pub struct Cli {
    /// Seed for every random choice (gate trees, trials, trajectories).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 picks one per core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// File for machine-readable output. Without it, machine output goes to
    /// stdout and the summary to stderr.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Two-qubit Clifford group tools.
    Cliffords {
        #[command(subcommand)]
        action: CliffordsAction,
    },
    /// Numerical checks of the combining identities on random channels.
    Verify(VerifyArgs),
    /// Synthesized-channel statistics for a channel and gate tree.
    Polarize(PolarizeArgs),
    /// Build a code specification from a channel and target rate.
    Construct(ConstructArgs),
    /// Monte Carlo block-error rate of a code.
    Simulate(SimulateArgs),
    /// Chained blocks and their rates.
    Chain(ChainArgs),
    /// Empirical fast-polarization rate estimates over several depths.
    ProbeFast(ProbeArgs),
}

#[derive(Subcommand, Debug)]
pub enum CliffordsAction {
    /// Group orders, optionally with the full element table.
    Enumerate {
        #[arg(long)]
        table: bool,
    },
    /// The 20 local cosets and their representatives.
    Classify,
    /// The 16-row symbol permutation of one gate.
    Gamma {
        /// Gate set the gate belongs to (L, R, S3, all20).
        set: String,
        /// Gate name, e.g. L13.
        name: String,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// One of 2, 3, 4, 5, 6, 7, swap, duality, all.
    #[arg(long, default_value = "all")]
    pub lemma: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// No approximation; fails when the component cap is exceeded.
    Exact,
    /// Degrading merges down to the cap (Z upper bounds, I lower bounds).
    Merged,
    /// Drop light components and truncate to the heaviest.
    Pruned,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Component cap per synthesized channel.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Weight threshold for pruned mode.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
}

#[derive(Args, Debug)]
pub struct PolarizeArgs {
    /// Preset like depolarizing(0.05), a JSON literal, or a JSON file.
    #[arg(long)]
    pub channel: String,
    #[arg(long)]
    pub n: usize,
    /// L, R, S3, all20, fixed:<gate> or levels:<g1>,<g2>,...
    #[arg(long, default_value = "S3")]
    pub gates: String,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Sample this many random trajectories instead of every index.
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[command(flatten)]
    pub synth: SynthArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Rank indices by synthesized Z.
    Report,
    /// Rank indices by genie-aided decoding error estimates.
    Genie,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(long)]
    pub channel: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "S3")]
    pub gates: String,
    /// Information indices are floor(N * rate).
    #[arg(long)]
    pub rate: f64,
    #[arg(long, value_enum, default_value_t = Method::Report)]
    pub method: Method,
    /// Trials for the genie method.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Also choose a chaining subset (the |frozen| most reliable info indices).
    #[arg(long)]
    pub chain: bool,
    #[command(flatten)]
    pub synth: SynthArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundMode {
    None,
    Exact,
    Merged,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Code specification JSON file.
    #[arg(long)]
    pub code: PathBuf,
    /// Pauli channel preset or JSON literal.
    #[arg(long)]
    pub channel: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// How to compute the 3·ΣZ bound checked against the measured rate.
    #[arg(long, value_enum, default_value_t = BoundMode::None)]
    pub bound: BoundMode,
    /// Component cap for merged bounds.
    #[arg(long, default_value_t = 64)]
    pub bound_cap: usize,
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Emit exact rates for every chain length 1..=k instead of simulating.
    #[arg(long)]
    pub sweep: bool,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub channel: String,
    /// Comma-separated depths.
    #[arg(long, value_delimiter = ',', default_value = "8,10,12")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Gate set sampled per step.
    #[arg(long, default_value = "S3")]
    pub gates: String,
    #[command(flatten)]
    pub synth: SynthArgs,
}

/// Result of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
