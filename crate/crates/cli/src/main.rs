mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rabin_synth::learner::Exploration;

/// Seed used when neither `--seed` nor `RABIN_SYNTH_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_140_301;

#[derive(Debug, Parser)]
#[command(name = "rabin-synth", version, about = "Policy synthesis for labeled MDPs against LTL objectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a built-in model to a model file.
    Gen(GenArgs),
    /// Build the product and export it with its acceptance sidecar.
    Build(BuildArgs),
    /// Solve each acceptance pair by value iteration and verify the policies.
    Synth(SynthArgs),
    /// Learn a policy from simulated experience.
    Learn(LearnArgs),
    /// Check a policy for probability-one satisfaction.
    Verify(VerifyArgs),
    /// Simulate a policy and write the trace as CSV.
    Simulate(SimulateArgs),
    /// Regenerate a case study end to end into a directory.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    Grid,
    Traffic,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub case: Case,
    #[arg(long)]
    pub out: PathBuf,
    /// Traffic only: Monte-Carlo samples per state and action.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Traffic only: use the approximate nominal parameters.
    #[arg(long)]
    pub approximate: bool,
}

#[derive(Debug, Args)]
#[group(id = "objective", required = true, multiple = false)]
pub struct SpecArgs {
    /// Objective as an LTL formula in the directly translatable fragment.
    #[arg(long, group = "objective")]
    pub ltl: Option<String>,
    /// Objective as a deterministic Rabin automaton in HOA format.
    #[arg(long, group = "objective")]
    pub hoa: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProductArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub spec: SpecArgs,
}

#[derive(Debug, Args)]
pub struct RewardArgs {
    #[arg(long, default_value_t = 0.98)]
    pub gamma: f64,
    #[arg(long, default_value_t = 500.0)]
    pub wg: f64,
    #[arg(long, default_value_t = -500.0, allow_hyphen_values = true)]
    pub wb: f64,
    /// Acceptance pair to use, 1-based. Synthesis tries every pair when omitted.
    #[arg(long)]
    pub pair_index: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub product: ProductArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub sidecar: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub product: ProductArgs,
    #[command(flatten)]
    pub reward: RewardArgs,
    /// Value iteration stops once a sweep changes no utility by more than this.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub product: ProductArgs,
    #[command(flatten)]
    pub reward: RewardArgs,
    #[arg(long, default_value_t = 600)]
    pub trials: usize,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Retain factor of the utility update.
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    /// `uniform`, `eps:E[:DECAY]` or `opt:N[:VALUE]`.
    #[arg(long, default_value = "uniform")]
    pub explore: Exploration,
    #[arg(long, env = "RABIN_SYNTH_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Policy file with utilities to start from.
    #[arg(long)]
    pub warm_policy: Option<PathBuf>,
    /// Model whose probabilities seed the transition counts.
    #[arg(long, requires = "warm_policy")]
    pub prior_model: Option<PathBuf>,
    /// Pseudo-observations per state and action taken from the prior model.
    #[arg(long, default_value_t = 20)]
    pub prior_weight: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub product: ProductArgs,
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "controller", required = true, multiple = false)]
pub struct ControllerArgs {
    #[arg(long, group = "controller")]
    pub policy: Option<PathBuf>,
    /// Fixed-cycle traffic plan instead of a policy file.
    #[arg(long, group = "controller")]
    pub naive: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub product: ProductArgs,
    #[command(flatten)]
    pub controller: ControllerArgs,
    #[command(flatten)]
    pub reward: RewardArgs,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, env = "RABIN_SYNTH_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Trace CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    pub case: Case,
    #[arg(long, default_value = "demo-out")]
    pub out_dir: PathBuf,
    #[arg(long, env = "RABIN_SYNTH_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Traffic only: Monte-Carlo samples per state and action.
    #[arg(long)]
    pub samples: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Build(a) => commands::build(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Learn(a) => commands::learn(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Demo(a) => commands::demo(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
