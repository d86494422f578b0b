//! `homnet` — prepare datasets, train and evaluate Hong-Ou-Mandel shallow
//! networks, emulate photon counting, and export history plots.
//!
//! Exit codes: 0 success, 2 usage, 3 data/file error, 4 numeric or
//! constraint error. Failures print one machine-parseable line to stderr:
//! `error[usage|data|numeric]: <message>`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

mod commands;
mod errors;

#[derive(Parser)]
#[command(name = "homnet", version, about = "Hong-Ou-Mandel shallow network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetArg {
    Mnist,
    Fashion,
    Cifar10,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Mixture,
    Superposition,
    Classical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Projection,
    WeightNormalized,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    PerEpoch,
    PerStep,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PositivityArg {
    Abs,
    Sigmoid,
    Relu,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Agnostic,
    Tracked,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubsetArg {
    Test,
    Train,
}

#[derive(Args)]
pub struct PrepareArgs {
    /// Raw dataset to read
    #[arg(long)]
    dataset: DatasetArg,
    /// Class pair `a,b`; `a` becomes label 0, `b` label 1
    #[arg(long)]
    classes: String,
    /// Directory holding the raw files (default: $HOMNET_DATA_DIR or ./data)
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Shuffle seed for the 85:15 split
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output split container path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Prepared split container
    #[arg(long)]
    split: PathBuf,
    #[arg(long)]
    model: ModelArg,
    /// Hidden neurons M
    #[arg(long)]
    neurons: usize,
    #[arg(long, default_value_t = 150)]
    epochs: usize,
    #[arg(long, default_value_t = 1000)]
    batch: usize,
    #[arg(long, default_value_t = 0.03)]
    lr: f64,
    /// Constraint handling (default: weight-normalized for the quantum
    /// models, projection for the classical baseline)
    #[arg(long)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for checkpoint, history and manifest
    #[arg(long)]
    out: PathBuf,
    /// Carry K = Σw as a forward factor instead of renormalizing
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    track_k: bool,
    #[arg(long, default_value = "abs")]
    positivity: PositivityArg,
    /// Default: adam for the quantum models, sgd for the classical baseline
    #[arg(long)]
    optimizer: Option<OptimizerArg>,
    /// When projection-mode constraints are re-applied
    #[arg(long)]
    projection: Option<ScheduleArg>,
    /// Train the classical baseline with the mixture constraint set
    #[arg(long, default_value_t = false)]
    constrained: bool,
    #[arg(long, default_value_t = 0.9)]
    beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Print one line of metrics per epoch
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    verbose: bool,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long, default_value = "test")]
    subset: SubsetArg,
}

#[derive(Args)]
pub struct ShotsArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    split: PathBuf,
    /// Example index within the chosen subset
    #[arg(long)]
    image: usize,
    #[arg(long, default_value = "test")]
    subset: SubsetArg,
    /// Number of shots
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
pub struct BudgetArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
}

#[derive(Args)]
pub struct MstudyArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 200)]
    repeats: usize,
    /// Comma-separated list of hidden-layer sizes
    #[arg(long, default_value = "2,16,64,256")]
    m_list: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "agnostic")]
    mode: SamplingArg,
    /// CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GradcheckArgs {
    /// Model kind to check, or everything
    #[arg(long, default_value = "all")]
    model: String,
    #[arg(long)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    track_k: bool,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
pub struct PlotArgs {
    /// History CSV files (repeatable)
    #[arg(long, required = true)]
    history: Vec<PathBuf>,
    /// Comma-separated legend labels; defaults to file stems
    #[arg(long)]
    labels: Option<String>,
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw dataset files into a prepared binary-task split
    Prepare(PrepareArgs),
    /// Train a model on a prepared split
    Train(TrainArgs),
    /// Evaluate a checkpoint on a split
    Eval(EvalArgs),
    /// Emulate photon counting for one example
    Shots(ShotsArgs),
    /// Photon budget from Hoeffding's inequality
    Budget(BudgetArgs),
    /// Bootstrap the estimator spread across hidden-layer sizes
    Mstudy(MstudyArgs),
    /// Compare analytic gradients against finite differences
    Gradcheck(GradcheckArgs),
    /// Check model responses against the density-matrix coincidence formula
    Oracle(OracleArgs),
    /// Render history CSVs as a two-panel SVG
    Plot(PlotArgs),
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prepare(args) => commands::prepare(args),
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Shots(args) => commands::shots(args),
        Command::Budget(args) => commands::budget(args),
        Command::Mstudy(args) => commands::mstudy(args),
        Command::Gradcheck(args) => commands::gradcheck(args),
        Command::Oracle(args) => commands::oracle(args),
        Command::Plot(args) => commands::plot(args),
    };
    if let Err(err) = result {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
