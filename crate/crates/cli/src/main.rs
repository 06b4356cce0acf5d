mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use overrule_core::ErrorKind;

#[derive(Parser)]
#[command(name = "overrule", version, about = "Boolean-rule descriptions of support and overlap regions")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn support and overlap rules from a CSV file.
    Fit(FitArgs),
    /// Classify rows as in overlap / in support only / out of support.
    Predict(PredictArgs),
    /// Score overlap membership against a 0/1 truth column.
    Evaluate(EvaluateArgs),
    /// Run the synthetic exclusion-recovery benchmark.
    SynthBench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Estimator {
    Logistic,
    Knn,
    Cbb,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Form {
    Dnf,
    Cnf,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// TOML file with `[support]`, `[overlap]` and `delta`; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON decision table giving the allowed treatments per row.
    #[arg(long, conflicts_with = "no_policy")]
    pub policy_rules: Option<PathBuf>,
    /// Ignore the schema's policy column.
    #[arg(long)]
    pub no_policy: bool,
    /// Output directory (model.json, rules.txt, metrics.csv, theory.json).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub support_lambda0: Option<f64>,
    #[arg(long)]
    pub support_lambda1: Option<f64>,
    #[arg(long)]
    pub overlap_lambda0: Option<f64>,
    #[arg(long)]
    pub overlap_lambda1: Option<f64>,
    #[arg(long, value_enum)]
    pub support_form: Option<Form>,
    #[arg(long, value_enum)]
    pub overlap_form: Option<Form>,
    #[arg(long, value_enum)]
    pub estimator: Option<Estimator>,
    /// Neighbours for the knn estimator.
    #[arg(long)]
    pub k: Option<usize>,
    /// Use the configured epsilon with knn instead of 1/k.
    #[arg(long)]
    pub fixed_epsilon: bool,
    /// Ridge strength of the logistic estimator (1/C).
    #[arg(long)]
    pub l2: Option<f64>,
    /// Central quantile mass of the box estimator.
    #[arg(long)]
    pub box_alpha: Option<f64>,
    #[arg(long)]
    pub beam_width: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Column holding the reference 0/1 overlap labels.
    #[arg(long)]
    pub truth: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// TOML benchmark grid; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub lambda0s: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub lambda1s: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub beam_widths: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Worker threads (cells run in parallel).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Solver => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let res = match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::SynthBench(a) => commands::synth_bench(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            let tag = match kind {
                ErrorKind::Config => "config",
                ErrorKind::Data => "data",
                ErrorKind::Solver => "solver",
            };
            eprintln!("error[{tag}]: {e}");
            ExitCode::from(exit_code(kind))
        }
    }
}
