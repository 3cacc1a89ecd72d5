mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stable_ecf::{Method, ResponseKind, Target};

/// Estimate the index and scale of symmetric stable laws by regression on
/// the empirical characteristic function.
#[derive(Debug, Parser)]
#[command(name = "stable-ecf", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit alpha and sigma to a file of observations, one per line.
    Estimate(EstimateArgs),
    /// Draw a symmetric stable sample, one value per line.
    Sample(SampleArgs),
    /// Print the design moment matrix for an interval.
    Design(DesignArgs),
    /// Run a Monte Carlo comparison from a config file.
    Simulate(SimulateArgs),
    /// Run an infinite-ls K sweep.
    Ksweep(KsweepArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Start of the t interval.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub x0: f64,
    /// Length of the t interval.
    #[arg(long, default_value_t = 1.9)]
    pub d: f64,
    /// Number of grid steps for the infinite-ls response moments.
    #[arg(long = "K", default_value_t = 500)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Input file; blank lines and `#` comments are skipped.
    pub input: PathBuf,
    #[arg(long, default_value = "infinite-ls")]
    pub method: Method,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of Koutrouvelis points t_k = pi k / 25.
    #[arg(long, default_value_t = stable_ecf::estimators::DEFAULT_KOUTROUVELIS_POINTS)]
    pub points: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 20_250_101)]
    pub seed: u64,
    /// Independent stream index under the same seed.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Write draws here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignModel {
    /// Regressors 1 and log t.
    Log,
    /// Regressors 1 and t.
    Linear,
    /// Regressors 1, t, ..., t^degree.
    Poly,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.9)]
    pub d: f64,
    #[arg(long, value_enum, default_value_t = DesignModel::Log)]
    pub model: DesignModel,
    /// Polynomial degree, used with `--model poly`.
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
}

/// Flags that override values read from a config file.
#[derive(Debug, Default, Args)]
pub struct SimOverrides {
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long = "method", visible_alias = "methods", value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub target: Option<Target>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// `empirical` or `exact-cf`.
    #[arg(long)]
    pub response: Option<ResponseKind>,
    /// Csv report path; the markdown report goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a markdown report.
    #[arg(long)]
    pub markdown: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Any config key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: PathBuf,
    /// Grid sizes; turns the run into a K sweep.
    #[arg(long = "k-values", value_delimiter = ',')]
    pub k_values: Option<Vec<usize>>,
    #[command(flatten)]
    pub overrides: SimOverrides,
}

#[derive(Debug, Args)]
pub struct KsweepArgs {
    /// Optional config file; defaults give alpha 1.5, n 100, 2000 replications.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "k-values", value_delimiter = ',')]
    pub k_values: Option<Vec<usize>>,
    #[command(flatten)]
    pub overrides: SimOverrides,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
