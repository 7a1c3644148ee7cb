//! Command-line front end: discovery runs, model evaluation, line-level
//! prediction, benchmarking and curve data.

pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "corona", version, about = "Corona emission laws: discovery, evaluation and propagation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run equation discovery on a CSV dataset.
    Discover(DiscoverArgs),
    /// Evaluate a catalogued model or a fitted formula at one bundle.
    Eval(EvalArgs),
    /// Ground-level AN or RI for a line geometry.
    Predict(PredictArgs),
    /// RMSE and MRE of models against a dataset.
    Benchmark(BenchmarkArgs),
    /// Sweep one bundle variable and emit (x, y) as CSV.
    Curves(CurvesArgs),
    /// List the model catalog.
    Models,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Score candidates on one thread. Output is identical either way.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    An,
    Ri,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
    pub model: Option<String>,
    /// Graph JSON, or a report.json from `discover`.
    #[arg(long)]
    pub formula: Option<PathBuf>,
    /// Equation rank to take from a report.
    #[arg(long, default_value_t = 1, requires = "formula")]
    pub rank: usize,
    /// Unit family of a formula.
    #[arg(long, value_enum, default_value_t = Kind::An, requires = "formula")]
    pub kind: Kind,
    #[arg(long = "E", allow_negative_numbers = true)]
    pub e: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub n: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub d: f64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub geometry: PathBuf,
    #[arg(long)]
    pub model: String,
    /// AN distance coefficient; defaults by model family.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "f-ri")]
    pub f_ri: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value = "dominant-phase")]
    pub combination: String,
    /// Print the full prediction as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub models: Vec<String>,
    /// Target column; defaults to the last column.
    #[arg(long)]
    pub target: Option<String>,
    /// Summary CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Per-row residual CSV output.
    #[arg(long)]
    pub residuals: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long)]
    pub model: String,
    /// `var=lo:hi:steps`
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: String,
    /// `var=value`, once per held variable.
    #[arg(long, allow_hyphen_values = true)]
    pub fixed: Vec<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Discover(a) => commands::discover(&a, out),
        Command::Eval(a) => commands::eval(&a, out),
        Command::Predict(a) => commands::predict(&a, out),
        Command::Benchmark(a) => commands::benchmark(&a, out),
        Command::Curves(a) => commands::curves(&a, out),
        Command::Models => commands::list_models(out),
    }
}
