use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use slsm_core::experiment::{Abscissas, ReferenceConfig};
use slsm_core::{ModelSpec, TransitionEval};

use crate::manifest::CommandName;

pub const DEFAULT_SEED: u64 = 42;

/// Stretched least squares: sampling, fitting and Monte-Carlo comparison runs.
///
/// Without a subcommand, `--config` replays the command recorded in a manifest.
#[derive(Debug, Parser)]
#[command(name = "slsm", version)]
pub struct Cli {
    /// Base seed for every random stream [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file (output directory for `tables`); stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads. Results do not depend on this
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON config or run manifest; explicit flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples from a stretched Gaussian law
    Sample(SampleArgs),
    /// Fit one x,y CSV with plain or stretched least squares
    Fit(FitArgs),
    /// Monte-Carlo comparison for one configuration
    Experiment(ExperimentArgs),
    /// Table, summary and figure CSVs for the reference grid
    Tables(TablesArgs),
}

impl Command {
    pub fn name(&self) -> CommandName {
        match self {
            Command::Sample(_) => CommandName::Sample,
            Command::Fit(_) => CommandName::Fit,
            Command::Experiment(_) => CommandName::Experiment,
            Command::Tables(_) => CommandName::Tables,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMethod {
    Exact,
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Lsm,
    Stretched,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvalArg {
    Transformed,
    Original,
}

impl From<EvalArg> for TransitionEval {
    fn from(e: EvalArg) -> Self {
        match e {
            EvalArg::Transformed => TransitionEval::Transformed,
            EvalArg::Original => TransitionEval::Original,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AbscissaArg {
    Grid,
    Uniform,
}

impl From<AbscissaArg> for Abscissas {
    fn from(a: AbscissaArg) -> Self {
        match a {
            AbscissaArg::Grid => Abscissas::Grid,
            AbscissaArg::Uniform => Abscissas::Uniform,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct SampleArgs {
    /// Time exponent α [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Stretch exponent β in (0, 1] [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Diffusion coefficient D [default: 0.25]
    #[arg(short = 'D', long = "diffusivity")]
    pub diffusivity: Option<f64>,
    /// Time t [default: 1]
    #[arg(short = 't', long = "time")]
    pub time: Option<f64>,
    /// Number of samples [default: 1000]
    #[arg(short = 'n', long = "count")]
    pub n: Option<usize>,
    /// [default: exact]
    #[arg(long, value_enum)]
    pub method: Option<SampleMethod>,
}

#[derive(Debug, Default, Args)]
pub struct FitArgs {
    /// CSV with columns x,y (an optional header row is skipped)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `polyN` or `sin` [default: poly2]
    #[arg(long)]
    pub model: Option<ModelSpec>,
    /// [default: lsm]
    #[arg(long, value_enum)]
    pub method: Option<FitMethod>,
    /// Horizontal reset exponent, required with `--method stretched`
    #[arg(long)]
    pub beta: Option<f64>,
    /// Where the transition curve is evaluated [default: transformed]
    #[arg(long, value_enum)]
    pub transition_eval: Option<EvalArg>,
    /// Multi-start count for sinusoid fits, 1 to 15 [default: 15]
    #[arg(long)]
    pub starts: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    /// Reference configuration such as `poly:b0.4:e30`
    pub case: Option<ReferenceConfig>,
    /// [default: 100]
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Observations per trial [default: 200]
    #[arg(long)]
    pub observations: Option<usize>,
    /// Lower end of the x domain [default: 0]
    #[arg(long)]
    pub x_min: Option<f64>,
    /// Upper end of the x domain [default: 1]
    #[arg(long)]
    pub x_max: Option<f64>,
    /// [default: grid]
    #[arg(long, value_enum)]
    pub abscissas: Option<AbscissaArg>,
    #[arg(long, value_enum)]
    pub transition_eval: Option<EvalArg>,
    #[arg(long)]
    pub starts: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct TablesArgs {
    /// [default: 100]
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Subset of the grid, comma separated, e.g. `poly:b0.4:e30,sin:b0.8:e50`
    #[arg(long, value_delimiter = ',')]
    pub configs: Option<Vec<ReferenceConfig>>,
    #[arg(long, value_enum)]
    pub transition_eval: Option<EvalArg>,
    #[arg(long)]
    pub starts: Option<usize>,
}
