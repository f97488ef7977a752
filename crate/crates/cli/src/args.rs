use std::path::PathBuf;

use betagos::BetaSchedule;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

fn parse_schedule(s: &str) -> Result<BetaSchedule, String> {
    s.parse().map_err(|e: betagos::Error| e.to_string())
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "betagos", version, about = "Beta-GOS simulation, moments, Gibbs fitting and CGH calling")]
pub struct Cli {
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "BETAGOS_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Generate synthetic labelled series.
    Simulate(SimulateArgs),
    /// Fit the hierarchical model to a series of observations.
    Fit(FitArgs),
    /// Tabulate exact block-count moments.
    Moments(MomentsArgs),
    /// Call copy-number aberrations on array-CGH samples.
    Call(CallArgs),
    /// Compare fitters across synthetic designs.
    Benchmark(BenchmarkArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Moments(_) => "moments",
            Command::Call(_) => "call",
            Command::Benchmark(_) => "benchmark",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Mixture,
    TruncatedUrn,
    HmmTwoRegime,
    Betagos,
    Dp,
    /// Noise-free Beta-GOS sequence with pairing labels and weights.
    Sequence,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu0: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sigma0: f64,
    /// Observation noise sd.
    #[arg(long, default_value_t = 0.25)]
    pub tau: f64,
    /// Mixture weights.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.35,0.15,0.1,0.2")]
    pub weights: Vec<f64>,
    /// New-block probability of the truncated urn.
    #[arg(long, default_value_t = 0.2)]
    pub p_new: f64,
    /// Copy probabilities for lags 1, 2, ... of the truncated urn.
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.2")]
    pub lag_probs: Vec<f64>,
    /// First position generated by the switching regime.
    #[arg(long, default_value_t = 50)]
    pub switch_at: usize,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "-6,-2,2,6")]
    pub state_means: Vec<f64>,
    /// Schedule for `betagos` and `sequence`: theta:T[,B] | const:A,B | dp:T.
    #[arg(long, value_parser = parse_schedule, default_value = "theta:1")]
    pub schedule: BetaSchedule,
    /// Concentration for `dp`.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tau2ModeArg {
    PooledEm,
    GlobalConjugate,
}

impl From<Tau2ModeArg> for betagos::inference::Tau2Mode {
    fn from(m: Tau2ModeArg) -> Self {
        match m {
            Tau2ModeArg::PooledEm => Self::PooledEm,
            Tau2ModeArg::GlobalConjugate => Self::GlobalConjugate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanArg {
    Systematic,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    Prior,
    Singletons,
}

/// Model and chain settings shared by `fit`, `call` and `benchmark`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu0: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sigma0: f64,
    /// Inverse-gamma shape for tau^2.
    #[arg(long, default_value_t = 2.004)]
    pub a0: f64,
    /// Inverse-gamma scale for tau^2.
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 4)]
    pub thin: usize,
    #[arg(long, value_enum, default_value_t = Tau2ModeArg::PooledEm)]
    pub tau2_mode: Tau2ModeArg,
    #[arg(long, value_enum, default_value_t = ScanArg::Systematic)]
    pub scan: ScanArg,
    #[arg(long, value_enum, default_value_t = InitArg::Prior)]
    pub init: InitArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// CSV with one observation per row (the `y` column if there is a header).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_schedule, default_value = "theta:1")]
    pub schedule: BetaSchedule,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// CSV of true block labels, one per row (the `truth` column if there is a header).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Held-out next observation for predictive error.
    #[arg(long, allow_negative_numbers = true)]
    pub holdout: Option<f64>,
    #[command(flatten)]
    pub chain: ChainArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentsArgs {
    /// Schedule to tabulate; repeat for several.
    #[arg(long = "schedule", value_parser = parse_schedule, required = true)]
    pub schedules: Vec<BetaSchedule>,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub max_m: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1")]
    pub t: Vec<f64>,
    /// Also write limiting moments where a limit law is known.
    #[arg(long)]
    pub limits: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionNullArg {
    AllNeutral,
    CloneAverage,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CallArgs {
    /// Clone tables: clone_id,chromosome,kb_start,kb_end,log2_ratio[,sample_id].
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_parser = parse_schedule, default_value = "theta:1")]
    pub schedule: BetaSchedule,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.7)]
    pub call_freq: f64,
    #[arg(long, default_value_t = 2.0)]
    pub amp_sd_mult: f64,
    #[arg(long, default_value_t = 0.05)]
    pub fdr: f64,
    #[arg(long, value_enum, default_value_t = RegionNullArg::AllNeutral)]
    pub region_null: RegionNullArg,
    #[command(flatten)]
    pub chain: ChainArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchmarkArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "betagos,mixture,truncated-urn")]
    pub generators: Vec<Kind>,
    /// Fitter schedules, separated by `;`.
    #[arg(long, value_parser = parse_schedule, value_delimiter = ';', default_value = "theta:1;dp:1")]
    pub fitters: Vec<BetaSchedule>,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    /// Observations used for fitting; one more is generated and held out.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.25)]
    pub tau: f64,
    #[command(flatten)]
    pub chain: ChainArgs,
}
