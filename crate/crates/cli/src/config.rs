//! Command-line and file configuration. Every subcommand's arguments double
//! as its JSON config record.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "edgelab", version, about = "Edge statistics experiments for sample covariance matrices")]
pub struct Cli {
    /// Directory receiving every file the run writes.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Worker threads for replica fan-out (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Symmetrized density and Stieltjes transform of the null law.
    Law(LawArgs),
    /// Typical locations γ_k.
    Locations(LocationsArgs),
    /// Edge data of the deformed law for a diagonal population.
    Deformed(DeformedArgs),
    /// Largest eigenvalues of seeded replicas.
    SampleEdge(SampleEdgeArgs),
    /// Singular-value Dyson Brownian motion.
    Dbm(DbmArgs),
    /// Characteristic flow of the velocity field.
    Characteristics(CharacteristicsArgs),
    /// Tabulated TW₁ distribution.
    Tw(TwArgs),
    /// Kolmogorov distance to TW₁ over an N grid and its log-log fit.
    Rate(RateArgs),
    /// Rigidity pass rates.
    Rigidity(RigidityArgs),
    /// Plot-ready CSV series.
    Plotdata(PlotdataArgs),
    /// Replays the config stored in a manifest or config file.
    #[serde(skip)]
    Run(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Law(_) => "law",
            Command::Locations(_) => "locations",
            Command::Deformed(_) => "deformed",
            Command::SampleEdge(_) => "sample-edge",
            Command::Dbm(_) => "dbm",
            Command::Characteristics(_) => "characteristics",
            Command::Tw(_) => "tw",
            Command::Rate(_) => "rate",
            Command::Rigidity(_) => "rigidity",
            Command::Plotdata(_) => "plotdata",
            Command::Run(_) => "run",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::SampleEdge(a) => Some(a.seed),
            Command::Dbm(a) => Some(a.seed),
            Command::Rate(a) => Some(a.seed),
            Command::Rigidity(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LawArgs {
    #[arg(long)]
    pub xi: f64,
    /// Grid points for the density.
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Imaginary part of the Stieltjes grid.
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LocationsArgs {
    #[arg(long)]
    pub xi: f64,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DeformedArgs {
    /// One σ per line.
    #[arg(long)]
    pub population: PathBuf,
    #[arg(long)]
    pub xi: f64,
    /// Also write `e,rho_fc` on this many points.
    #[arg(long)]
    pub density_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleEdgeArgs {
    #[arg(long)]
    pub xi: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub reps: usize,
    /// gaussian, rademacher, uniform or two-point-matched.
    #[arg(long, default_value = "gaussian")]
    pub dist: String,
    /// Fourth moment for two-point-matched entries.
    #[arg(long)]
    pub mu4: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Switches to the separable model `XᵀΣX`.
    #[arg(long)]
    pub population: Option<PathBuf>,
    #[arg(long, default_value = "edge.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoupleMode {
    None,
    Wishart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordKind {
    Edge,
    Gaps,
    Observable,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DbmArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub xi: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub dt_min: f64,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = CoupleMode::None)]
    pub couple: CoupleMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = RecordKind::Edge)]
    pub record: RecordKind,
    /// Number of equally spaced record times after t = 0.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value = "dbm.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CharacteristicsArgs {
    #[arg(long)]
    pub xi: f64,
    /// Starting point as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub z0: String,
    #[arg(long)]
    pub t_end: f64,
    /// general or sc.
    #[arg(long, default_value = "general")]
    pub field: String,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Also write the increment-ratio report.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value = "characteristics.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwRoute {
    Painleve,
    Fredholm,
    Cross,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TwArgs {
    #[arg(long, value_enum, default_value_t = TwRoute::Cross)]
    pub method: TwRoute,
    #[arg(long, default_value = "tw1.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RateArgs {
    #[arg(long)]
    pub xi: f64,
    /// Comma-separated N values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    #[arg(long)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "gaussian")]
    pub dist: String,
    #[arg(long)]
    pub mu4: Option<f64>,
    /// Population atoms for the separable model, one σ per line.
    #[arg(long)]
    pub population: Option<PathBuf>,
    #[arg(long, default_value = "rate.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RigidityArgs {
    #[arg(long)]
    pub xi: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to φ(N).
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long, default_value_t = edgelab::edge_stats::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = edgelab::edge_stats::DEFAULT_OMEGA)]
    pub omega: f64,
    #[arg(long, default_value = "rigidity.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// Densities for ξ ∈ {1, 0.36, 0.09}.
    Figure1,
    /// Rescaled edge histogram from a `sample-edge` CSV against TW₁.
    Histogram,
    /// Log-log series from a `rate` JSON.
    Loglog,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PlotdataArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// ξ and N of the histogram input.
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Population of a separable histogram input.
    #[arg(long)]
    pub population: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long, default_value_t = 801)]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RunArgs {
    /// A manifest written by an earlier run, or a bare config record.
    #[arg(long)]
    pub config: PathBuf,
}
