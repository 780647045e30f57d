use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matexp::digraph::SpectralMethod;
use matexp::lab::{Density, Domain, Polynomial};

#[derive(Debug, Parser)]
#[command(name = "matexp", version, about = "Exact experiments on matrix rings over finite fields")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Root seed; every random draw is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available processors).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl Global {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RingArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q: u32,
    /// Accept characteristic 2.
    #[arg(long)]
    pub allow_even: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exact verification suites for one (n, q).
    Verify(VerifyArgs),
    /// Estimate the second singular value of the sum-product digraph.
    Spectrum(SpectrumArgs),
    /// Compute one exact image.
    Expand(ExpandArgs),
    /// Image sizes over a grid of densities and trials.
    Sweep(SweepArgs),
    /// Closed-form stratum counts, checked against enumeration.
    Count(CountArgs),
    /// Pairwise common-neighbour audits.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long, default_value = "deflated-power")]
    pub method: SpectralMethod,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long)]
    pub polynomial: Polynomial,
    /// Argument set files, one per argument (or one shared by all).
    #[arg(long = "set", conflicts_with_all = ["domain", "density"])]
    pub sets: Vec<PathBuf>,
    /// Draw the arguments from this domain instead (repeat per argument).
    #[arg(long)]
    pub domain: Vec<Domain>,
    #[arg(long, default_value = "1")]
    pub density: Density,
    /// Also write the image as a set file.
    #[arg(long)]
    pub save_image: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// JSON experiment config. Flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "config")]
    pub q: Option<u32>,
    #[arg(long, required_unless_present = "config")]
    pub polynomial: Option<Polynomial>,
    #[arg(long)]
    pub domain: Vec<Domain>,
    #[arg(long, value_delimiter = ',')]
    pub densities: Vec<Density>,
    #[arg(long, default_value_t = 50)]
    pub trials: u32,
    #[arg(long)]
    pub allow_even: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub ring: RingArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AuditKind {
    Normal,
    Decomposition,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    #[arg(long, value_enum, default_value_t = AuditKind::Both)]
    pub kind: AuditKind,
    /// Examine every ordered vertex pair.
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
}
