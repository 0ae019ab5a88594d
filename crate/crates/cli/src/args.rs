use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cascade-dim",
    version,
    about = "Dimensions of random cascade images: theory curves, simulation and verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower bound, sequence dimension and upper bound over a grid of p.
    TheoryCurves(TheoryArgs),
    /// The Legendre-type transform ψ(x) and its minimizing t over a grid of x.
    Legendre(LegendreArgs),
    /// Monte Carlo box dimension of the image of a point set.
    SimulateBoxdim(BoxdimArgs),
    /// Counts of paths whose weight product exceeds 2^-(x+δ)n.
    SimulateLdp(LdpArgs),
    /// Run the acceptance battery and write a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SigmaFlag {
    /// The log-normal number is the standard deviation σ.
    Sigma,
    /// The log-normal number is the variance σ².
    Sigma2,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// `lognormal:sigma2=<v>` or `twopoint:xi=<v>`.
    #[arg(long)]
    pub model: String,
    /// How the number in `lognormal:sigma2=<v>` is read.
    #[arg(long, value_enum, default_value = "sigma2")]
    pub sigma_convention: SigmaFlag,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.05)]
    pub p_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LegendreArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    pub x_min: f64,
    /// Defaults to γ, where ψ reaches 0.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Evaluate at a single x instead of a grid.
    #[arg(long, conflicts_with_all = ["x_min", "x_max", "steps"])]
    pub x: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    /// A single seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Seed list such as `0-7` or `1,5,9`.
    #[arg(long, default_value = "0-7")]
    pub seeds: String,
}

#[derive(Debug, Args)]
pub struct BoxdimArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `seq:p=<v>`, `thyrse:alpha=<v>`, `cantor:ratio=<v>` or `file:<path>`.
    #[arg(long)]
    pub set: String,
    /// Cascade depth K.
    #[arg(long, default_value_t = 22)]
    pub depth: u32,
    #[command(flatten)]
    pub seeds: SeedArgs,
    /// Largest value-scale exponent n, with r = 2^-n times the total mass.
    #[arg(long, default_value_t = 16)]
    pub n: u32,
    /// Regression window `lo:hi` over n; chosen from resolution warnings when omitted.
    #[arg(long)]
    pub window: Option<String>,
    /// Summary file; per-scale counts go next to it with a `.scales.csv` suffix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LdpArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub x: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Deepest path length, at most 26.
    #[arg(long, default_value_t = 22)]
    pub n: u32,
    #[command(flatten)]
    pub seeds: SeedArgs,
    /// Regression window `lo:hi` for the reported slope; defaults to the last 11 levels.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Pass/fail table; stdout report only when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Multiplies every numeric tolerance. Testing hook.
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub tolerance_scale: f64,
}
