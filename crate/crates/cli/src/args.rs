use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nejl_core::Method;
use serde::Serialize;

/// Random projection of (possibly non-Euclidean) dissimilarity matrices.
#[derive(Debug, Parser)]
#[command(name = "nejl", version, about)]
pub struct Cli {
    /// Only report errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dissimilarity matrix.
    Gen(GenArgs),
    /// Convert an edge list to a hop-count matrix.
    IngestGraph(IngestArgs),
    /// Project a matrix and report relative errors.
    Project(ProjectArgs),
    /// Check every pair against the method's error bound.
    Validate(ValidateArgs),
    /// Compare k-means on the original and projected data.
    Kmeans(KmeansArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Simplex,
    Ball,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scale of the dominant positive block (simplex).
    #[arg(long, default_value_t = nejl_core::datagen::DEFAULT_SIMPLEX_DOMINANCE)]
    pub alpha: f64,
    /// Ambient dimension of the ball centers (ball).
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    /// Smallest ball radius (ball).
    #[arg(long, default_value_t = 0.5)]
    pub rmin: f64,
    /// Largest ball radius (ball).
    #[arg(long, default_value_t = 2.0)]
    pub rmax: f64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Whitespace-separated `u v` lines; `#` starts a comment.
    pub edges: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    /// √(|e_n| / 2), the smallest exact radius.
    Minimal,
    /// √|e_n| / 2; negative directions are dropped.
    QuarterRoot,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectionArgs {
    #[arg(long, default_value = "jl-pq", value_parser = parse_method)]
    pub method: Method,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Constant in m = ceil(const · log2(n) / ε²).
    #[arg(long = "const", default_value_t = 2.0)]
    #[serde(rename = "const")]
    pub dim_constant: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Common ball radius for jl-power, replacing the computed one.
    #[arg(long)]
    pub radius_override: Option<f64>,
    #[arg(long, value_enum, default_value_t = RuleArg::Minimal)]
    pub radius_rule: RuleArg,
    /// Relative eigenvalue zero threshold.
    #[arg(long, default_value_t = nejl_core::DEFAULT_TAU_REL)]
    pub tau: f64,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: nejl_core::Error| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    /// Matrix CSV.
    pub input: PathBuf,
    #[command(flatten)]
    pub projection: ProjectionArgs,
    /// Report JSON; stdout when omitted.
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    /// Reconstructed matrix CSV.
    #[arg(long)]
    pub out_matrix: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub projection: ProjectionArgs,
    /// Keep this many randomly chosen pairs in the CSV.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Check the input against itself instead of a projection.
    #[arg(long)]
    pub identity_debug: bool,
    /// Per-pair CSV.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Summary JSON; stdout when omitted.
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct KmeansArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub projection: ProjectionArgs,
    #[arg(long, default_value_t = nejl_core::kmeans::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = nejl_core::kmeans::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Result JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
