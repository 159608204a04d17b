//! Command-line front end for Grassmann subspace clustering.
//!
//! Subcommands: `synth` generates labeled synthetic datasets, `cluster` runs
//! the full pipeline (represent → trace kernel → ADMM solve → affinity →
//! normalized cuts), `sweep` runs a parameter grid, `eval` scores label
//! files against each other. Exit codes: 0 success (including flagged
//! non-convergence), 2 usage error, 3 data error, 4 numerical error.

mod manifest;
mod ops;
mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "gclust", version, about = "Subspace clustering on the Grassmann manifold")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset of Grassmann points.
    Synth(SynthArgs),
    /// Cluster a dataset and write labels plus solver diagnostics.
    Cluster(ClusterArgs),
    /// Run a cartesian parameter grid and tabulate accuracy per cell.
    Sweep(SweepArgs),
    /// Score a predicted label file against ground truth.
    Eval(EvalArgs),
}

#[derive(clap::Args)]
pub struct SynthArgs {
    /// Number of clusters.
    #[arg(long)]
    pub clusters: usize,
    /// Samples per cluster.
    #[arg(long)]
    pub per_cluster: usize,
    /// Ambient dimension d.
    #[arg(long = "d")]
    pub ambient_dim: usize,
    /// Subspace dimension p.
    #[arg(long = "p")]
    pub subspace_dim: usize,
    /// Ambient Gaussian noise scale.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw prototypes as disjoint blocks of one orthonormal frame.
    #[arg(long)]
    pub orthogonal_prototypes: bool,
    #[arg(short, long)]
    pub out_dir: PathBuf,
}

#[derive(clap::Args)]
pub struct ClusterArgs {
    /// Dataset directory, or a .jsonl frame manifest (needs --subspace-dim).
    pub dataset: PathBuf,
    /// Reconstruction weight λ.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Laplacian weight β; 0 disables the local-structure term.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Expected rank r (leading singular values left unpenalized).
    #[arg(long, default_value_t = 0)]
    pub rank: usize,
    /// Neighborhood size C (required when β > 0).
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// Neighbor weight kernel: 'distance' or 'heat:SIGMA'.
    #[arg(long, default_value = "distance")]
    pub kernel: String,
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub mu_init: f64,
    #[arg(long, default_value_t = 1e10)]
    pub mu_max: f64,
    #[arg(long, default_value_t = 1.9)]
    pub rho: f64,
    /// Use the truncated-SVD proximal path.
    #[arg(long)]
    pub partial_svd: bool,
    /// Subspace dimension for .jsonl frame ingestion.
    #[arg(long)]
    pub subspace_dim: Option<usize>,
    /// Skip per-set standardization during frame ingestion.
    #[arg(long)]
    pub no_normalize: bool,
    /// Also write residual.svg, a line chart of the residual history.
    #[arg(long)]
    pub svg: bool,
    #[arg(short, long, default_value = "gclust-out")]
    pub out_dir: PathBuf,
}

#[derive(clap::Args)]
pub struct SweepArgs {
    /// Dataset directory, or a .jsonl frame manifest (needs --subspace-dim).
    pub dataset: PathBuf,
    /// λ grid: comma list, e.g. '0.5,1,2'.
    #[arg(long, default_value = "1")]
    pub lambda: String,
    /// β grid: comma list.
    #[arg(long, default_value = "0")]
    pub beta: String,
    /// Rank grid: comma list or inclusive range, e.g. '0..5'.
    #[arg(long, default_value = "0")]
    pub rank: String,
    /// Neighborhood-size grid (required when the β grid has positive values).
    #[arg(long)]
    pub neighbors: Option<String>,
    #[arg(long, default_value = "distance")]
    pub kernel: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Repeat each cell this many times (identical configuration each time).
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Refuse grids larger than this many cells.
    #[arg(long, default_value_t = 10_000)]
    pub cell_cap: usize,
    #[arg(long)]
    pub subspace_dim: Option<usize>,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct EvalArgs {
    pub predicted: PathBuf,
    pub truth: PathBuf,
    /// Also write the JSON report to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var("GCLUST_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => ops::cmd_synth(args),
        Command::Cluster(args) => ops::cmd_cluster(args),
        Command::Sweep(args) => ops::cmd_sweep(args),
        Command::Eval(args) => ops::cmd_eval(args),
    };
    if let Err(err) = result {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}
