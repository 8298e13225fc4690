//! `gmsnet` command-line driver.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "gmsnet", version, about = "Multiscale diffusion solver for weighted networks")]
pub struct Cli {
    /// Worker threads for patch and face computations.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Record wall-clock timings in reports (makes reports run-dependent).
    #[arg(long, global = true)]
    pub timings: bool,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a network and write nodes.csv, edges.csv and meta.json.
    Gen(GenArgs),
    /// Solve the fine-scale problem with implicit Euler.
    SolveFine(SolveFineArgs),
    /// Build the multiscale basis and save the projection operator.
    Basis(BasisArgs),
    /// Solve on the multiscale space and reconstruct the fine solution.
    Ms(MsArgs),
    /// Build and solve the flux-averaged upscaled model.
    Upscale(UpscaleArgs),
    /// Compare solution files against a reference.
    Compare(CompareArgs),
    /// Summarize a network directory (and optionally a basis).
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// regular, irregular or unstructured.
    #[arg(long)]
    pub family: Option<String>,
    /// Lattice nodes per axis, e.g. 40,40.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Box side lengths (default: unit box).
    #[arg(long = "box", value_delimiter = ',')]
    pub box_lengths: Option<Vec<f64>>,
    /// Dimension of an unstructured network.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Point count of an unstructured network.
    #[arg(long)]
    pub points: Option<usize>,
    /// Neighbors per point of an unstructured network.
    #[arg(long)]
    pub knn: Option<usize>,
    /// Edge and node removal probability of an irregular lattice.
    #[arg(long)]
    pub removal_prob: Option<f64>,
    #[arg(long, required = true)]
    pub seed: Option<u64>,
    /// poiseuille_random, high_contrast or external_field.
    #[arg(long)]
    pub properties: Option<String>,
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    /// random_uniform or harmonic_of_pores.
    #[arg(long)]
    pub throat_rule: Option<String>,
    #[arg(long)]
    pub viscosity: Option<f64>,
    #[arg(long)]
    pub d_in: Option<f64>,
    #[arg(long)]
    pub d_out: Option<f64>,
    /// High-contrast box `lo1,lo2:hi1,hi2` (repeatable).
    #[arg(long = "contrast-box")]
    pub contrast_boxes: Vec<String>,
    /// Raster coefficient field file.
    #[arg(long)]
    pub field: Option<String>,
    /// both, capacity_only or weight_only.
    #[arg(long)]
    pub field_mode: Option<String>,
    /// Boundary label tolerance (default: half a lattice spacing, or the
    /// mean point spacing).
    #[arg(long)]
    pub label_tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct ProblemArgs {
    /// Network directory.
    #[arg(long)]
    pub network: PathBuf,
    /// Dirichlet value per face label, e.g. top=1 (repeatable; default top=1).
    #[arg(long)]
    pub dirichlet: Vec<String>,
    /// Constant source at every node.
    #[arg(long)]
    pub source: Option<f64>,
    /// Constant initial state.
    #[arg(long)]
    pub u0: Option<f64>,
    /// Initial state from an `id,value` file.
    #[arg(long)]
    pub u0_file: Option<PathBuf>,
    /// Time step.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Final time (used when --tau is absent; default 1).
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Number of time steps (default 50).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Store every k-th state.
    #[arg(long)]
    pub save_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveFineArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// conjugate_gradient, dense_cholesky or dense_lu_oracle.
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct BasisOptions {
    /// Coarse cells per axis, e.g. 5,5.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Eigenfunctions per patch.
    #[arg(long)]
    pub m: Option<usize>,
    /// Use complete local eigenbases.
    #[arg(long)]
    pub full: bool,
    /// Per-patch count `patch=m` (repeatable).
    #[arg(long = "m-patch")]
    pub m_patch: Vec<String>,
    /// Largest cluster solved with the dense eigensolver.
    #[arg(long)]
    pub dense_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub basis: BasisOptions,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MsArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub basis: BasisOptions,
    /// Directory holding basis.json and R.coo.
    #[arg(long)]
    pub basis_dir: Option<PathBuf>,
    /// Build the basis in this run instead of loading it.
    #[arg(long)]
    pub build_basis: bool,
    /// Run once per M in the list (implies --build-basis).
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    /// Reference solution (`id,value`) for error reports.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Unweighted cell averages for the coarse error.
    #[arg(long)]
    pub unweighted: bool,
    /// Errors at every stored step, not only the final one.
    #[arg(long)]
    pub per_step: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct UpscaleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Inflow/outflow layer thickness as a fraction of the cell size.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Unweighted cell averages instead of capacity-weighted ones.
    #[arg(long)]
    pub unweighted: bool,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Network directory (for the energy norm and cell averages).
    #[arg(long)]
    pub network: PathBuf,
    /// Coarse cells per axis used for the coarse error.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<usize>,
    #[arg(long)]
    pub reference: PathBuf,
    /// Candidate solution files.
    #[arg(required = true)]
    pub candidates: Vec<PathBuf>,
    /// M value per candidate, for the table and plot data.
    #[arg(long, value_delimiter = ',')]
    pub m_values: Option<Vec<usize>>,
    #[arg(long)]
    pub unweighted: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub basis_dir: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let file = config::FileConfig::load(cli.config.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        pool = pool.num_threads(k.max(1));
    }
    let pool = pool.build().context("creating the worker pool")?;
    pool.install(|| commands::run(&cli, &file))
}
