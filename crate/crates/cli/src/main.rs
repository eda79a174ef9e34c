//! `deltacom` — multiresolution community detection pipeline.
//!
//! Subcommands mirror the stages of a router-map study: descriptive `stats`,
//! 2-core/chain `preprocess`, community `detect` (multiresolution or
//! baselines), ground-truth `match` (R1/R2/R3), size–resolution `regress`,
//! and seeded `synth` benchmarks. Every run is deterministic given its
//! inputs and `--seed`, and drops a `manifest.txt` next to its outputs.

mod commands;
mod manifest;
mod outdir;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "deltacom", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// Directory for all output files (created if missing).
    #[arg(long, global = true, default_value = "out")]
    output_dir: PathBuf,

    /// RNG seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for the per-group evaluation (1 = fully sequential).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Degree, clustering and power-law statistics of a graph.
    Stats {
        /// Edge-list file (plain or gzip).
        graph: PathBuf,
        /// Optional `node group` affiliation file.
        #[arg(long)]
        affiliations: Option<PathBuf>,
        /// Smallest degree used for the power-law fit.
        #[arg(long, default_value_t = 1)]
        k_min: u32,
    },
    /// k-core extraction plus chain classification and collapse.
    Preprocess {
        graph: PathBuf,
        #[arg(long)]
        affiliations: PathBuf,
        /// Core order (the cleaning pipeline peels below this degree).
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Repeat core + collapse until nothing changes.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        iterate: bool,
    },
    /// Run a community detector.
    Detect {
        graph: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Sweep/pass cap for the baseline detectors.
        #[arg(long, default_value_t = 100)]
        max_sweeps: u32,
    },
    /// Score a partition or dendrogram against ground-truth groups.
    Match {
        /// Ground truth in affiliation format (`node group` lines).
        #[arg(long)]
        ground_truth: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Partition file (required for r1).
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Dendrogram file (required for r2/r3).
        #[arg(long)]
        dendrogram: Option<PathBuf>,
        /// Node fraction sampled per group in r3.
        #[arg(long, default_value_t = 0.15)]
        sample_fraction: f64,
        /// Regression fit CSV driving r3's per-size resolution.
        #[arg(long)]
        fit_from: Option<PathBuf>,
        /// Report only groups of at least this many nodes.
        #[arg(long, default_value_t = 1)]
        min_size: u32,
    },
    /// Fit the size–resolution regression from r2 match results.
    Regress {
        /// `matches.csv` produced by `match --mode r2`.
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_size: u32,
    },
    /// Generate a planted-partition benchmark from a spec file.
    Synth {
        /// Flat key=value spec file.
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Deltacom,
    Louvain,
    Lpm,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    R1,
    R2,
    R3,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        // The global pool can only be sized once; a failure means a pool
        // already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global();
    }
    commands::run(cli.command, &cli.global)
}
