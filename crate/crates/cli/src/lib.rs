//! The `sse-tsr` pipeline driver.
//!
//! Every stage reads and writes files under one work directory (see
//! [`layout::Workdir`]), so stages can be rerun or replaced independently.

pub mod commands;
pub mod layout;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use tsr_core::{DiscretizationConfig, Metric, Mode, Split, SplitRatios};

#[derive(Debug, Parser)]
#[command(name = "sse-tsr", version, about = "SSE-augmented triangle-key features for protein structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Discretization config (TOML); the built-in default when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Work directory holding every stage's artifacts.
    #[arg(long)]
    pub output: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Common {
    pub fn load_config(&self) -> anyhow::Result<DiscretizationConfig> {
        match &self.config {
            Some(path) => DiscretizationConfig::from_path(path).with_context(|| format!("loading {}", path.display())),
            None => Ok(DiscretizationConfig::default_config()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StructureInput {
    /// Keep only these chains (comma-separated); all chains when omitted.
    #[arg(long, value_delimiter = ',')]
    pub chains: Option<Vec<char>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse PDB files into normalized Cα structures with SSE records.
    Ingest {
        #[command(flatten)]
        common: Common,
        /// A PDB file or a directory of `.pdb`/`.ent` files.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        structure: StructureInput,
    },
    /// Compute per-protein key streams and the degeneracy report.
    Keygen {
        #[command(flatten)]
        common: Common,
        /// PDB file or directory; defaults to the ingested structures.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        structure: StructureInput,
    },
    /// Build the key dictionary from all key streams.
    Dict {
        #[command(flatten)]
        common: Common,
    },
    /// Build an 18 × K matrix per key stream.
    Matrix {
        #[command(flatten)]
        common: Common,
        /// Key-stream directory; defaults to the work directory's streams.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Drop keys missing from the dictionary instead of failing.
        #[arg(long)]
        inference: bool,
    },
    /// Join matrices with class labels and assign stratified splits.
    Dataset {
        #[command(flatten)]
        common: Common,
        /// Label CSV with a header row.
        #[arg(long, alias = "labels")]
        input: PathBuf,
        #[arg(long, default_value = "protein")]
        id_column: String,
        #[arg(long, default_value = "label")]
        label_column: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// train,validation,test fractions.
        #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_ratios)]
        ratios: SplitRatios,
    },
    /// Write dense float32 batches for the trainer.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        batch_size: usize,
        /// Seed of the per-epoch shuffles.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        epochs: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "train")]
        split: Vec<SplitArg>,
        /// Batches densified ahead of the writer.
        #[arg(long, default_value_t = 2)]
        prefetch: usize,
    },
    /// All-vs-all similarity of the matrices.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "sse-tsr")]
        mode: ModeArg,
    },
    /// k-nearest-neighbor classification of one split against the train split.
    Knn {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "sse-tsr")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "jaccard")]
        metric: MetricArg,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Triangle, degeneracy, category, dictionary and class statistics.
    Stats {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Ingest { common, .. }
            | Command::Keygen { common, .. }
            | Command::Dict { common }
            | Command::Matrix { common, .. }
            | Command::Dataset { common, .. }
            | Command::Export { common, .. }
            | Command::Compare { common, .. }
            | Command::Knn { common, .. }
            | Command::Stats { common } => common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Tsr,
    SseTsr,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Tsr => Mode::Tsr,
            ModeArg::SseTsr => Mode::SseTsr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Jaccard,
    Cosine,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Jaccard => Metric::Jaccard,
            MetricArg::Cosine => Metric::Cosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Validation => Split::Validation,
            SplitArg::Test => Split::Test,
        }
    }
}

fn parse_ratios(s: &str) -> Result<SplitRatios, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        &[train, validation, test] => SplitRatios::new(train, validation, test).map_err(|e| e.to_string()),
        _ => Err("expected three comma-separated fractions".into()),
    }
}

/// Runs one subcommand inside a worker pool of the requested size.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    let workers = cli.command.common().workers.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| commands::dispatch(cli.command))
}
