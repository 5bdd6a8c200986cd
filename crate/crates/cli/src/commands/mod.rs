//! Subcommand implementations.

mod analysis;
mod build;
mod dataset;

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use crate::Command;

pub fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Ingest { common, input, structure } => build::ingest(&common, &input, &structure),
        Command::Keygen { common, input, structure } => build::keygen(&common, input.as_deref(), &structure),
        Command::Dict { common } => build::dict(&common),
        Command::Matrix { common, input, inference } => build::matrix(&common, input.as_deref(), inference),
        Command::Dataset { common, input, id_column, label_column, seed, ratios } => {
            dataset::dataset(&common, &input, &id_column, &label_column, seed, ratios)
        }
        Command::Export { common, batch_size, seed, epochs, split, prefetch } => {
            dataset::export(&common, batch_size, seed, epochs, &split, prefetch)
        }
        Command::Compare { common, mode } => analysis::compare(&common, mode.into()),
        Command::Knn { common, k, mode, metric, split } => {
            analysis::knn(&common, k, mode.into(), metric.into(), split.into())
        }
        Command::Stats { common } => analysis::stats(&common),
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}
