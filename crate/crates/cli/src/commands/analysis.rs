//! compare, knn and stats.

use std::collections::BTreeMap;
use std::fs;

use anyhow::{ensure, Context};
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use tsr_core::features::deserialize_matrix;
use tsr_core::similarity::{all_pairs, report_csv, Reference};
use tsr_core::tsr::triangle_count;
use tsr_core::{knn_classify, Metric, Mode, Split, SseKeyMatrix, SseTripleCategory, CATEGORY_COUNT};

use super::build::{load_dictionary, load_streams};
use super::dataset::{class_counts, load_manifest, load_matrix};
use super::{read, write_csv, write_json};
use crate::layout::{list_files, Workdir};
use crate::Common;

fn load_matrices(wd: &Workdir) -> anyhow::Result<Vec<SseKeyMatrix>> {
    list_files(&wd.matrices(), &["tsrm"])?
        .par_iter()
        .map(|(_, path)| deserialize_matrix(&read(path)?).with_context(|| format!("decoding {}", path.display())))
        .collect()
}

pub fn compare(common: &Common, mode: Mode) -> anyhow::Result<()> {
    let wd = Workdir::open(&common.output)?;
    let matrices = load_matrices(&wd)?;
    ensure!(matrices.len() >= 2, "need at least two matrices to compare");
    let pairs = all_pairs(&matrices, mode)?;
    let path = wd.similarity().join(format!("{mode}.csv"));
    fs::create_dir_all(wd.similarity())?;
    fs::write(&path, report_csv(&pairs))?;
    info!("{} pairs scored in {mode} mode", pairs.len());
    Ok(())
}

#[derive(Serialize)]
struct KnnRow {
    protein_id: String,
    label: String,
    predicted: String,
    correct: bool,
    /// `id:similarity` pairs, nearest first, separated by `;`.
    neighbors: String,
}

#[derive(Serialize)]
struct KnnSummary {
    split: Split,
    mode: String,
    metric: String,
    k: usize,
    references: usize,
    queries: usize,
    correct: usize,
    accuracy: f64,
}

pub fn knn(common: &Common, k: usize, mode: Mode, metric: Metric, split: Split) -> anyhow::Result<()> {
    let wd = Workdir::open(&common.output)?;
    let manifest = load_manifest(&wd)?;
    let references: Vec<Reference> = manifest
        .split(Split::Train)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|e| Ok(Reference { label: e.label.clone(), matrix: load_matrix(&wd, &e.path)? }))
        .collect::<anyhow::Result<_>>()?;
    ensure!(!references.is_empty(), "train split is empty");
    let queries: Vec<_> = manifest.split(split).collect();
    ensure!(!queries.is_empty(), "{split} split is empty");

    let rows: Vec<KnnRow> = queries
        .par_iter()
        .map(|e| {
            let q = load_matrix(&wd, &e.path)?;
            let p = knn_classify(&q, &references, k, mode, metric)?;
            let neighbors =
                p.neighbors.iter().map(|n| format!("{}:{:.6}", n.protein_id, n.similarity)).collect::<Vec<_>>();
            Ok(KnnRow {
                protein_id: e.protein_id.clone(),
                label: e.label.clone(),
                correct: p.label == e.label,
                predicted: p.label,
                neighbors: neighbors.join(";"),
            })
        })
        .collect::<anyhow::Result<_>>()?;

    let stem = format!("{split}-{mode}-{metric}-k{k}");
    write_csv(&wd.knn().join(format!("{stem}.csv")), &rows)?;
    let correct = rows.iter().filter(|r| r.correct).count();
    let summary = KnnSummary {
        split,
        mode: mode.to_string(),
        metric: metric.to_string(),
        k,
        references: references.len(),
        queries: rows.len(),
        correct,
        accuracy: correct as f64 / rows.len() as f64,
    };
    write_json(&wd.knn().join(format!("{stem}.json")), &summary)?;
    info!("{split} accuracy {:.4} ({correct}/{})", summary.accuracy, rows.len());
    Ok(())
}

#[derive(Serialize)]
struct ProteinStats {
    protein_id: String,
    residues: u64,
    triangles: u64,
    emitted: u64,
    degenerate: u64,
    distinct_keys: usize,
    nnz: Option<usize>,
    density: Option<String>,
}

#[derive(Serialize)]
struct ClassStats {
    train: usize,
    validation: usize,
    test: usize,
    total: usize,
}

#[derive(Serialize)]
struct Summary {
    config_hash: String,
    proteins: usize,
    triangles: u64,
    emitted: u64,
    degenerate: u64,
    dictionary_size: Option<usize>,
    mean_density: Option<String>,
    category_totals: BTreeMap<String, u64>,
    classes: Option<BTreeMap<String, ClassStats>>,
}

pub fn stats(common: &Common) -> anyhow::Result<()> {
    let cfg = common.load_config()?;
    let wd = Workdir::open(&common.output)?;
    let streams = load_streams(&wd.keys(), cfg.hash())?;
    let dict = wd.dictionary().exists().then(|| load_dictionary(&wd)).transpose()?;
    let matrices: BTreeMap<String, SseKeyMatrix> = if wd.matrices().is_dir() {
        load_matrices(&wd)?.into_iter().map(|m| (m.protein_id().to_string(), m)).collect()
    } else {
        BTreeMap::new()
    };

    let mut proteins = Vec::with_capacity(streams.len());
    let mut categories = Vec::with_capacity(streams.len());
    let mut totals = [0u64; CATEGORY_COUNT];
    for s in &streams {
        let mut row = [0u64; CATEGORY_COUNT];
        for e in &s.entries {
            row[e.category.row_index()] += u64::from(e.count);
        }
        for (t, r) in totals.iter_mut().zip(row) {
            *t += r;
        }
        let m = matrices.get(&s.protein_id);
        proteins.push(ProteinStats {
            protein_id: s.protein_id.clone(),
            residues: s.residue_count,
            triangles: triangle_count(s.residue_count as usize),
            emitted: s.emitted(),
            degenerate: s.degenerate_skipped,
            distinct_keys: s.distinct_keys().len(),
            nnz: m.map(SseKeyMatrix::nnz),
            density: m.map(|m| format!("{:.9}", m.density())),
        });
        categories.push((s.protein_id.clone(), row));
    }

    let mut table = String::from("protein_id");
    for c in SseTripleCategory::ALL {
        table.push(',');
        table.push_str(c.code());
    }
    table.push('\n');
    for (id, row) in &categories {
        table.push_str(id);
        for v in row {
            table.push_str(&format!(",{v}"));
        }
        table.push('\n');
    }
    fs::create_dir_all(wd.stats())?;
    fs::write(wd.stats().join("categories.csv"), table)?;
    write_csv(&wd.stats().join("proteins.csv"), &proteins)?;

    let classes = if wd.manifest_csv().exists() {
        let manifest = load_manifest(&wd)?;
        Some(
            class_counts(&manifest)
                .into_iter()
                .map(|(l, [train, validation, test])| {
                    (l, ClassStats { train, validation, test, total: train + validation + test })
                })
                .collect(),
        )
    } else {
        None
    };
    let mean_density = (!matrices.is_empty())
        .then(|| format!("{:.9}", matrices.values().map(SseKeyMatrix::density).sum::<f64>() / matrices.len() as f64));
    let summary = Summary {
        config_hash: cfg.hash().to_hex(),
        proteins: streams.len(),
        triangles: proteins.iter().map(|p| p.triangles).sum(),
        emitted: proteins.iter().map(|p| p.emitted).sum(),
        degenerate: proteins.iter().map(|p| p.degenerate).sum(),
        dictionary_size: dict.map(|d| d.len()),
        mean_density,
        category_totals: SseTripleCategory::ALL.iter().map(|c| (c.code().to_string(), totals[c.row_index()])).collect(),
        classes,
    };
    write_json(&wd.stats().join("summary.json"), &summary)?;
    info!("statistics for {} proteins written to {}", streams.len(), wd.stats().display());
    Ok(())
}
