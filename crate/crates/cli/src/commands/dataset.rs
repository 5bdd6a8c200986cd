//! dataset and export.

use std::collections::BTreeMap;
use std::fs;
use std::sync::mpsc;

use anyhow::{ensure, Context};
use log::{info, warn};
use serde::Serialize;
use tsr_core::features::{
    deserialize_matrix, BatchExporter, BatchSpec, DatasetManifest, DirectorySource, LabeledMatrix, BATCH_FORMAT,
};
use tsr_core::structure::load_labels;
use tsr_core::{split_dataset, Split, SplitRatios};

use super::build::load_dictionary;
use super::{read, write_json};
use crate::layout::{fresh_dir, list_files, Workdir};
use crate::{Common, SplitArg};

pub fn dataset(
    common: &Common,
    labels_path: &std::path::Path,
    id_column: &str,
    label_column: &str,
    seed: u64,
    ratios: SplitRatios,
) -> anyhow::Result<()> {
    let wd = Workdir::open(&common.output)?;
    let dict = load_dictionary(&wd)?;
    let text = fs::read_to_string(labels_path).with_context(|| format!("reading {}", labels_path.display()))?;
    let labels = load_labels(&text, id_column, label_column)?;
    let matrices: BTreeMap<String, _> = list_files(&wd.matrices(), &["tsrm"])?.into_iter().collect();

    let mut items = Vec::new();
    for rec in labels {
        if matrices.contains_key(&rec.protein_id) {
            items.push(LabeledMatrix {
                matrix_path: Workdir::matrix_rel(&rec.protein_id),
                protein_id: rec.protein_id,
                class_label: rec.class_label,
            });
        } else {
            warn!("{}: labeled but has no matrix, skipped", rec.protein_id);
        }
    }
    let labeled: std::collections::BTreeSet<_> = items.iter().map(|i| i.protein_id.clone()).collect();
    for id in matrices.keys().filter(|id| !labeled.contains(*id)) {
        warn!("{id}: matrix has no label, skipped");
    }

    let manifest = split_dataset(items, ratios, seed, dict.config_hash(), "dictionary.tsrd")?;
    manifest.validate(wd.root())?;
    for (label, counts) in class_counts(&manifest) {
        info!("class {label}: {} train / {} validation / {} test", counts[0], counts[1], counts[2]);
    }
    fs::write(wd.manifest_csv(), manifest.to_csv()?)?;
    fs::write(wd.manifest_header(), manifest.header_json())?;
    info!("manifest lists {} proteins in {} classes", manifest.entries().len(), manifest.labels().len());
    Ok(())
}

/// Per label, (train, validation, test) counts.
pub(super) fn class_counts(m: &DatasetManifest) -> BTreeMap<String, [usize; 3]> {
    let mut out: BTreeMap<String, [usize; 3]> = m.labels().iter().map(|l| (l.clone(), [0; 3])).collect();
    for e in m.entries() {
        let slot = Split::ALL.iter().position(|s| *s == e.split).unwrap();
        out.get_mut(&e.label).unwrap()[slot] += 1;
    }
    out
}

pub(super) fn load_manifest(wd: &Workdir) -> anyhow::Result<DatasetManifest> {
    let csv = fs::read_to_string(wd.manifest_csv()).with_context(|| format!("reading {}", wd.manifest_csv().display()))?;
    let header = fs::read_to_string(wd.manifest_header())
        .with_context(|| format!("reading {}", wd.manifest_header().display()))?;
    Ok(DatasetManifest::from_parts(&csv, &header)?)
}

#[derive(Serialize)]
struct ExportIndex<'a> {
    format: &'a str,
    split: Split,
    batch_size: usize,
    epochs: u64,
    epoch_seed: u64,
    batches_per_epoch: usize,
    samples: usize,
    columns: u64,
    rows: usize,
    labels: &'a [String],
    config_hash: String,
}

pub fn export(
    common: &Common,
    batch_size: usize,
    seed: u64,
    epochs: u64,
    splits: &[SplitArg],
    prefetch: usize,
) -> anyhow::Result<()> {
    let wd = Workdir::open(&common.output)?;
    let manifest = load_manifest(&wd)?;
    let dict = load_dictionary(&wd)?;
    ensure!(
        dict.config_hash() == manifest.config_hash(),
        "dictionary config {} differs from manifest config {}",
        dict.config_hash(),
        manifest.config_hash()
    );
    let source = DirectorySource { root: wd.root().to_path_buf() };
    let columns = dict.len() as u64;

    for &split in splits {
        let split = Split::from(split);
        let spec = BatchSpec { batch_size, epoch_seed: seed, split };
        let exporter = BatchExporter::new(&manifest, columns, spec, &source)?;
        let split_dir = wd.batches().join(split.as_str());
        fresh_dir(&split_dir)?;
        write_json(
            &split_dir.join("index.json"),
            &ExportIndex {
                format: BATCH_FORMAT,
                split,
                batch_size,
                epochs,
                epoch_seed: seed,
                batches_per_epoch: exporter.batches_per_epoch(),
                samples: manifest.split(split).count(),
                columns,
                rows: tsr_core::CATEGORY_COUNT,
                labels: manifest.labels(),
                config_hash: manifest.config_hash().to_hex(),
            },
        )?;
        for epoch in 0..epochs {
            let dir = split_dir.join(format!("epoch-{epoch:04}"));
            fs::create_dir_all(&dir)?;
            write_json(&dir.join("order.json"), &exporter.epoch_log(epoch))?;
            write_epoch(&exporter, epoch, &dir, prefetch)?;
        }
        info!("{split}: {epochs} epochs of {} batches", exporter.batches_per_epoch());
    }
    Ok(())
}

/// Densifies batches on a producer thread while this thread writes them.
fn write_epoch(
    exporter: &BatchExporter<'_, DirectorySource>,
    epoch: u64,
    dir: &std::path::Path,
    prefetch: usize,
) -> anyhow::Result<()> {
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::sync_channel(prefetch.max(1));
        scope.spawn(move || {
            for batch in exporter.epoch(epoch) {
                if tx.send(batch).is_err() {
                    break;
                }
            }
        });
        for batch in rx {
            let batch = batch?;
            batch.write_to(dir, &format!("batch-{:05}", batch.index))?;
        }
        Ok(())
    })
}

/// Decodes one manifest entry's matrix.
pub(super) fn load_matrix(wd: &Workdir, rel: &str) -> anyhow::Result<tsr_core::SseKeyMatrix> {
    let path = wd.root().join(rel);
    deserialize_matrix(&read(&path)?).with_context(|| format!("decoding {}", path.display()))
}
