//! Epoch-shuffled dense batch export for the trainer.
//!
//! Each batch is two raw little-endian `f32` tensors, inputs of shape
//! `batch × 18 × K` and one-hot labels of shape `batch × classes`, plus a JSON
//! descriptor naming the files, shapes and protein order.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::format::deserialize_matrix;
use super::matrix::SseKeyMatrix;
use super::split::{DatasetManifest, ManifestEntry, Split};
use super::FeatureError;
use crate::sse::CATEGORY_COUNT;

pub const BATCH_FORMAT: &str = "tsr-batch-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSpec {
    pub batch_size: usize,
    pub epoch_seed: u64,
    pub split: Split,
}

/// Where the exporter gets each entry's matrix from.
pub trait MatrixSource {
    fn load(&self, entry: &ManifestEntry) -> Result<SseKeyMatrix, FeatureError>;
}

/// Reads TSRM files at manifest paths relative to `root`.
#[derive(Debug, Clone)]
pub struct DirectorySource {
    pub root: PathBuf,
}

impl MatrixSource for DirectorySource {
    fn load(&self, entry: &ManifestEntry) -> Result<SseKeyMatrix, FeatureError> {
        Ok(deserialize_matrix(&fs::read(self.root.join(&entry.path))?)?)
    }
}

/// In-memory matrices keyed by protein id.
impl MatrixSource for HashMap<String, SseKeyMatrix> {
    fn load(&self, entry: &ManifestEntry) -> Result<SseKeyMatrix, FeatureError> {
        self.get(&entry.protein_id)
            .cloned()
            .ok_or_else(|| FeatureError::Invalid(format!("no matrix for {}", entry.protein_id)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub epoch: u64,
    pub index: usize,
    pub protein_ids: Vec<String>,
    pub columns: usize,
    pub classes: usize,
    /// Row-major `batch × 18 × columns`.
    pub inputs: Vec<f32>,
    /// Row-major `batch × classes`, one-hot.
    pub labels: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorFile {
    pub file: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchDescriptor {
    pub format: String,
    pub dtype: String,
    pub byte_order: String,
    pub epoch: u64,
    pub index: usize,
    pub inputs: TensorFile,
    pub labels: TensorFile,
    pub protein_ids: Vec<String>,
}

fn f32_bytes(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

impl Batch {
    pub fn len(&self) -> usize {
        self.protein_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.protein_ids.is_empty()
    }

    pub fn descriptor(&self, stem: &str) -> BatchDescriptor {
        BatchDescriptor {
            format: BATCH_FORMAT.into(),
            dtype: "float32".into(),
            byte_order: "little".into(),
            epoch: self.epoch,
            index: self.index,
            inputs: TensorFile {
                file: format!("{stem}.inputs.f32"),
                shape: vec![self.len(), CATEGORY_COUNT, self.columns],
            },
            labels: TensorFile { file: format!("{stem}.labels.f32"), shape: vec![self.len(), self.classes] },
            protein_ids: self.protein_ids.clone(),
        }
    }

    /// Writes `<stem>.inputs.f32`, `<stem>.labels.f32` and `<stem>.json`.
    pub fn write_to(&self, dir: &Path, stem: &str) -> io::Result<()> {
        let desc = self.descriptor(stem);
        fs::write(dir.join(&desc.inputs.file), f32_bytes(&self.inputs))?;
        fs::write(dir.join(&desc.labels.file), f32_bytes(&self.labels))?;
        let mut json = serde_json::to_string_pretty(&desc).map_err(io::Error::other)?;
        json.push('\n');
        fs::write(dir.join(format!("{stem}.json")), json)
    }
}

/// The shuffled order of one epoch, kept for reproducibility.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: u64,
    pub epoch_seed: u64,
    pub split: Split,
    pub batch_size: usize,
    pub order: Vec<String>,
}

pub struct BatchExporter<'a, S> {
    manifest: &'a DatasetManifest,
    entries: Vec<&'a ManifestEntry>,
    columns: u64,
    spec: BatchSpec,
    source: &'a S,
}

impl<'a, S: MatrixSource> BatchExporter<'a, S> {
    /// `columns` is the dictionary size K every matrix must have.
    pub fn new(manifest: &'a DatasetManifest, columns: u64, spec: BatchSpec, source: &'a S) -> Result<Self, FeatureError> {
        let entries: Vec<_> = manifest.split(spec.split).collect();
        if entries.is_empty() {
            return Err(FeatureError::EmptySplit(spec.split));
        }
        if spec.batch_size == 0 || spec.batch_size > entries.len() {
            return Err(FeatureError::BadBatchSize { batch_size: spec.batch_size, split_size: entries.len() });
        }
        Ok(Self { manifest, entries, columns, spec, source })
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.entries.len().div_ceil(self.spec.batch_size)
    }

    /// Seeded permutation of the split for `epoch`; each epoch draws from its
    /// own ChaCha stream.
    pub fn epoch_order(&self, epoch: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.epoch_seed);
        rng.set_stream(epoch);
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.shuffle(&mut rng);
        order
    }

    pub fn epoch_log(&self, epoch: u64) -> EpochLog {
        EpochLog {
            epoch,
            epoch_seed: self.spec.epoch_seed,
            split: self.spec.split,
            batch_size: self.spec.batch_size,
            order: self.epoch_order(epoch).into_iter().map(|i| self.entries[i].protein_id.clone()).collect(),
        }
    }

    /// Lazily densified batches of one epoch; the last batch may be short.
    pub fn epoch(&self, epoch: u64) -> impl Iterator<Item = Result<Batch, FeatureError>> + '_ {
        let order = self.epoch_order(epoch);
        let chunks: Vec<Vec<usize>> = order.chunks(self.spec.batch_size).map(<[usize]>::to_vec).collect();
        chunks.into_iter().enumerate().map(move |(index, chunk)| self.batch(epoch, index, &chunk))
    }

    fn batch(&self, epoch: u64, index: usize, members: &[usize]) -> Result<Batch, FeatureError> {
        let k = self.columns as usize;
        let classes = self.manifest.labels().len();
        let plane = CATEGORY_COUNT * k;
        let mut inputs = vec![0.0f32; members.len() * plane];
        let mut labels = vec![0.0f32; members.len() * classes];
        let mut protein_ids = Vec::with_capacity(members.len());
        for (slot, &i) in members.iter().enumerate() {
            let entry = self.entries[i];
            let m = self.source.load(entry)?;
            if m.config_hash() != self.manifest.config_hash() {
                return Err(FeatureError::ConfigMismatch {
                    expected: self.manifest.config_hash(),
                    found: m.config_hash(),
                    context: entry.protein_id.clone(),
                });
            }
            if m.columns() != self.columns {
                return Err(FeatureError::DictionaryMismatch { expected: self.columns, found: m.columns() });
            }
            m.write_dense(&mut inputs[slot * plane..(slot + 1) * plane]);
            let label = self
                .manifest
                .label_index(&entry.label)
                .ok_or_else(|| FeatureError::Invalid(format!("label {:?} not in vocabulary", entry.label)))?;
            labels[slot * classes + label] = 1.0;
            protein_ids.push(entry.protein_id.clone());
        }
        Ok(Batch { epoch, index, protein_ids, columns: k, classes, inputs, labels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigHash;
    use crate::features::matrix::MatrixCell;
    use crate::features::split::{split_dataset, LabeledMatrix, SplitRatios};

    fn fixture() -> (DatasetManifest, HashMap<String, SseKeyMatrix>) {
        let mut items = Vec::new();
        let mut mats = HashMap::new();
        for (c, label) in ["a", "b"].iter().enumerate() {
            for i in 0..10u64 {
                let id = format!("{label}{i}");
                let cell = MatrixCell { row: c as u8, column: i % 4, count: i as u32 + 1 };
                mats.insert(id.clone(), SseKeyMatrix::new(&id, 4, vec![cell], 0, ConfigHash::default()).unwrap());
                items.push(LabeledMatrix { protein_id: id.clone(), class_label: label.to_string(), matrix_path: id });
            }
        }
        let m = split_dataset(items, SplitRatios::default(), 5, ConfigHash::default(), "d").unwrap();
        (m, mats)
    }

    #[test]
    fn shapes_and_one_hot() {
        let (m, mats) = fixture();
        let spec = BatchSpec { batch_size: 6, epoch_seed: 1, split: Split::Train };
        let ex = BatchExporter::new(&m, 4, spec, &mats).unwrap();
        let batches: Vec<_> = ex.epoch(0).collect::<Result<_, _>>().unwrap();
        assert_eq!(batches.iter().map(Batch::len).collect::<Vec<_>>(), vec![6, 6, 4]);
        assert_eq!(ex.batches_per_epoch(), 3);
        for b in &batches {
            assert_eq!(b.inputs.len(), b.len() * 18 * 4);
            assert_eq!(b.labels.len(), b.len() * 2);
            for (slot, id) in b.protein_ids.iter().enumerate() {
                let onehot = &b.labels[slot * 2..slot * 2 + 2];
                let expect = if id.starts_with('a') { [1.0, 0.0] } else { [0.0, 1.0] };
                assert_eq!(onehot, expect);
                assert_eq!(&b.inputs[slot * 72..(slot + 1) * 72], mats[id].to_dense().as_slice());
            }
        }
    }

    #[test]
    fn epochs_reshuffle_deterministically() {
        let (m, mats) = fixture();
        let spec = BatchSpec { batch_size: 4, epoch_seed: 7, split: Split::Train };
        let ex = BatchExporter::new(&m, 4, spec, &mats).unwrap();
        assert_eq!(ex.epoch_log(3), ex.epoch_log(3));
        assert_ne!(ex.epoch_order(0), ex.epoch_order(1));
        let mut sorted = ex.epoch_order(2);
        sorted.sort_unstable();
        assert_eq!(sorted, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn bad_specs() {
        let (m, mats) = fixture();
        let spec = |batch_size| BatchSpec { batch_size, epoch_seed: 0, split: Split::Validation };
        assert!(matches!(
            BatchExporter::new(&m, 4, spec(3), &mats),
            Err(FeatureError::BadBatchSize { batch_size: 3, split_size: 2 })
        ));
        assert!(BatchExporter::new(&m, 4, spec(0), &mats).is_err());
        let ex = BatchExporter::new(&m, 5, spec(2), &mats).unwrap();
        assert!(matches!(ex.epoch(0).next().unwrap(), Err(FeatureError::DictionaryMismatch { .. })));
    }

    #[test]
    fn files_are_little_endian_f32() {
        let (m, mats) = fixture();
        let spec = BatchSpec { batch_size: 2, epoch_seed: 0, split: Split::Test };
        let ex = BatchExporter::new(&m, 4, spec, &mats).unwrap();
        let b = ex.epoch(0).next().unwrap().unwrap();
        let dir = std::env::temp_dir().join(format!("tsr-batch-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        b.write_to(&dir, "e0-b0").unwrap();
        let raw = fs::read(dir.join("e0-b0.inputs.f32")).unwrap();
        let floats: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        assert_eq!(floats, b.inputs);
        let desc: BatchDescriptor =
            serde_json::from_str(&fs::read_to_string(dir.join("e0-b0.json")).unwrap()).unwrap();
        assert_eq!(desc.inputs.shape, vec![2, 18, 4]);
        assert_eq!(desc.labels.shape, vec![2, 2]);
        fs::remove_dir_all(&dir).unwrap();
    }
}
