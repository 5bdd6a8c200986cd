//! Corpus-level features: key dictionary, per-protein SSE × key matrices,
//! their binary formats, dataset splits and trainer batches.

mod batch;
mod dictionary;
mod format;
mod matrix;
mod split;

use thiserror::Error;

use crate::config::ConfigHash;

pub use batch::{
    Batch, BatchDescriptor, BatchExporter, BatchSpec, DirectorySource, EpochLog, MatrixSource, TensorFile, BATCH_FORMAT,
};
pub use dictionary::{build_dictionary, KeyDictionary};
pub use format::{
    deserialize_dictionary, deserialize_key_stream, deserialize_matrix, serialize_dictionary, serialize_key_stream,
    serialize_matrix, FormatError, DICTIONARY_MAGIC, FORMAT_VERSION, KEY_STREAM_MAGIC, MATRIX_CELL_BYTES, MATRIX_MAGIC,
};
pub use matrix::{build_matrix, matrix_from_stream, BuiltMatrix, KeyPolicy, MatrixCell, SseKeyMatrix};
pub use split::{
    split_dataset, DatasetManifest, LabeledMatrix, ManifestEntry, ManifestHeader, Split, SplitRatios, MANIFEST_FORMAT,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("config hash mismatch for {context}: expected {expected}, found {found}")]
    ConfigMismatch { expected: ConfigHash, found: ConfigHash, context: String },
    #[error("key {0} is not in the dictionary")]
    UnknownKey(u64),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{0}")]
    Invalid(String),
    #[error("count overflow in cell (row {row}, column {column})")]
    CountOverflow { row: u8, column: u64 },
    #[error("split ratios {0:?} must be non-negative and sum to 1")]
    BadRatios([f64; 3]),
    #[error("protein {0} appears more than once")]
    DuplicateProtein(String),
    #[error("class {label:?} has {size} members; at least 3 are needed to stratify")]
    ClassTooSmall { label: String, size: usize },
    #[error("split {0} is empty")]
    EmptySplit(Split),
    #[error("batch size {batch_size} invalid for a split of {split_size}")]
    BadBatchSize { batch_size: usize, split_size: usize },
    #[error("matrix has {found} columns but the dictionary has {expected}")]
    DictionaryMismatch { expected: u64, found: u64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
}
