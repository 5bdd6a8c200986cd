//! SSE-augmented triangular spatial relationship (TSR) features for protein
//! structures.
//!
//! The pipeline runs PDB text → [`ProteinStructure`] → per-triangle keys and
//! SSE categories ([`key_stream`]) → corpus [`KeyDictionary`] → per-protein
//! 18 × K [`SseKeyMatrix`] → stratified [`DatasetManifest`] → dense trainer
//! batches. [`similarity`] compares matrices directly.

pub mod amino;
pub mod config;
pub mod features;
pub mod similarity;
pub mod sse;
pub mod structure;
pub mod tsr;

pub use amino::AminoAcid;
pub use config::{AminoAcidLabelMap, ConfigError, ConfigHash, DiscretizationConfig};
pub use features::{
    build_dictionary, build_matrix, matrix_from_stream, split_dataset, Batch, BatchExporter, BatchSpec, DatasetManifest,
    FeatureError, FormatError, KeyDictionary, KeyPolicy, ManifestEntry, MatrixCell, Split, SplitRatios, SseKeyMatrix,
};
pub use similarity::{compare, knn_classify, Metric, Mode, SimilarityScore};
pub use sse::{classify, SseTripleCategory, CATEGORY_COUNT};
pub use structure::{parse_pdb, ProteinStructure, Residue, ResidueId, SegmentId, SseAnnotation, SseKind};
pub use tsr::{enumerate_triangles, key_stream, KeyCount, KeyStream, KeyValue, TriangleRecord, TsrError};
