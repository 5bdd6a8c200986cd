//! Stratified train/validation/test assignment and the dataset manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::format::deserialize_matrix;
use super::FeatureError;
use crate::config::ConfigHash;

pub const MANIFEST_FORMAT: &str = "tsr-manifest-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(FeatureError::Invalid(format!("unknown split {other:?}"))),
        }
    }
}

/// Fractions for (train, validation); test takes the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.8, validation: 0.1, test: 0.1 }
    }
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self, FeatureError> {
        let all = [train, validation, test];
        if all.iter().any(|r| !(0.0..=1.0).contains(r)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(FeatureError::BadRatios(all));
        }
        Ok(Self { train, validation, test })
    }

    /// (train, validation, test) sample counts for a class of size `n`:
    /// floors for the first two, remainder to test. When the two discarded
    /// fractions add up to more than one sample, the remainder would overshoot
    /// its share by more than one, so one sample goes back to whichever of
    /// train and validation lost the larger fraction.
    pub fn counts(&self, n: usize) -> (usize, usize, usize) {
        // The small offset keeps products like 0.1 * 30 from flooring to 2.
        let exact = |r: f64| r * n as f64;
        let floor = |r: f64| (exact(r) + 1e-9).floor() as usize;
        let mut train = floor(self.train).min(n);
        let mut validation = floor(self.validation).min(n - train);
        let test = n - train - validation;
        if test as f64 - exact(self.test) > 1.0 + 1e-9 {
            if exact(self.train) - train as f64 >= exact(self.validation) - validation as f64 {
                train += 1;
            } else {
                validation += 1;
            }
        }
        (train, validation, n - train - validation)
    }
}

/// A labeled protein before split assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMatrix {
    pub protein_id: String,
    pub class_label: String,
    /// Matrix file path, relative to the manifest directory.
    pub matrix_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub protein_id: String,
    pub label: String,
    pub split: Split,
    pub path: String,
}

/// The structured header written next to the manifest CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub format: String,
    pub seed: u64,
    pub ratios: SplitRatios,
    pub config_hash: String,
    pub dictionary: String,
    pub labels: Vec<String>,
    pub split_sizes: BTreeMap<Split, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    labels: Vec<String>,
    seed: u64,
    ratios: SplitRatios,
    config_hash: ConfigHash,
    dictionary_path: String,
}

/// Assigns each protein to a split, stratified by class: every class is
/// shuffled with the seeded generator and cut at [`SplitRatios::counts`].
pub fn split_dataset(
    items: Vec<LabeledMatrix>,
    ratios: SplitRatios,
    seed: u64,
    config_hash: ConfigHash,
    dictionary_path: impl Into<String>,
) -> Result<DatasetManifest, FeatureError> {
    let mut by_class: BTreeMap<String, Vec<LabeledMatrix>> = BTreeMap::new();
    let mut ids = BTreeSet::new();
    for item in items {
        if !ids.insert(item.protein_id.clone()) {
            return Err(FeatureError::DuplicateProtein(item.protein_id));
        }
        by_class.entry(item.class_label.clone()).or_default().push(item);
    }
    if by_class.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }

    let labels: Vec<String> = by_class.keys().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(ids.len());
    for (label, mut members) in by_class {
        if members.len() < 3 {
            return Err(FeatureError::ClassTooSmall { label, size: members.len() });
        }
        members.sort_by(|a, b| a.protein_id.cmp(&b.protein_id));
        members.shuffle(&mut rng);
        let (train, validation, _) = ratios.counts(members.len());
        for (i, m) in members.into_iter().enumerate() {
            let split = if i < train {
                Split::Train
            } else if i < train + validation {
                Split::Validation
            } else {
                Split::Test
            };
            entries.push(ManifestEntry { protein_id: m.protein_id, label: m.class_label, split, path: m.matrix_path });
        }
    }
    entries.sort_by(|a, b| a.protein_id.cmp(&b.protein_id));
    Ok(DatasetManifest {
        entries,
        labels,
        seed,
        ratios,
        config_hash,
        dictionary_path: dictionary_path.into(),
    })
}

impl DatasetManifest {
    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Class vocabulary, sorted; one-hot positions follow this order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ratios(&self) -> SplitRatios {
        self.ratios
    }

    pub fn config_hash(&self) -> ConfigHash {
        self.config_hash
    }

    pub fn dictionary_path(&self) -> &str {
        &self.dictionary_path
    }

    pub fn header(&self) -> ManifestHeader {
        let mut split_sizes: BTreeMap<Split, usize> = Split::ALL.iter().map(|s| (*s, 0)).collect();
        for e in &self.entries {
            *split_sizes.get_mut(&e.split).unwrap() += 1;
        }
        ManifestHeader {
            format: MANIFEST_FORMAT.into(),
            seed: self.seed,
            ratios: self.ratios,
            config_hash: self.config_hash.to_hex(),
            dictionary: self.dictionary_path.clone(),
            labels: self.labels.clone(),
            split_sizes,
        }
    }

    /// `protein_id,label,split,path` rows in protein-id order.
    pub fn to_csv(&self) -> Result<String, FeatureError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(e)?;
        }
        let bytes = w.into_inner().map_err(|e| FeatureError::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn header_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.header()).expect("header serializes");
        s.push('\n');
        s
    }

    pub fn from_parts(csv_text: &str, header_json: &str) -> Result<Self, FeatureError> {
        let header: ManifestHeader = serde_json::from_str(header_json)?;
        if header.format != MANIFEST_FORMAT {
            return Err(FeatureError::Invalid(format!("manifest format {:?}", header.format)));
        }
        let config_hash = ConfigHash::from_hex(&header.config_hash)
            .ok_or_else(|| FeatureError::Invalid("bad config hash in manifest header".into()))?;
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let entries = reader.deserialize().collect::<Result<Vec<ManifestEntry>, _>>()?;
        if let Some(e) = entries.iter().find(|e| !header.labels.contains(&e.label)) {
            return Err(FeatureError::Invalid(format!("label {:?} not in vocabulary", e.label)));
        }
        Ok(Self {
            entries,
            labels: header.labels,
            seed: header.seed,
            ratios: header.ratios,
            config_hash,
            dictionary_path: header.dictionary,
        })
    }

    /// Checks that every matrix file exists, decodes, and carries the
    /// manifest's config hash. Paths resolve against `root`.
    pub fn validate(&self, root: &Path) -> Result<(), FeatureError> {
        for e in &self.entries {
            let bytes = std::fs::read(root.join(&e.path))?;
            let m = deserialize_matrix(&bytes)?;
            if m.config_hash() != self.config_hash {
                return Err(FeatureError::ConfigMismatch {
                    expected: self.config_hash,
                    found: m.config_hash(),
                    context: e.path.clone(),
                });
            }
        }
        Ok(())
    }
}
