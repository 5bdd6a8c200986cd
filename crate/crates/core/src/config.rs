//! Discretization configuration: the amino-acid label map, the angle and
//! length bin tables and the label base. A config fully determines key values,
//! so every derived artifact is stamped with its [`ConfigHash`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::amino::AminoAcid;

/// Text of the built-in default config.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../config/default.toml");

pub const MIN_LABEL: u8 = 4;
pub const MAX_LABEL: u8 = 23;
const MAX_LABEL_BASE: u64 = 64;
const MAX_BIN_PRODUCT: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown amino acid code {0:?} in label map")]
    UnknownCode(String),
    #[error("label map has no entry for {0}")]
    MissingAminoAcid(AminoAcid),
    #[error("label {label} for {aa} is outside [{MIN_LABEL}, {MAX_LABEL}]")]
    LabelOutOfRange { aa: AminoAcid, label: u8 },
    #[error("label {0} is assigned to more than one amino acid")]
    DuplicateLabel(u8),
    #[error("label base {base} must be in [{max_label}, {MAX_LABEL_BASE}] so that every digit (label - 1) is below it")]
    BadLabelBase { base: u64, max_label: u8 },
    #[error("{table} boundaries must be strictly increasing")]
    NotIncreasing { table: &'static str },
    #[error("{table}: {bins} bins need {expected} boundaries, got {got}")]
    BinCountMismatch { table: &'static str, bins: u64, expected: usize, got: usize },
    #[error("{table} boundary {value} outside {range}")]
    BoundaryOutOfRange { table: &'static str, value: f64, range: &'static str },
    #[error("theta_bins * dist_bins = {0} exceeds {MAX_BIN_PRODUCT}")]
    TooManyBins(u64),
    #[error("degeneracy epsilon must be finite and non-negative, got {0}")]
    BadEpsilon(f64),
}

/// SHA-256 over the canonical encoding of a [`DiscretizationConfig`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ConfigHash(pub [u8; 32]);

impl ConfigHash {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let bytes = hex::decode(s).ok()?;
        Some(Self(bytes.try_into().ok()?))
    }
}

impl fmt::Display for ConfigHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for ConfigHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConfigHash({})", &self.to_hex()[..12])
    }
}

/// Bijection from the twenty standard amino acids onto distinct integers in
/// `[4, 23]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AminoAcidLabelMap([u8; 20]);

impl AminoAcidLabelMap {
    pub fn new(entries: impl IntoIterator<Item = (AminoAcid, u8)>) -> Result<Self, ConfigError> {
        let mut slots = [0u8; 20];
        for (aa, label) in entries {
            if !(MIN_LABEL..=MAX_LABEL).contains(&label) {
                return Err(ConfigError::LabelOutOfRange { aa, label });
            }
            slots[aa as usize] = label;
        }
        let mut used = [false; 24];
        for (aa, &label) in AminoAcid::ALL.iter().zip(&slots) {
            if label == 0 {
                return Err(ConfigError::MissingAminoAcid(*aa));
            }
            if std::mem::replace(&mut used[label as usize], true) {
                return Err(ConfigError::DuplicateLabel(label));
            }
        }
        Ok(Self(slots))
    }

    /// ALA → 4, ARG → 5, ..., VAL → 23.
    pub fn alphabetical() -> Self {
        Self(std::array::from_fn(|i| MIN_LABEL + i as u8))
    }

    pub fn label(&self, aa: AminoAcid) -> u8 {
        self.0[aa as usize]
    }

    pub fn max_label(&self) -> u8 {
        self.0.iter().copied().max().unwrap_or(MAX_LABEL)
    }

    pub fn iter(&self) -> impl Iterator<Item = (AminoAcid, u8)> + '_ {
        AminoAcid::ALL.iter().map(|&aa| (aa, self.label(aa)))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    version: String,
    label_base: u64,
    degeneracy_epsilon: f64,
    theta_bins: u64,
    theta_boundaries: Vec<f64>,
    dist_bins: u64,
    dist_boundaries: Vec<f64>,
    labels: BTreeMap<String, u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationConfig {
    version: String,
    labels: AminoAcidLabelMap,
    label_base: u64,
    theta_boundaries: Vec<f64>,
    dist_boundaries: Vec<f64>,
    degeneracy_epsilon: f64,
    hash: ConfigHash,
}

impl DiscretizationConfig {
    /// Bin counts are implied by the boundary tables: `n` boundaries give
    /// `n + 1` bins.
    pub fn new(
        version: impl Into<String>,
        labels: AminoAcidLabelMap,
        label_base: u64,
        theta_boundaries: Vec<f64>,
        dist_boundaries: Vec<f64>,
        degeneracy_epsilon: f64,
    ) -> Result<Self, ConfigError> {
        let max_label = labels.max_label();
        if label_base < u64::from(max_label) || label_base > MAX_LABEL_BASE {
            return Err(ConfigError::BadLabelBase { base: label_base, max_label });
        }
        check_table("theta", &theta_boundaries, |v| v > 0.0 && v < 90.0, "(0, 90) degrees")?;
        check_table("dist", &dist_boundaries, |v| v > 0.0 && v.is_finite(), "(0, inf) Angstrom")?;
        let product = (theta_boundaries.len() as u64 + 1) * (dist_boundaries.len() as u64 + 1);
        if product > MAX_BIN_PRODUCT {
            return Err(ConfigError::TooManyBins(product));
        }
        if !(degeneracy_epsilon.is_finite() && degeneracy_epsilon >= 0.0) {
            return Err(ConfigError::BadEpsilon(degeneracy_epsilon));
        }
        let mut cfg = Self {
            version: version.into(),
            labels,
            label_base,
            theta_boundaries,
            dist_boundaries,
            degeneracy_epsilon,
            hash: ConfigHash::default(),
        };
        cfg.hash = cfg.compute_hash();
        Ok(cfg)
    }

    /// The built-in config: alphabetical labels, m = 23, 29 angle bins and
    /// 35 length bins.
    pub fn default_config() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG_TOML).expect("built-in config is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text)?;
        let mut entries = Vec::with_capacity(file.labels.len());
        for (code, label) in &file.labels {
            let aa = AminoAcid::from_code(code).ok_or_else(|| ConfigError::UnknownCode(code.clone()))?;
            entries.push((aa, *label));
        }
        let labels = AminoAcidLabelMap::new(entries)?;
        for (table, bins, bounds) in [
            ("theta", file.theta_bins, &file.theta_boundaries),
            ("dist", file.dist_bins, &file.dist_boundaries),
        ] {
            let expected = bins.saturating_sub(1) as usize;
            if bins == 0 || bounds.len() != expected {
                return Err(ConfigError::BinCountMismatch { table, bins, expected, got: bounds.len() });
            }
        }
        Self::new(
            file.version,
            labels,
            file.label_base,
            file.theta_boundaries,
            file.dist_boundaries,
            file.degeneracy_epsilon,
        )
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        let file = ConfigFile {
            version: self.version.clone(),
            label_base: self.label_base,
            degeneracy_epsilon: self.degeneracy_epsilon,
            theta_bins: self.theta_bins(),
            theta_boundaries: self.theta_boundaries.clone(),
            dist_bins: self.dist_bins(),
            dist_boundaries: self.dist_boundaries.clone(),
            labels: self.labels.iter().map(|(aa, l)| (aa.code().to_string(), l)).collect(),
        };
        toml::to_string(&file).expect("config serializes")
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn labels(&self) -> &AminoAcidLabelMap {
        &self.labels
    }

    /// m in the key formula.
    pub fn label_base(&self) -> u64 {
        self.label_base
    }

    pub fn theta_bins(&self) -> u64 {
        self.theta_boundaries.len() as u64 + 1
    }

    pub fn dist_bins(&self) -> u64 {
        self.dist_boundaries.len() as u64 + 1
    }

    pub fn theta_boundaries(&self) -> &[f64] {
        &self.theta_boundaries
    }

    pub fn dist_boundaries(&self) -> &[f64] {
        &self.dist_boundaries
    }

    pub fn degeneracy_epsilon(&self) -> f64 {
        self.degeneracy_epsilon
    }

    pub fn hash(&self) -> ConfigHash {
        self.hash
    }

    /// Exclusive upper bound on key values: θT · dT · m³.
    pub fn key_space(&self) -> u64 {
        self.theta_bins() * self.dist_bins() * self.label_base.pow(3)
    }

    fn compute_hash(&self) -> ConfigHash {
        let mut h = Sha256::new();
        h.update(b"tsr-config\0");
        h.update((self.version.len() as u64).to_le_bytes());
        h.update(self.version.as_bytes());
        h.update(self.label_base.to_le_bytes());
        h.update(self.degeneracy_epsilon.to_bits().to_le_bytes());
        for table in [&self.theta_boundaries, &self.dist_boundaries] {
            h.update((table.len() as u64).to_le_bytes());
            for v in table.iter() {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        for (_, label) in self.labels.iter() {
            h.update([label]);
        }
        ConfigHash(h.finalize().into())
    }
}

fn check_table(
    table: &'static str,
    bounds: &[f64],
    valid: impl Fn(f64) -> bool,
    range: &'static str,
) -> Result<(), ConfigError> {
    if let Some(&value) = bounds.iter().find(|&&v| !valid(v)) {
        return Err(ConfigError::BoundaryOutOfRange { table, value, range });
    }
    if bounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::NotIncreasing { table });
    }
    Ok(())
}
