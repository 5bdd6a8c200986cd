use rayon::prelude::*;

use super::FeatureError;
use crate::config::ConfigHash;
use crate::tsr::{KeyStream, KeyValue};

/// Sorted union of every key seen in a corpus; position = matrix column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyDictionary {
    keys: Vec<KeyValue>,
    config_hash: ConfigHash,
}

impl KeyDictionary {
    pub fn from_sorted(keys: Vec<KeyValue>, config_hash: ConfigHash) -> Result<Self, FeatureError> {
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FeatureError::Invalid("dictionary keys must be strictly ascending".into()));
        }
        Ok(Self { keys, config_hash })
    }

    pub fn keys(&self) -> &[KeyValue] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn config_hash(&self) -> ConfigHash {
        self.config_hash
    }

    pub fn column(&self, key: KeyValue) -> Option<u64> {
        self.keys.binary_search(&key).ok().map(|i| i as u64)
    }
}

fn merge_sorted(a: Vec<KeyValue>, b: Vec<KeyValue>) -> Vec<KeyValue> {
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Unions the distinct keys of every stream. All streams must share one
/// config hash; the result does not depend on stream order.
pub fn build_dictionary(streams: &[KeyStream]) -> Result<KeyDictionary, FeatureError> {
    let first = streams.first().ok_or(FeatureError::EmptyCorpus)?;
    let hash = first.config_hash;
    if let Some(bad) = streams.iter().find(|s| s.config_hash != hash) {
        return Err(FeatureError::ConfigMismatch {
            expected: hash,
            found: bad.config_hash,
            context: bad.protein_id.clone(),
        });
    }
    let keys = streams
        .par_iter()
        .map(|s| s.distinct_keys())
        .reduce(Vec::new, merge_sorted);
    Ok(KeyDictionary { keys, config_hash: hash })
}
