use std::collections::BTreeMap;

use super::dictionary::KeyDictionary;
use super::FeatureError;
use crate::config::ConfigHash;
use crate::sse::{SseTripleCategory, CATEGORY_COUNT};
use crate::tsr::{KeyStream, KeyValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatrixCell {
    pub row: u8,
    pub column: u64,
    pub count: u32,
}

/// How [`build_matrix`] treats keys absent from the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyPolicy {
    /// Unknown keys are an error (the dictionary was built from this corpus).
    Training,
    /// Unknown keys are dropped and counted.
    Inference,
}

/// 18 × K sparse count matrix of one protein: rows are SSE-triple
/// categories, columns are dictionary keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SseKeyMatrix {
    protein_id: String,
    columns: u64,
    cells: Vec<MatrixCell>,
    degenerate_skipped: u64,
    config_hash: ConfigHash,
}

impl SseKeyMatrix {
    /// `cells` must be sorted by (row, column) without duplicates, with
    /// positive counts and in-range indices.
    pub fn new(
        protein_id: impl Into<String>,
        columns: u64,
        cells: Vec<MatrixCell>,
        degenerate_skipped: u64,
        config_hash: ConfigHash,
    ) -> Result<Self, FeatureError> {
        for c in &cells {
            if c.row as usize >= CATEGORY_COUNT || c.column >= columns || c.count == 0 {
                return Err(FeatureError::Invalid(format!(
                    "cell (row {}, column {}, count {}) invalid for {columns} columns",
                    c.row, c.column, c.count
                )));
            }
        }
        if cells.windows(2).any(|w| (w[0].row, w[0].column) >= (w[1].row, w[1].column)) {
            return Err(FeatureError::Invalid("cells must be strictly sorted by (row, column)".into()));
        }
        Ok(Self { protein_id: protein_id.into(), columns, cells, degenerate_skipped, config_hash })
    }

    pub fn protein_id(&self) -> &str {
        &self.protein_id
    }

    pub fn columns(&self) -> u64 {
        self.columns
    }

    pub fn cells(&self) -> &[MatrixCell] {
        &self.cells
    }

    pub fn nnz(&self) -> usize {
        self.cells.len()
    }

    pub fn degenerate_skipped(&self) -> u64 {
        self.degenerate_skipped
    }

    pub fn config_hash(&self) -> ConfigHash {
        self.config_hash
    }

    pub fn total_count(&self) -> u64 {
        self.cells.iter().map(|c| u64::from(c.count)).sum()
    }

    pub fn get(&self, row: usize, column: u64) -> u32 {
        self.cells
            .binary_search_by(|c| (c.row as usize, c.column).cmp(&(row, column)))
            .map(|i| self.cells[i].count)
            .unwrap_or(0)
    }

    /// Fraction of the 18 × K cells that are non-zero.
    pub fn density(&self) -> f64 {
        if self.columns == 0 {
            0.0
        } else {
            self.cells.len() as f64 / (CATEGORY_COUNT as f64 * self.columns as f64)
        }
    }

    pub fn row_totals(&self) -> [u64; CATEGORY_COUNT] {
        let mut totals = [0u64; CATEGORY_COUNT];
        for c in &self.cells {
            totals[c.row as usize] += u64::from(c.count);
        }
        totals
    }

    /// Counts summed over the 18 categories: (column, count), ascending.
    pub fn collapsed(&self) -> Vec<(u64, u64)> {
        let mut pairs: Vec<(u64, u64)> = self.cells.iter().map(|c| (c.column, u64::from(c.count))).collect();
        pairs.sort_unstable_by_key(|&(column, _)| column);
        pairs.dedup_by(|next, kept| {
            let same = next.0 == kept.0;
            if same {
                kept.1 += next.1;
            }
            same
        });
        pairs
    }

    /// Writes the dense row-major 18 × K image into `out`, which must hold
    /// exactly `18 * columns` floats.
    pub fn write_dense(&self, out: &mut [f32]) {
        assert_eq!(out.len() as u64, CATEGORY_COUNT as u64 * self.columns);
        out.fill(0.0);
        for c in &self.cells {
            out[c.row as usize * self.columns as usize + c.column as usize] = c.count as f32;
        }
    }

    pub fn to_dense(&self) -> Vec<f32> {
        let mut out = vec![0.0; CATEGORY_COUNT * self.columns as usize];
        self.write_dense(&mut out);
        out
    }
}

/// Matrix plus the number of occurrences whose key was not in the dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltMatrix {
    pub matrix: SseKeyMatrix,
    pub dropped_unknown: u64,
}

/// Counts `(key, category, count)` occurrences into matrix cells.
pub fn build_matrix<I>(
    protein_id: &str,
    degenerate_skipped: u64,
    config_hash: ConfigHash,
    occurrences: I,
    dict: &KeyDictionary,
    policy: KeyPolicy,
) -> Result<BuiltMatrix, FeatureError>
where
    I: IntoIterator<Item = (KeyValue, SseTripleCategory, u32)>,
{
    if config_hash != dict.config_hash() {
        return Err(FeatureError::ConfigMismatch {
            expected: dict.config_hash(),
            found: config_hash,
            context: protein_id.to_string(),
        });
    }
    let mut cells: BTreeMap<(u8, u64), u64> = BTreeMap::new();
    let mut dropped = 0u64;
    for (key, category, count) in occurrences {
        match dict.column(key) {
            Some(col) => *cells.entry((category.row_index() as u8, col)).or_default() += u64::from(count),
            None => match policy {
                KeyPolicy::Training => return Err(FeatureError::UnknownKey(key.0)),
                KeyPolicy::Inference => dropped += u64::from(count),
            },
        }
    }
    let cells = cells
        .into_iter()
        .map(|((row, column), count)| {
            let count = u32::try_from(count).map_err(|_| FeatureError::CountOverflow { row, column })?;
            Ok(MatrixCell { row, column, count })
        })
        .collect::<Result<Vec<_>, FeatureError>>()?;
    let matrix = SseKeyMatrix::new(protein_id, dict.len() as u64, cells, degenerate_skipped, config_hash)?;
    Ok(BuiltMatrix { matrix, dropped_unknown: dropped })
}

/// [`build_matrix`] over a protein's aggregated key stream.
pub fn matrix_from_stream(stream: &KeyStream, dict: &KeyDictionary, policy: KeyPolicy) -> Result<BuiltMatrix, FeatureError> {
    build_matrix(
        &stream.protein_id,
        stream.degenerate_skipped,
        stream.config_hash,
        stream.entries.iter().map(|e| (e.key, e.category, e.count)),
        dict,
        policy,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict(keys: &[u64]) -> KeyDictionary {
        KeyDictionary::from_sorted(keys.iter().map(|&k| KeyValue(k)).collect(), ConfigHash::default()).unwrap()
    }

    #[test]
    fn counts_land_in_category_rows() {
        let d = dict(&[7, 9]);
        let occ = [7, 7, 9, 9].map(|k| (KeyValue(k), SseTripleCategory::Coil3, 1));
        let built = build_matrix("p", 0, ConfigHash::default(), occ, &d, KeyPolicy::Training).unwrap();
        let m = built.matrix;
        assert_eq!(
            m.cells(),
            &[MatrixCell { row: 2, column: 0, count: 2 }, MatrixCell { row: 2, column: 1, count: 2 }]
        );
        assert_eq!(m.total_count(), 4);
        assert_eq!(m.get(2, 1), 2);
        assert_eq!(m.get(0, 1), 0);
        assert_eq!(m.collapsed(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn all_degenerate_gives_empty_matrix() {
        let built = build_matrix("p", 4, ConfigHash::default(), [], &dict(&[1]), KeyPolicy::Training).unwrap();
        assert_eq!(built.matrix.nnz(), 0);
        assert_eq!(built.matrix.degenerate_skipped(), 4);
    }

    #[test]
    fn unknown_keys_by_policy() {
        let d = dict(&[1]);
        let occ = [(KeyValue(1), SseTripleCategory::SameHelix3, 1), (KeyValue(5), SseTripleCategory::SameHelix3, 3)];
        let err = build_matrix("p", 0, ConfigHash::default(), occ, &d, KeyPolicy::Training).unwrap_err();
        assert!(matches!(err, FeatureError::UnknownKey(5)));
        let built = build_matrix("p", 0, ConfigHash::default(), occ, &d, KeyPolicy::Inference).unwrap();
        assert_eq!(built.dropped_unknown, 3);
        assert_eq!(built.matrix.total_count(), 1);
    }

    #[test]
    fn config_mismatch() {
        let err = build_matrix("p", 0, ConfigHash([1; 32]), [], &dict(&[1]), KeyPolicy::Training).unwrap_err();
        assert!(matches!(err, FeatureError::ConfigMismatch { .. }));
    }

    #[test]
    fn invalid_cells_rejected() {
        let h = ConfigHash::default();
        let cell = |row, column, count| MatrixCell { row, column, count };
        assert!(SseKeyMatrix::new("p", 2, vec![cell(18, 0, 1)], 0, h).is_err());
        assert!(SseKeyMatrix::new("p", 2, vec![cell(0, 2, 1)], 0, h).is_err());
        assert!(SseKeyMatrix::new("p", 2, vec![cell(0, 0, 0)], 0, h).is_err());
        assert!(SseKeyMatrix::new("p", 2, vec![cell(1, 0, 1), cell(0, 1, 1)], 0, h).is_err());
        assert!(SseKeyMatrix::new("p", 2, vec![cell(0, 1, 1), cell(0, 1, 1)], 0, h).is_err());
    }

    #[test]
    fn dense_image() {
        let m = SseKeyMatrix::new(
            "p",
            3,
            vec![MatrixCell { row: 1, column: 2, count: 5 }],
            0,
            ConfigHash::default(),
        )
        .unwrap();
        let dense = m.to_dense();
        assert_eq!(dense.len(), 54);
        assert_eq!(dense[3 + 2], 5.0);
        assert_eq!(dense.iter().sum::<f32>(), 5.0);
    }
}
