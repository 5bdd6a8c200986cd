//! Alignment-free comparison of proteins by shared keys and a k-nearest
//! neighbor baseline over it.
//!
//! In [`Mode::Tsr`] a key's identity is the dictionary column alone and
//! counts are summed over the 18 categories; in [`Mode::SseTsr`] the identity
//! is the (row, column) pair.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::ConfigHash;
use crate::features::SseKeyMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Tsr,
    SseTsr,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Tsr => "tsr",
            Mode::SseTsr => "sse-tsr",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsr" => Ok(Mode::Tsr),
            "sse-tsr" => Ok(Mode::SseTsr),
            other => Err(SimilarityError::UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Jaccard,
    Cosine,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Jaccard => "jaccard",
            Metric::Cosine => "cosine",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jaccard" => Ok(Metric::Jaccard),
            "cosine" => Ok(Metric::Cosine),
            other => Err(SimilarityError::UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimilarityError {
    #[error("matrices come from different dictionaries ({a_columns} vs {b_columns} columns, config {a_hash} vs {b_hash})")]
    DictionaryMismatch { a_columns: u64, b_columns: u64, a_hash: ConfigHash, b_hash: ConfigHash },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("reference set is empty")]
    NoReferences,
    #[error("unknown mode or metric {0:?}")]
    UnknownName(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityScore {
    pub common_keys: u64,
    pub jaccard: f64,
    pub cosine: f64,
    pub mode: Mode,
}

impl SimilarityScore {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Jaccard => self.jaccard,
            Metric::Cosine => self.cosine,
        }
    }
}

/// Sorted (identity, count) pairs for the chosen mode.
fn vector(m: &SseKeyMatrix, mode: Mode) -> Vec<(u64, u64)> {
    match mode {
        Mode::Tsr => m.collapsed(),
        // Cells are sorted by (row, column), so row * K + column is ascending.
        Mode::SseTsr => m
            .cells()
            .iter()
            .map(|c| (u64::from(c.row) * m.columns() + c.column, u64::from(c.count)))
            .collect(),
    }
}

fn check_compatible(a: &SseKeyMatrix, b: &SseKeyMatrix) -> Result<(), SimilarityError> {
    if a.columns() != b.columns() || a.config_hash() != b.config_hash() {
        return Err(SimilarityError::DictionaryMismatch {
            a_columns: a.columns(),
            b_columns: b.columns(),
            a_hash: a.config_hash(),
            b_hash: b.config_hash(),
        });
    }
    Ok(())
}

fn score(va: &[(u64, u64)], vb: &[(u64, u64)], mode: Mode) -> SimilarityScore {
    let (mut i, mut j) = (0, 0);
    let mut common = 0u64;
    let mut dot = 0u128;
    while i < va.len() && j < vb.len() {
        match va[i].0.cmp(&vb[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                common += 1;
                dot += u128::from(va[i].1) * u128::from(vb[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    let union = (va.len() + vb.len()) as u64 - common;
    let jaccard = if union == 0 { 1.0 } else { common as f64 / union as f64 };
    let norm = |v: &[(u64, u64)]| v.iter().map(|&(_, c)| u128::from(c) * u128::from(c)).sum::<u128>() as f64;
    let (na, nb) = (norm(va), norm(vb));
    let cosine = if na == 0.0 || nb == 0.0 {
        0.0
    } else if va == vb {
        1.0
    } else {
        (dot as f64 / (na.sqrt() * nb.sqrt())).min(1.0)
    };
    SimilarityScore { common_keys: common, jaccard, cosine, mode }
}

/// Symmetric similarity of two matrices built against the same dictionary.
pub fn compare(a: &SseKeyMatrix, b: &SseKeyMatrix, mode: Mode) -> Result<SimilarityScore, SimilarityError> {
    check_compatible(a, b)?;
    Ok(score(&vector(a, mode), &vector(b, mode), mode))
}

/// One row of an all-vs-all report.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub id_a: String,
    pub id_b: String,
    pub score: SimilarityScore,
}

/// Every unordered pair (i < j) in input order, computed in parallel.
pub fn all_pairs(matrices: &[SseKeyMatrix], mode: Mode) -> Result<Vec<PairScore>, SimilarityError> {
    if let Some(first) = matrices.first() {
        for m in &matrices[1..] {
            check_compatible(first, m)?;
        }
    }
    let vectors: Vec<_> = matrices.par_iter().map(|m| vector(m, mode)).collect();
    let pairs: Vec<(usize, usize)> =
        (0..matrices.len()).flat_map(|i| (i + 1..matrices.len()).map(move |j| (i, j))).collect();
    Ok(pairs
        .par_iter()
        .map(|&(i, j)| PairScore {
            id_a: matrices[i].protein_id().to_string(),
            id_b: matrices[j].protein_id().to_string(),
            score: score(&vectors[i], &vectors[j], mode),
        })
        .collect())
}

/// `idA,idB,mode,commonKeyCount,jaccard,cosine` with a header row.
pub fn report_csv(pairs: &[PairScore]) -> String {
    let mut out = String::from("idA,idB,mode,commonKeyCount,jaccard,cosine\n");
    for p in pairs {
        out.push_str(&format!(
            "{},{},{},{},{:.12},{:.12}\n",
            p.id_a, p.id_b, p.score.mode, p.score.common_keys, p.score.jaccard, p.score.cosine
        ));
    }
    out
}

/// A labeled matrix the classifier votes with.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub label: String,
    pub matrix: SseKeyMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub protein_id: String,
    pub label: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnPrediction {
    pub label: String,
    pub neighbors: Vec<Neighbor>,
}

/// Majority vote among the `k` most similar references (ties in similarity
/// go to the smaller protein id). Vote ties go to the higher summed
/// similarity, then to the lexicographically smaller label.
pub fn knn_classify(
    query: &SseKeyMatrix,
    references: &[Reference],
    k: usize,
    mode: Mode,
    metric: Metric,
) -> Result<KnnPrediction, SimilarityError> {
    if k == 0 {
        return Err(SimilarityError::ZeroK);
    }
    if references.is_empty() {
        return Err(SimilarityError::NoReferences);
    }
    let qv = vector(query, mode);
    let mut scored = references
        .iter()
        .map(|r| {
            check_compatible(query, &r.matrix)?;
            Ok(Neighbor {
                protein_id: r.matrix.protein_id().to_string(),
                label: r.label.clone(),
                similarity: score(&qv, &vector(&r.matrix, mode), mode).value(metric),
            })
        })
        .collect::<Result<Vec<_>, SimilarityError>>()?;
    scored.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.protein_id.cmp(&b.protein_id)));
    scored.truncate(k);

    let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for n in &scored {
        let v = votes.entry(&n.label).or_default();
        v.0 += 1;
        v.1 += n.similarity;
    }
    // BTreeMap iterates labels ascending, so keeping the first maximum
    // resolves the final tie lexicographically.
    let mut best: Option<(&str, usize, f64)> = None;
    for (&label, &(count, sum)) in &votes {
        let better = match best {
            None => true,
            Some((_, bc, bs)) => count > bc || (count == bc && sum > bs),
        };
        if better {
            best = Some((label, count, sum));
        }
    }
    let label = best.expect("k >= 1 and references nonempty").0.to_string();
    Ok(KnnPrediction { label, neighbors: scored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::MatrixCell;

    fn matrix(id: &str, columns: u64, cells: &[(u8, u64, u32)]) -> SseKeyMatrix {
        let mut cells: Vec<MatrixCell> =
            cells.iter().map(|&(row, column, count)| MatrixCell { row, column, count }).collect();
        cells.sort_by_key(|c| (c.row, c.column));
        SseKeyMatrix::new(id, columns, cells, 0, ConfigHash::default()).unwrap()
    }

    #[test]
    fn set_arithmetic() {
        let a = matrix("a", 5, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]);
        let b = matrix("b", 5, &[(0, 2, 1), (0, 3, 1), (0, 4, 1)]);
        let s = compare(&a, &b, Mode::Tsr).unwrap();
        assert_eq!(s.common_keys, 2);
        assert_eq!(s.jaccard, 0.5);
        assert!((s.cosine - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_both_modes() {
        let a = matrix("a", 4, &[(0, 1, 3), (5, 1, 2), (17, 3, 1)]);
        for mode in [Mode::Tsr, Mode::SseTsr] {
            let s = compare(&a, &a, mode).unwrap();
            assert_eq!((s.jaccard, s.cosine), (1.0, 1.0));
        }
    }

    #[test]
    fn row_placement_matters_only_in_sse_mode() {
        let a = matrix("a", 3, &[(0, 0, 2), (1, 1, 1)]);
        let b = matrix("b", 3, &[(2, 0, 2), (3, 1, 1)]);
        assert_eq!(compare(&a, &b, Mode::Tsr).unwrap().jaccard, 1.0);
        let s = compare(&a, &b, Mode::SseTsr).unwrap();
        assert_eq!((s.common_keys, s.jaccard, s.cosine), (0, 0.0, 0.0));
    }

    #[test]
    fn empty_matrices() {
        let e = matrix("e", 3, &[]);
        let a = matrix("a", 3, &[(0, 0, 1)]);
        let s = compare(&e, &e, Mode::Tsr).unwrap();
        assert_eq!((s.jaccard, s.cosine), (1.0, 0.0));
        let s = compare(&e, &a, Mode::SseTsr).unwrap();
        assert_eq!((s.jaccard, s.cosine), (0.0, 0.0));
    }

    #[test]
    fn mismatch_rejected() {
        let a = matrix("a", 3, &[]);
        let b = matrix("b", 4, &[]);
        assert!(matches!(compare(&a, &b, Mode::Tsr), Err(SimilarityError::DictionaryMismatch { .. })));
    }

    #[test]
    fn knn_exact_match_and_ties() {
        let refs = vec![
            Reference { label: "x".into(), matrix: matrix("r1", 4, &[(0, 0, 1), (0, 1, 1)]) },
            Reference { label: "y".into(), matrix: matrix("r2", 4, &[(0, 2, 1), (0, 3, 1)]) },
        ];
        let q = matrix("q", 4, &[(0, 2, 1), (0, 3, 1)]);
        let p = knn_classify(&q, &refs, 1, Mode::Tsr, Metric::Jaccard).unwrap();
        assert_eq!(p.label, "y");
        // One vote each, "y" has the larger summed similarity.
        let p = knn_classify(&q, &refs, 2, Mode::Tsr, Metric::Cosine).unwrap();
        assert_eq!(p.label, "y");
        // Empty query: everything scores 0, the label tie goes to "x".
        let e = matrix("q", 4, &[]);
        assert_eq!(knn_classify(&e, &refs, 2, Mode::Tsr, Metric::Jaccard).unwrap().label, "x");
        assert!(matches!(knn_classify(&q, &refs, 0, Mode::Tsr, Metric::Jaccard), Err(SimilarityError::ZeroK)));
    }

    #[test]
    fn report_format() {
        let a = matrix("a", 2, &[(0, 0, 1)]);
        let b = matrix("b", 2, &[(0, 0, 1), (0, 1, 1)]);
        let pairs = all_pairs(&[a, b], Mode::Tsr).unwrap();
        assert_eq!(pairs.len(), 1);
        let csv = report_csv(&pairs);
        assert!(csv.starts_with("idA,idB,mode,commonKeyCount,jaccard,cosine\na,b,tsr,1,0.500000000000,"));
    }

    #[test]
    fn names_parse() {
        assert_eq!("sse-tsr".parse::<Mode>().unwrap(), Mode::SseTsr);
        assert_eq!("cosine".parse::<Metric>().unwrap(), Metric::Cosine);
        assert!("x".parse::<Metric>().is_err());
    }
}
