//! Triangle enumeration and key generation.
//!
//! For every unordered triple of Cα vertices, labels are ordered by the
//! amino-acid label map, the triangle geometry gives the folded angle θΔ and
//! the longest edge, both are binned, and the pieces are packed into one
//! integer key:
//!
//! ```text
//! K = θT·dT·(l1−1)·m² + θT·dT·(l2−1)·m + θT·dT·(l3−1) + θT·(d−1) + (θ−1)
//! ```
//!
//! The key is a mixed-radix number with digits `(l1−1, l2−1, l3−1)` in base
//! `m` followed by the bin pair in base `θT·dT`, so it is injective whenever
//! every label is at most `m`.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::amino::AminoAcid;
use crate::config::{AminoAcidLabelMap, ConfigHash, DiscretizationConfig};
use crate::sse::{classify, SseTripleCategory};
use crate::structure::ProteinStructure;

/// arccos arguments within this distance outside [-1, 1] are clamped;
/// anything further out is a logic error.
pub const ACOS_CLAMP_TOLERANCE: f64 = 1e-9;

/// Relative tolerance under which two centroid distances count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TsrError {
    #[error("degenerate triangle (d12 = {d12}, d3 = {d3}, height = {height})")]
    DegenerateTriangle { d12: f64, d3: f64, height: f64 },
    #[error("arccos argument {0} is outside [-1, 1] beyond tolerance")]
    NumericalDomain(f64),
    #[error("protein has {0} residues; at least 3 are needed")]
    TooFewResidues(usize),
    #[error("key {key} in category {category} occurs more than u32::MAX times")]
    CountOverflow { key: u64, category: SseTripleCategory },
}

/// The integer key of one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyValue(pub u64);

/// One vertex as seen by the labeling rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub aa: AminoAcid,
    pub position: [f64; 3],
    /// Residue position in file order; the last tie-breaker.
    pub index: usize,
}

/// Labels sorted so that `labels[0] >= labels[1] >= labels[2]`;
/// `order[i]` is the input slot that ended up in position `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelTriple {
    pub labels: [u8; 3],
    pub order: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    pub d12: f64,
    pub d13: f64,
    /// Distance from vertex 3 to the midpoint of edge 1–2.
    pub d3: f64,
    /// Longest of the three edges.
    pub max_dist: f64,
    /// Degrees.
    pub theta1: f64,
    /// θ₁ folded into (0°, 90°].
    pub theta_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscretizedTriangle {
    pub labels: [u8; 3],
    /// Length bin, 1-based.
    pub dist_bin: u64,
    /// Angle bin, 1-based.
    pub theta_bin: u64,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm(sub(a, b))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn cmp_tolerant(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Orders three vertices for keying: descending label, then descending
/// distance to the centroid, then ascending file index.
///
/// Vertices are first put in file order so that the centroid, and hence the
/// result, does not depend on how the caller listed them.
pub fn determine_labels(vertices: [Vertex; 3], map: &AminoAcidLabelMap) -> LabelTriple {
    let mut slots = [0usize, 1, 2];
    slots.sort_by_key(|&s| vertices[s].index);
    let p = |s: usize| vertices[s].position;
    let (a, b, c) = (p(slots[0]), p(slots[1]), p(slots[2]));
    let centroid = [
        (a[0] + b[0] + c[0]) / 3.0,
        (a[1] + b[1] + c[1]) / 3.0,
        (a[2] + b[2] + c[2]) / 3.0,
    ];
    let label = |s: usize| map.label(vertices[s].aa);
    let spread = |s: usize| distance(vertices[s].position, centroid);
    slots.sort_by(|&x, &y| {
        label(y)
            .cmp(&label(x))
            .then_with(|| cmp_tolerant(spread(y), spread(x)))
            .then_with(|| vertices[x].index.cmp(&vertices[y].index))
    });
    LabelTriple { labels: slots.map(label), order: slots }
}

/// Edge lengths and angles of a triangle whose vertices are already in label
/// order. `epsilon` is the degeneracy tolerance in Ångström.
///
/// Besides a vanishing base edge or median, collinear triples (height of
/// vertex 3 over edge 1–2 at most `epsilon`, or θΔ = 0) are rejected, since
/// θΔ must be strictly positive.
pub fn compute_geometry(ordered: [[f64; 3]; 3], epsilon: f64) -> Result<TriangleGeometry, TsrError> {
    let [v1, v2, v3] = ordered;
    let d12 = distance(v1, v2);
    let d13 = distance(v1, v3);
    let d23 = distance(v2, v3);
    let mid = [(v1[0] + v2[0]) / 2.0, (v1[1] + v2[1]) / 2.0, (v1[2] + v2[2]) / 2.0];
    let d3 = distance(v3, mid);
    let height = if d12 > 0.0 { norm(cross(sub(v2, v1), sub(v3, v1))) / d12 } else { 0.0 };
    if d12 <= epsilon || d3 <= epsilon || height <= epsilon {
        return Err(TsrError::DegenerateTriangle { d12, d3, height });
    }

    let half = d12 / 2.0;
    let arg = (d13 * d13 - half * half - d3 * d3) / (2.0 * half * d3);
    if arg.is_nan() || arg.abs() > 1.0 + ACOS_CLAMP_TOLERANCE {
        return Err(TsrError::NumericalDomain(arg));
    }
    let theta1 = arg.clamp(-1.0, 1.0).acos().to_degrees();
    let theta_delta = if theta1 <= 90.0 { theta1 } else { 180.0 - theta1 };
    if theta_delta <= 0.0 {
        return Err(TsrError::DegenerateTriangle { d12, d3, height });
    }
    Ok(TriangleGeometry {
        d12,
        d13,
        d3,
        max_dist: d12.max(d13).max(d23),
        theta1,
        theta_delta,
    })
}

/// 1 + number of boundaries strictly below `value`.
pub fn bin_index(value: f64, boundaries: &[f64]) -> u64 {
    boundaries.partition_point(|&b| b < value) as u64 + 1
}

/// Returns `(dist_bin, theta_bin)`.
pub fn discretize(geom: &TriangleGeometry, cfg: &DiscretizationConfig) -> (u64, u64) {
    (
        bin_index(geom.max_dist, cfg.dist_boundaries()),
        bin_index(geom.theta_delta, cfg.theta_boundaries()),
    )
}

pub fn compute_key(t: &DiscretizedTriangle, cfg: &DiscretizationConfig) -> KeyValue {
    let m = cfg.label_base();
    let tt = cfg.theta_bins();
    let dt = cfg.dist_bins();
    let [l1, l2, l3] = t.labels.map(u64::from);
    debug_assert!(l1 >= l2 && l2 >= l3 && l3 >= 1 && l1 <= m);
    debug_assert!((1..=dt).contains(&t.dist_bin) && (1..=tt).contains(&t.theta_bin));
    let labels = (l1 - 1) * m * m + (l2 - 1) * m + (l3 - 1);
    KeyValue(tt * dt * labels + tt * (t.dist_bin - 1) + (t.theta_bin - 1))
}

/// One emitted triangle. `vertices` are residue indices in label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriangleRecord {
    pub key: KeyValue,
    pub vertices: [usize; 3],
    pub category: SseTripleCategory,
}

/// Triangle totals for one protein. `emitted + skipped == total`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DegeneracyReport {
    pub total: u64,
    pub emitted: u64,
    pub skipped: u64,
}

impl DegeneracyReport {
    pub fn merge(self, other: Self) -> Self {
        Self {
            total: self.total + other.total,
            emitted: self.emitted + other.emitted,
            skipped: self.skipped + other.skipped,
        }
    }
}

/// C(n, 3).
pub fn triangle_count(n: usize) -> u64 {
    let n = n as u64;
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Keys and categories for each triple of one protein.
pub struct TriangleScanner<'a> {
    protein: &'a ProteinStructure,
    cfg: &'a DiscretizationConfig,
}

impl<'a> TriangleScanner<'a> {
    pub fn new(protein: &'a ProteinStructure, cfg: &'a DiscretizationConfig) -> Result<Self, TsrError> {
        if protein.len() < 3 {
            return Err(TsrError::TooFewResidues(protein.len()));
        }
        Ok(Self { protein, cfg })
    }

    /// Keys one triple; `Ok(None)` if it is degenerate.
    pub fn triangle(&self, i: usize, j: usize, k: usize) -> Result<Option<TriangleRecord>, TsrError> {
        let residues = self.protein.residues();
        let vertex = |idx: usize| Vertex { aa: residues[idx].aa, position: residues[idx].ca, index: idx };
        let input = [i, j, k];
        let triple = determine_labels([vertex(i), vertex(j), vertex(k)], self.cfg.labels());
        let vertices = triple.order.map(|s| input[s]);
        let geom = match compute_geometry(vertices.map(|v| residues[v].ca), self.cfg.degeneracy_epsilon()) {
            Ok(g) => g,
            Err(TsrError::DegenerateTriangle { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let (dist_bin, theta_bin) = discretize(&geom, self.cfg);
        let key = compute_key(&DiscretizedTriangle { labels: triple.labels, dist_bin, theta_bin }, self.cfg);
        let ann = self.protein.annotations();
        let category = classify(ann[i], ann[j], ann[k]);
        Ok(Some(TriangleRecord { key, vertices, category }))
    }

    /// Visits all triples with first index `i` (in lexicographic order).
    fn scan_from<F>(&self, i: usize, mut visit: F) -> Result<DegeneracyReport, TsrError>
    where
        F: FnMut(TriangleRecord),
    {
        let n = self.protein.len();
        let mut report = DegeneracyReport::default();
        for j in i + 1..n {
            for k in j + 1..n {
                report.total += 1;
                match self.triangle(i, j, k)? {
                    Some(rec) => {
                        report.emitted += 1;
                        visit(rec);
                    }
                    None => report.skipped += 1,
                }
            }
        }
        Ok(report)
    }

    /// Every non-degenerate triangle in lexicographic (i, j, k) order.
    pub fn records(&self) -> Result<(Vec<TriangleRecord>, DegeneracyReport), TsrError> {
        let chunks: Vec<_> = (0..self.protein.len())
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::new();
                let report = self.scan_from(i, |r| out.push(r))?;
                Ok((out, report))
            })
            .collect::<Result<_, TsrError>>()?;
        let mut records = Vec::with_capacity(triangle_count(self.protein.len()) as usize);
        let mut report = DegeneracyReport::default();
        for (chunk, r) in chunks {
            records.extend(chunk);
            report = report.merge(r);
        }
        Ok((records, report))
    }

    /// Aggregated (key, category) counts, sorted by key then category row.
    pub fn key_stream(&self) -> Result<KeyStream, TsrError> {
        type Counts = HashMap<(KeyValue, SseTripleCategory), u64>;
        let (counts, report) = (0..self.protein.len())
            .into_par_iter()
            .map(|i| {
                let mut counts = Counts::new();
                let report = self.scan_from(i, |r| *counts.entry((r.key, r.category)).or_default() += 1)?;
                Ok((counts, report))
            })
            .try_reduce(
                || (Counts::new(), DegeneracyReport::default()),
                |(mut a, ra), (b, rb)| {
                    for (k, v) in b {
                        *a.entry(k).or_default() += v;
                    }
                    Ok((a, ra.merge(rb)))
                },
            )?;
        let mut entries = counts
            .into_iter()
            .map(|((key, category), count)| {
                let count = u32::try_from(count).map_err(|_| TsrError::CountOverflow { key: key.0, category })?;
                Ok(KeyCount { key, category, count })
            })
            .collect::<Result<Vec<_>, TsrError>>()?;
        entries.sort_unstable_by_key(|e| (e.key, e.category));
        Ok(KeyStream {
            protein_id: self.protein.id().to_string(),
            residue_count: self.protein.len() as u64,
            degenerate_skipped: report.skipped,
            config_hash: self.cfg.hash(),
            entries,
        })
    }
}

/// Every non-degenerate triangle of `protein`, plus the degeneracy totals.
pub fn enumerate_triangles(
    protein: &ProteinStructure,
    cfg: &DiscretizationConfig,
) -> Result<(Vec<TriangleRecord>, DegeneracyReport), TsrError> {
    TriangleScanner::new(protein, cfg)?.records()
}

/// Aggregated per-protein key counts; the input to dictionary and matrix
/// building.
pub fn key_stream(protein: &ProteinStructure, cfg: &DiscretizationConfig) -> Result<KeyStream, TsrError> {
    TriangleScanner::new(protein, cfg)?.key_stream()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyCount {
    pub key: KeyValue,
    pub category: SseTripleCategory,
    pub count: u32,
}

/// Per-protein key counts under one config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyStream {
    pub protein_id: String,
    pub residue_count: u64,
    pub degenerate_skipped: u64,
    pub config_hash: ConfigHash,
    /// Sorted by (key, category), no duplicates.
    pub entries: Vec<KeyCount>,
}

impl KeyStream {
    pub fn emitted(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.count)).sum()
    }

    /// Distinct keys, ascending.
    pub fn distinct_keys(&self) -> Vec<KeyValue> {
        let mut keys: Vec<_> = self.entries.iter().map(|e| e.key).collect();
        keys.dedup();
        keys
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{Residue, ResidueId, SseAnnotation};

    fn cfg() -> DiscretizationConfig {
        DiscretizationConfig::default_config()
    }

    fn v(aa: AminoAcid, position: [f64; 3], index: usize) -> Vertex {
        Vertex { aa, position, index }
    }

    fn protein(points: &[[f64; 3]]) -> ProteinStructure {
        let residues = points
            .iter()
            .enumerate()
            .map(|(i, &ca)| Residue { id: ResidueId::new('A', i as i32 + 1, None), aa: AminoAcid::Ala, ca })
            .collect();
        ProteinStructure::new("p", residues, vec![SseAnnotation::Coil; points.len()]).unwrap()
    }

    #[test]
    fn labels_strictly_ordered() {
        // Alphabetical with LYS<->VAL and GLY<->GLU swapped.
        let map = AminoAcidLabelMap::new(AminoAcidLabelMap::alphabetical().iter().map(|(aa, l)| {
            let label = match aa {
                AminoAcid::Lys => 23,
                AminoAcid::Val => 15,
                AminoAcid::Gly => 10,
                AminoAcid::Glu => 11,
                _ => l,
            };
            (aa, label)
        }))
        .unwrap();
        let t = determine_labels(
            [
                v(AminoAcid::Lys, [0.0, 0.0, 0.0], 0),
                v(AminoAcid::Ala, [3.8, 0.0, 0.0], 1),
                v(AminoAcid::Gly, [1.0, 3.0, 0.0], 2),
            ],
            &map,
        );
        assert_eq!(t.labels, [23, 10, 4]);
        assert_eq!(t.order, [0, 2, 1]);
    }

    #[test]
    fn equal_labels_use_centroid_distance_then_index() {
        let map = AminoAcidLabelMap::alphabetical();
        // Scalene: centroid distances all differ.
        let pts = [[0.0, 0.0, 0.0], [7.0, 0.0, 0.0], [1.0, 3.0, 0.0]];
        let canonical = determine_labels(
            [v(AminoAcid::Ala, pts[0], 0), v(AminoAcid::Ala, pts[1], 1), v(AminoAcid::Ala, pts[2], 2)],
            &map,
        );
        // Vertex 1 is farthest from the centroid (8/3, 1).
        assert_eq!(canonical.order[0], 1);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let input = p.map(|s| v(AminoAcid::Ala, pts[s], s));
            let t = determine_labels(input, &map);
            assert_eq!(t.order.map(|s| p[s]), canonical.order);
        }
    }

    #[test]
    fn right_angle_example() {
        let g = compute_geometry([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 2.0, 0.0]], 1e-6).unwrap();
        assert!((g.d12 - 2.0).abs() < 1e-12);
        assert!((g.d13 - 5f64.sqrt()).abs() < 1e-12);
        assert!((g.d3 - 2.0).abs() < 1e-12);
        assert!((g.theta1 - 90.0).abs() < 1e-9);
        assert!((g.theta_delta - 90.0).abs() < 1e-9);
        assert!((g.max_dist - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn equilateral_is_ninety() {
        let s = 3.8;
        let g = compute_geometry([[0.0, 0.0, 0.0], [s, 0.0, 0.0], [s / 2.0, s * 3f64.sqrt() / 2.0, 0.0]], 1e-6)
            .unwrap();
        assert!((g.theta_delta - 90.0).abs() < 1e-9);
    }

    #[test]
    fn obtuse_side_folds() {
        // Apex leans toward v1: θ₁ > 90°.
        let g = compute_geometry([[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [1.0, 1.0, 0.0]], 1e-6).unwrap();
        assert!((g.theta1 - 135.0).abs() < 1e-9, "{}", g.theta1);
        assert!((g.theta_delta - 45.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cases() {
        let e = compute_geometry([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 0.0, 0.0]], 1e-6);
        assert!(matches!(e, Err(TsrError::DegenerateTriangle { .. })));
        let e = compute_geometry([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 1.0, 0.0]], 1e-6);
        assert!(matches!(e, Err(TsrError::DegenerateTriangle { .. })));
        let e = compute_geometry([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [5.0, 0.0, 0.0]], 1e-6);
        assert!(matches!(e, Err(TsrError::DegenerateTriangle { .. })));
    }

    #[test]
    fn bins() {
        assert_eq!(bin_index(45.0, &[30.0, 60.0]), 2);
        assert_eq!(bin_index(50.0, &[5.0, 10.0, 20.0]), 4);
        assert_eq!(bin_index(30.0, &[30.0, 60.0]), 1);
        assert_eq!(bin_index(0.1, &[30.0, 60.0]), 1);
    }

    #[test]
    fn key_examples() {
        let c = cfg();
        let k = |labels, dist_bin, theta_bin| compute_key(&DiscretizedTriangle { labels, dist_bin, theta_bin }, &c).0;
        assert_eq!(k([4, 4, 4], 1, 1), 1_683_885);
        assert_eq!(k([23, 23, 23], 35, 29), 12_349_504);
        assert_eq!(k([17, 9, 5], 1, 1) % (29 * 35), 0);
        assert!(k([23, 23, 23], 35, 29) < c.key_space());
    }

    #[test]
    fn four_residues_four_records() {
        let p = protein(&[[0.0, 0.0, 0.0], [3.8, 0.0, 0.0], [5.0, 3.5, 0.0], [2.0, 4.0, 3.0]]);
        let (recs, rep) = enumerate_triangles(&p, &cfg()).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(rep, DegeneracyReport { total: 4, emitted: 4, skipped: 0 });
        assert!(recs.iter().all(|r| r.category == SseTripleCategory::Coil3));
    }

    #[test]
    fn collinear_midpoint_is_skipped() {
        let p = protein(&[[0.0, 0.0, 0.0], [1.9, 0.0, 0.0], [3.8, 0.0, 0.0]]);
        let (recs, rep) = enumerate_triangles(&p, &cfg()).unwrap();
        assert!(recs.is_empty());
        assert_eq!(rep.skipped, 1);
        let ks = key_stream(&p, &cfg()).unwrap();
        assert!(ks.entries.is_empty());
        assert_eq!(ks.degenerate_skipped, 1);
    }

    #[test]
    fn too_few_residues() {
        let p = protein(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(enumerate_triangles(&p, &cfg()).unwrap_err(), TsrError::TooFewResidues(2));
    }

    #[test]
    fn choose_three() {
        assert_eq!(triangle_count(2), 0);
        assert_eq!(triangle_count(3), 1);
        assert_eq!(triangle_count(30), 4060);
    }
}
