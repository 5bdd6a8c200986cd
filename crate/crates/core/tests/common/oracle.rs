//! Straight-line recomputation of triangle geometry, bins, keys and SSE
//! codes. Shares no code with the library beyond its input types.

use std::collections::BTreeMap;

use tsr_core::{DiscretizationConfig, ProteinStructure, SseAnnotation};

pub struct NaiveGeometry {
    pub d12: f64,
    pub d13: f64,
    pub d3: f64,
    pub max_dist: f64,
    pub theta1: f64,
    pub theta_delta: f64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// θ₁ is the angle at the midpoint M of edge 1–2 between M→v2 and M→v3,
/// taken with atan2 over the cross and dot products.
pub fn geometry(v1: [f64; 3], v2: [f64; 3], v3: [f64; 3]) -> NaiveGeometry {
    let m = [(v1[0] + v2[0]) * 0.5, (v1[1] + v2[1]) * 0.5, (v1[2] + v2[2]) * 0.5];
    let a = [v2[0] - m[0], v2[1] - m[1], v2[2] - m[2]];
    let b = [v3[0] - m[0], v3[1] - m[1], v3[2] - m[2]];
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cr = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let crn = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
    let theta1 = crn.atan2(dot) * 180.0 / std::f64::consts::PI;
    let theta_delta = if theta1 > 90.0 { 180.0 - theta1 } else { theta1 };
    let (d12, d13, d23) = (dist(v1, v2), dist(v1, v3), dist(v2, v3));
    let mut max_dist = d12;
    if d13 > max_dist {
        max_dist = d13;
    }
    if d23 > max_dist {
        max_dist = d23;
    }
    NaiveGeometry { d12, d13, d3: dist(v3, m), max_dist, theta1, theta_delta }
}

/// Height of v3 over the line v1–v2 through Heron's formula.
pub fn height(v1: [f64; 3], v2: [f64; 3], v3: [f64; 3]) -> f64 {
    let (a, b, c) = (dist(v1, v2), dist(v1, v3), dist(v2, v3));
    let s = (a + b + c) / 2.0;
    let area = (s * (s - a) * (s - b) * (s - c)).max(0.0).sqrt();
    if a == 0.0 {
        0.0
    } else {
        2.0 * area / a
    }
}

pub fn bin(value: f64, boundaries: &[f64]) -> u64 {
    let mut count = 0;
    for &b in boundaries {
        if b < value {
            count += 1;
        }
    }
    count + 1
}

/// Horner form of the mixed-radix key.
pub fn key(labels: [u64; 3], dist_bin: u64, theta_bin: u64, m: u64, theta_bins: u64, dist_bins: u64) -> u64 {
    ((((labels[0] - 1) * m + (labels[1] - 1)) * m + (labels[2] - 1)) * dist_bins + (dist_bin - 1)) * theta_bins
        + (theta_bin - 1)
}

/// Category code built from its own definition: kind letters, counts and
/// whether same-kind vertices share a segment.
pub fn sse_code(ann: [SseAnnotation; 3]) -> String {
    let letter = |a: &SseAnnotation| match a {
        SseAnnotation::Helix(_) => 'a',
        SseAnnotation::Strand(_) => 'b',
        SseAnnotation::Coil => 'c',
    };
    let seg = |a: &SseAnnotation| match a {
        SseAnnotation::Helix(s) | SseAnnotation::Strand(s) => Some(s.0),
        SseAnnotation::Coil => None,
    };
    let count = |l: char| ann.iter().filter(|a| letter(a) == l).count();
    let distinct = |l: char| {
        let mut segs: Vec<u32> = ann.iter().filter(|a| letter(a) == l).filter_map(seg).collect();
        segs.sort_unstable();
        segs.dedup();
        segs.len()
    };
    let (na, nb, nc) = (count('a'), count('b'), count('c'));
    if nc == 3 {
        return "3c".into();
    }
    if na == 1 && nb == 1 && nc == 1 {
        return "1a1b1c".into();
    }
    for (l, n) in [('a', na), ('b', nb)] {
        if n == 3 {
            return format!("3{l}{}", distinct(l));
        }
    }
    if nc == 2 {
        let other = if na == 1 { 'a' } else { 'b' };
        return format!("1{other}2c");
    }
    let (pair, single) = if na == 2 { ('a', if nb == 1 { 'b' } else { 'c' }) } else { ('b', if na == 1 { 'a' } else { 'c' }) };
    let same = if distinct(pair) == 1 { "11" } else { "21" };
    format!("2{pair}{same}{single}")
}

/// Label-first ordering of three residue indices: descending label, then
/// descending distance to the triangle centroid (relative tie 1e-9), then
/// ascending index.
pub fn order_vertices(p: &ProteinStructure, cfg: &DiscretizationConfig, idx: [usize; 3]) -> [usize; 3] {
    let mut idx = idx;
    idx.sort_unstable();
    let pos = |i: usize| p.residues()[i].ca;
    let mut c = [0.0; 3];
    for &i in &idx {
        for (d, cd) in c.iter_mut().enumerate() {
            *cd += pos(i)[d];
        }
    }
    let c = [c[0] / 3.0, c[1] / 3.0, c[2] / 3.0];
    let label = |i: usize| cfg.labels().label(p.residues()[i].aa);
    let spread = |i: usize| dist(pos(i), c);
    // i before j?
    let before = |i: usize, j: usize| {
        if label(i) != label(j) {
            return label(i) > label(j);
        }
        let (si, sj) = (spread(i), spread(j));
        if (si - sj).abs() > 1e-9 * si.max(sj).max(1.0) {
            return si > sj;
        }
        i < j
    };
    for _ in 0..3 {
        for k in 0..2 {
            if before(idx[k + 1], idx[k]) {
                idx.swap(k, k + 1);
            }
        }
    }
    idx
}

/// (key, category code) multiset of a protein and the number of degenerate
/// triples, by scanning every triple.
pub fn multiset(p: &ProteinStructure, cfg: &DiscretizationConfig) -> (BTreeMap<(u64, String), u64>, u64) {
    let n = p.len();
    let eps = cfg.degeneracy_epsilon();
    let mut out = BTreeMap::new();
    let mut degenerate = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let o = order_vertices(p, cfg, [i, j, k]);
                let v = o.map(|x| p.residues()[x].ca);
                let g = geometry(v[0], v[1], v[2]);
                if g.d12 <= eps || g.d3 <= eps || height(v[0], v[1], v[2]) <= eps || g.theta_delta <= 0.0 {
                    degenerate += 1;
                    continue;
                }
                let labels = o.map(|x| u64::from(cfg.labels().label(p.residues()[x].aa)));
                let kv = key(
                    labels,
                    bin(g.max_dist, cfg.dist_boundaries()),
                    bin(g.theta_delta, cfg.theta_boundaries()),
                    cfg.label_base(),
                    cfg.theta_bins(),
                    cfg.dist_bins(),
                );
                let ann = p.annotations();
                *out.entry((kv, sse_code([ann[i], ann[j], ann[k]]))).or_default() += 1;
            }
        }
    }
    (out, degenerate)
}

/// The library's aggregated stream in the oracle's shape.
pub fn stream_multiset(s: &tsr_core::KeyStream) -> BTreeMap<(u64, String), u64> {
    s.entries.iter().map(|e| ((e.key.0, e.category.code().to_string()), u64::from(e.count))).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
