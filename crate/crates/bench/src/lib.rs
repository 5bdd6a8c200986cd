//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsr_core::{
    build_dictionary, key_stream, matrix_from_stream, AminoAcid, DiscretizationConfig, KeyPolicy, KeyStream,
    ProteinStructure, Residue, ResidueId, SegmentId, SseAnnotation, SseKeyMatrix,
};

/// A Cα random walk of `n` residues with alternating helix, strand and coil runs.
pub fn protein(seed: u64, id: &str, n: usize) -> ProteinStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = [0.0f64; 3];
    let mut residues = Vec::with_capacity(n);
    let mut sse = Vec::with_capacity(n);
    for i in 0..n {
        let dir: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
        for d in 0..3 {
            pos[d] += 3.8 * dir[d] / norm;
        }
        let aa = AminoAcid::ALL[rng.random_range(0..AminoAcid::ALL.len())];
        residues.push(Residue { id: ResidueId::new('A', i as i32 + 1, None), aa, ca: pos });
        let segment = (i / 6) as u32;
        sse.push(match segment % 3 {
            0 => SseAnnotation::Helix(SegmentId(segment)),
            1 => SseAnnotation::Strand(SegmentId(segment)),
            _ => SseAnnotation::Coil,
        });
    }
    ProteinStructure::new(id, residues, sse).expect("fixture protein is valid")
}

/// `count` proteins of `n` residues each.
pub fn corpus(count: usize, n: usize) -> Vec<ProteinStructure> {
    (0..count).map(|i| protein(i as u64, &format!("p{i:04}"), n)).collect()
}

pub fn streams(proteins: &[ProteinStructure]) -> Vec<KeyStream> {
    let cfg = DiscretizationConfig::default_config();
    proteins.iter().map(|p| key_stream(p, &cfg).expect("default config is valid")).collect()
}

/// Training-policy matrices over a dictionary built from the same streams.
pub fn matrices(streams: &[KeyStream]) -> Vec<SseKeyMatrix> {
    let dict = build_dictionary(streams).expect("corpus is non-empty");
    streams
        .iter()
        .map(|s| matrix_from_stream(s, &dict, KeyPolicy::Training).expect("keys are in the dictionary").matrix)
        .collect()
}
