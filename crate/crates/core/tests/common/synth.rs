//! Seeded synthetic proteins and rigid motions.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tsr_core::{AminoAcid, ProteinStructure, Residue, ResidueId, SegmentId, SseAnnotation};

/// A Cα trace as a random walk with 3.8 Å steps, random residues and
/// SSE runs of 3 to 8 residues.
pub fn random_protein(rng: &mut ChaCha8Rng, id: &str, n: usize) -> ProteinStructure {
    let mut residues = Vec::with_capacity(n);
    let mut pos = [0.0f64; 3];
    for i in 0..n {
        let dir = unit_vector(rng);
        for d in 0..3 {
            pos[d] += 3.8 * dir[d];
        }
        let aa = AminoAcid::ALL[rng.random_range(0..20)];
        residues.push(Residue { id: ResidueId::new('A', i as i32 + 1, None), aa, ca: pos });
    }
    ProteinStructure::new(id, residues, random_sse(rng, n)).unwrap()
}

pub fn random_sse(rng: &mut ChaCha8Rng, n: usize) -> Vec<SseAnnotation> {
    let mut sse = Vec::with_capacity(n);
    let mut segment = 0;
    while sse.len() < n {
        let run = rng.random_range(3..=8).min(n - sse.len());
        let kind = rng.random_range(0..3);
        segment += 1;
        let a = match kind {
            0 => SseAnnotation::Helix(SegmentId(segment)),
            1 => SseAnnotation::Strand(SegmentId(segment)),
            _ => SseAnnotation::Coil,
        };
        sse.extend(std::iter::repeat_n(a, run));
    }
    sse
}

pub fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Uniform random rotation matrix from a unit quaternion.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let (w, x, y, z) = loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            break (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        }
    };
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn rigid_motion(p: &ProteinStructure, r: [[f64; 3]; 3], t: [f64; 3]) -> ProteinStructure {
    p.map_coordinates(|v| std::array::from_fn(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2] + t[i]))
}

/// Three proteins with identical residues and coordinates that differ only
/// in their secondary-structure assignment.
pub fn sse_only_trio() -> [ProteinStructure; 3] {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0xF16);
    let base = random_protein(&mut rng, "P1", 12);
    let h = |s| SseAnnotation::Helix(SegmentId(s));
    let e = |s| SseAnnotation::Strand(SegmentId(s));
    let c = SseAnnotation::Coil;
    let layouts = [
        [vec![h(1); 8], vec![e(2); 4]].concat(),
        [vec![h(1); 4], vec![e(2); 8]].concat(),
        [vec![c; 4], vec![h(1); 4], vec![c; 4]].concat(),
    ];
    let mut out = layouts.into_iter().enumerate().map(|(i, sse)| {
        ProteinStructure::new(format!("P{}", i + 1), base.residues().to_vec(), sse).unwrap()
    });
    [out.next().unwrap(), out.next().unwrap(), out.next().unwrap()]
}

/// An 18 × `columns` matrix in which each cell is non-zero with probability
/// `density`, counts in 1..=`max_count`.
pub fn random_matrix(
    rng: &mut ChaCha8Rng,
    id: &str,
    columns: u64,
    density: f64,
    max_count: u32,
    hash: tsr_core::ConfigHash,
) -> tsr_core::SseKeyMatrix {
    let mut cells = Vec::new();
    for row in 0..18u8 {
        for column in 0..columns {
            if rng.random_bool(density) {
                cells.push(tsr_core::MatrixCell { row, column, count: rng.random_range(1..=max_count) });
            }
        }
    }
    tsr_core::SseKeyMatrix::new(id, columns, cells, rng.random_range(0..1000), hash).unwrap()
}
