//! Cα-level protein models annotated with secondary structure.
//!
//! A [`ProteinStructure`] is what every downstream stage consumes: an ordered
//! list of standard residues, one Cα vertex each, paired with the helix/strand
//! segment (or coil) the residue belongs to. Structures come from PDB text via
//! [`parse_pdb`]; class labels come from a CSV via [`load_labels`].

mod labels;
mod pdb;

use std::collections::HashSet;
use std::fmt;

use crate::amino::AminoAcid;

pub use labels::{load_labels, LabelError, LabelRecord};
pub use pdb::{parse_pdb, parse_pdb_with, write_ca_pdb, ParseError, ParseOptions, ParseReport};

/// Author residue identity: chain, sequence number and insertion code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueId {
    pub chain: char,
    pub seq_num: i32,
    pub insertion_code: Option<char>,
}

impl ResidueId {
    pub fn new(chain: char, seq_num: i32, insertion_code: Option<char>) -> Self {
        Self { chain, seq_num, insertion_code }
    }
}

impl fmt::Display for ResidueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chain, self.seq_num)?;
        if let Some(code) = self.insertion_code {
            write!(f, "{code}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residue {
    pub id: ResidueId,
    pub aa: AminoAcid,
    /// Cα coordinates in Ångström.
    pub ca: [f64; 3],
}

/// Identifies one HELIX or SHEET record within a protein.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SseKind {
    Helix,
    Strand,
    Coil,
}

/// Secondary-structure assignment of a single residue. Helix and strand
/// residues carry the segment they came from; coil carries none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SseAnnotation {
    Helix(SegmentId),
    Strand(SegmentId),
    Coil,
}

impl SseAnnotation {
    pub fn kind(self) -> SseKind {
        match self {
            SseAnnotation::Helix(_) => SseKind::Helix,
            SseAnnotation::Strand(_) => SseKind::Strand,
            SseAnnotation::Coil => SseKind::Coil,
        }
    }

    pub fn segment(self) -> Option<SegmentId> {
        match self {
            SseAnnotation::Helix(s) | SseAnnotation::Strand(s) => Some(s),
            SseAnnotation::Coil => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("residue {0} appears more than once")]
    DuplicateResidue(ResidueId),
    #[error("residue {0} has non-finite coordinates")]
    NonFiniteCoordinate(ResidueId),
    #[error("{residues} residues but {annotations} annotations")]
    LengthMismatch { residues: usize, annotations: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProteinStructure {
    id: String,
    residues: Vec<Residue>,
    sse: Vec<SseAnnotation>,
}

impl ProteinStructure {
    pub fn new(
        id: impl Into<String>,
        residues: Vec<Residue>,
        sse: Vec<SseAnnotation>,
    ) -> Result<Self, StructureError> {
        if residues.len() != sse.len() {
            return Err(StructureError::LengthMismatch {
                residues: residues.len(),
                annotations: sse.len(),
            });
        }
        let mut seen = HashSet::with_capacity(residues.len());
        for r in &residues {
            if !seen.insert(r.id) {
                return Err(StructureError::DuplicateResidue(r.id));
            }
            if !r.ca.iter().all(|c| c.is_finite()) {
                return Err(StructureError::NonFiniteCoordinate(r.id));
            }
        }
        Ok(Self { id: id.into(), residues, sse })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn residues(&self) -> &[Residue] {
        &self.residues
    }

    pub fn annotations(&self) -> &[SseAnnotation] {
        &self.sse
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Residue, SseAnnotation)> {
        self.residues.iter().zip(self.sse.iter().copied())
    }

    /// Returns a copy with every Cα position passed through `f`.
    pub fn map_coordinates(&self, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        let residues = self
            .residues
            .iter()
            .map(|r| Residue { ca: f(r.ca), ..*r })
            .collect();
        Self { id: self.id.clone(), residues, sse: self.sse.clone() }
    }

    /// Number of residues of each kind, as (helix, strand, coil).
    pub fn kind_counts(&self) -> (usize, usize, usize) {
        self.sse.iter().fold((0, 0, 0), |(h, s, c), a| match a.kind() {
            SseKind::Helix => (h + 1, s, c),
            SseKind::Strand => (h, s + 1, c),
            SseKind::Coil => (h, s, c + 1),
        })
    }
}
