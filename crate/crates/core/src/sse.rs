//! The eighteen SSE-triple categories.
//!
//! Each triangle is tagged by the secondary-structure kinds of its three
//! vertices and, for helix and strand vertices, whether they share a segment.
//! Row indices follow the canonical list order so matrix rows line up across
//! implementations.

use std::fmt;
use std::str::FromStr;

use crate::structure::{SseAnnotation, SseKind};

pub const CATEGORY_COUNT: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SseTripleCategory {
    /// All three vertices in the same helix.
    SameHelix3 = 0,
    /// All three vertices in the same sheet strand.
    SameSheet3 = 1,
    /// All coil.
    Coil3 = 2,
    /// One helix, one sheet, one coil.
    HelixSheetCoil = 3,
    /// Three different helices.
    DistinctHelices3 = 4,
    /// Three different sheets.
    DistinctSheets3 = 5,
    /// Two from one helix, one from another helix.
    HelixPairOtherHelix = 6,
    /// Two from one helix, one sheet.
    HelixPairSheet = 7,
    /// Two from one helix, one coil.
    HelixPairCoil = 8,
    /// Two from one sheet, one from another sheet.
    SheetPairOtherSheet = 9,
    /// Two from one sheet, one helix.
    SheetPairHelix = 10,
    /// Two from one sheet, one coil.
    SheetPairCoil = 11,
    /// One helix, two coil.
    HelixTwoCoil = 12,
    /// One sheet, two coil.
    SheetTwoCoil = 13,
    /// Two different helices, one sheet.
    SplitHelicesSheet = 14,
    /// Two different helices, one coil.
    SplitHelicesCoil = 15,
    /// Two different sheets, one helix.
    SplitSheetsHelix = 16,
    /// Two different sheets, one coil.
    SplitSheetsCoil = 17,
}

use SseTripleCategory as Cat;

impl SseTripleCategory {
    /// Canonical row order.
    pub const ALL: [SseTripleCategory; CATEGORY_COUNT] = [
        Cat::SameHelix3,
        Cat::SameSheet3,
        Cat::Coil3,
        Cat::HelixSheetCoil,
        Cat::DistinctHelices3,
        Cat::DistinctSheets3,
        Cat::HelixPairOtherHelix,
        Cat::HelixPairSheet,
        Cat::HelixPairCoil,
        Cat::SheetPairOtherSheet,
        Cat::SheetPairHelix,
        Cat::SheetPairCoil,
        Cat::HelixTwoCoil,
        Cat::SheetTwoCoil,
        Cat::SplitHelicesSheet,
        Cat::SplitHelicesCoil,
        Cat::SplitSheetsHelix,
        Cat::SplitSheetsCoil,
    ];

    const CODES: [&'static str; CATEGORY_COUNT] = [
        "3a1", "3b1", "3c", "1a1b1c", "3a3", "3b3", "3a2", "2a11b", "2a11c", "3b2", "2b11a", "2b11c", "1a2c",
        "1b2c", "2a21b", "2a21c", "2b21a", "2b21c",
    ];

    pub fn row_index(self) -> usize {
        self as usize
    }

    pub fn from_row_index(row: usize) -> Option<Self> {
        Self::ALL.get(row).copied()
    }

    /// Short code used in every serialized artifact (`3a1` ... `2b21c`).
    pub fn code(self) -> &'static str {
        Self::CODES[self.row_index()]
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::CODES.iter().position(|c| *c == code).map(|i| Self::ALL[i])
    }

    /// Number of (helix, strand, coil) vertices the category implies.
    pub fn kind_counts(self) -> (u8, u8, u8) {
        match self {
            Cat::SameHelix3 | Cat::DistinctHelices3 | Cat::HelixPairOtherHelix => (3, 0, 0),
            Cat::SameSheet3 | Cat::DistinctSheets3 | Cat::SheetPairOtherSheet => (0, 3, 0),
            Cat::Coil3 => (0, 0, 3),
            Cat::HelixSheetCoil => (1, 1, 1),
            Cat::HelixPairSheet | Cat::SplitHelicesSheet => (2, 1, 0),
            Cat::HelixPairCoil | Cat::SplitHelicesCoil => (2, 0, 1),
            Cat::SheetPairHelix | Cat::SplitSheetsHelix => (1, 2, 0),
            Cat::SheetPairCoil | Cat::SplitSheetsCoil => (0, 2, 1),
            Cat::HelixTwoCoil => (1, 0, 2),
            Cat::SheetTwoCoil => (0, 1, 2),
        }
    }
}

impl fmt::Display for SseTripleCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown SSE category code {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for SseTripleCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_code(s).ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// Distinct segments among the vertices of one kind.
fn distinct_segments(annotations: &[SseAnnotation; 3], kind: SseKind) -> usize {
    let mut segs: Vec<_> = annotations
        .iter()
        .filter(|a| a.kind() == kind)
        .filter_map(|a| a.segment())
        .collect();
    segs.sort_unstable();
    segs.dedup();
    segs.len()
}

/// Assigns a triangle's category from its vertex annotations. Order of the
/// arguments does not matter.
pub fn classify(a: SseAnnotation, b: SseAnnotation, c: SseAnnotation) -> SseTripleCategory {
    let ann = [a, b, c];
    let count = |k| ann.iter().filter(|x| x.kind() == k).count();
    let (h, s, co) = (count(SseKind::Helix), count(SseKind::Strand), count(SseKind::Coil));
    let helix_segs = distinct_segments(&ann, SseKind::Helix);
    let sheet_segs = distinct_segments(&ann, SseKind::Strand);
    match (h, s, co) {
        (3, 0, 0) => match helix_segs {
            1 => Cat::SameHelix3,
            2 => Cat::HelixPairOtherHelix,
            _ => Cat::DistinctHelices3,
        },
        (0, 3, 0) => match sheet_segs {
            1 => Cat::SameSheet3,
            2 => Cat::SheetPairOtherSheet,
            _ => Cat::DistinctSheets3,
        },
        (0, 0, 3) => Cat::Coil3,
        (1, 1, 1) => Cat::HelixSheetCoil,
        (2, 1, 0) if helix_segs == 1 => Cat::HelixPairSheet,
        (2, 1, 0) => Cat::SplitHelicesSheet,
        (2, 0, 1) if helix_segs == 1 => Cat::HelixPairCoil,
        (2, 0, 1) => Cat::SplitHelicesCoil,
        (1, 2, 0) if sheet_segs == 1 => Cat::SheetPairHelix,
        (1, 2, 0) => Cat::SplitSheetsHelix,
        (0, 2, 1) if sheet_segs == 1 => Cat::SheetPairCoil,
        (0, 2, 1) => Cat::SplitSheetsCoil,
        (1, 0, 2) => Cat::HelixTwoCoil,
        (0, 1, 2) => Cat::SheetTwoCoil,
        _ => unreachable!("kind counts always sum to three"),
    }
}
