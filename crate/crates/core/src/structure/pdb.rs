//! Fixed-column PDB reader for Cα atoms plus HELIX/SHEET ranges.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{ProteinStructure, Residue, ResidueId, SegmentId, SseAnnotation, StructureError};
use crate::amino::AminoAcid;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: malformed {record} record: {reason}")]
    MalformedRecord { line: usize, record: &'static str, reason: String },
    #[error("no standard-residue Cα atoms found")]
    EmptyStructure,
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Knobs for [`parse_pdb_with`].
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Restrict to these chains. `None` keeps every chain of the first model.
    pub chains: Option<Vec<char>>,
}

/// Counters for records that were dropped or resolved by a fallback rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// Cα atoms of residues outside the standard twenty.
    pub nonstandard_dropped: usize,
    /// Alternate-location Cα atoms that lost to a higher-occupancy copy.
    pub altloc_dropped: usize,
    /// Residues covered by both a HELIX and a SHEET range (assigned helix).
    pub helix_sheet_conflicts: usize,
    /// MODEL blocks after the first that were ignored.
    pub extra_models: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RangeKind {
    Helix,
    Sheet,
}

#[derive(Debug, Clone, Copy)]
struct SseRange {
    kind: RangeKind,
    segment: SegmentId,
    chain: char,
    start: (i32, Option<char>),
    end: (i32, Option<char>),
}

impl SseRange {
    fn covers(&self, id: &ResidueId) -> bool {
        let key = (id.seq_num, id.insertion_code);
        id.chain == self.chain && self.start <= key && key <= self.end
    }
}

struct CaCandidate {
    residue: Residue,
    occupancy: f64,
}

/// Parses PDB text with default options.
pub fn parse_pdb(text: &str, protein_id: &str) -> Result<ProteinStructure, ParseError> {
    parse_pdb_with(text, protein_id, &ParseOptions::default()).map(|(s, _)| s)
}

/// Parses PDB text into a Cα model of the first MODEL, annotating each residue
/// from the HELIX/SHEET records. Residues without a CA atom are skipped.
pub fn parse_pdb_with(
    text: &str,
    protein_id: &str,
    options: &ParseOptions,
) -> Result<(ProteinStructure, ParseReport), ParseError> {
    let mut report = ParseReport::default();
    let mut ranges = Vec::new();
    let mut next_segment = 0u32;
    let mut candidates: Vec<CaCandidate> = Vec::new();
    let mut index: HashMap<ResidueId, usize> = HashMap::new();
    let mut seen_model = false;
    let mut first_model_done = false;

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let tag = line.get(..6).unwrap_or(line);
        match tag.trim_end() {
            "MODEL" => {
                if seen_model {
                    first_model_done = true;
                    report.extra_models += 1;
                }
                seen_model = true;
            }
            "ENDMDL" => first_model_done = true,
            "HELIX" => {
                let mut r = parse_helix(line, lineno)?;
                r.segment = SegmentId(next_segment);
                next_segment += 1;
                ranges.push(r);
            }
            "SHEET" => {
                let mut r = parse_sheet(line, lineno)?;
                r.segment = SegmentId(next_segment);
                next_segment += 1;
                ranges.push(r);
            }
            "ATOM" if !first_model_done => {
                if field(line, 13, 16).trim() != "CA" {
                    continue;
                }
                let res_name = field(line, 18, 20).trim();
                let Some(aa) = AminoAcid::from_code(res_name) else {
                    report.nonstandard_dropped += 1;
                    continue;
                };
                let (id, ca, occupancy) = parse_atom(line, lineno)?;
                if let Some(chains) = &options.chains {
                    if !chains.contains(&id.chain) {
                        continue;
                    }
                }
                let residue = Residue { id, aa, ca };
                match index.get(&id) {
                    Some(&slot) => {
                        report.altloc_dropped += 1;
                        if occupancy > candidates[slot].occupancy {
                            candidates[slot] = CaCandidate { residue, occupancy };
                        }
                    }
                    None => {
                        index.insert(id, candidates.len());
                        candidates.push(CaCandidate { residue, occupancy });
                    }
                }
            }
            _ => {}
        }
    }

    if candidates.is_empty() {
        return Err(ParseError::EmptyStructure);
    }

    let residues: Vec<Residue> = candidates.into_iter().map(|c| c.residue).collect();
    let sse = residues
        .iter()
        .map(|r| {
            let helix = ranges.iter().find(|g| g.kind == RangeKind::Helix && g.covers(&r.id));
            let sheet = ranges.iter().find(|g| g.kind == RangeKind::Sheet && g.covers(&r.id));
            match (helix, sheet) {
                (Some(h), Some(_)) => {
                    report.helix_sheet_conflicts += 1;
                    SseAnnotation::Helix(h.segment)
                }
                (Some(h), None) => SseAnnotation::Helix(h.segment),
                (None, Some(s)) => SseAnnotation::Strand(s.segment),
                (None, None) => SseAnnotation::Coil,
            }
        })
        .collect();

    let structure = ProteinStructure::new(protein_id, residues, sse)?;
    Ok((structure, report))
}

/// Columns `start..=end`, 1-based, clipped to the line length.
fn field(line: &str, start: usize, end: usize) -> &str {
    let len = line.len();
    if start > len {
        return "";
    }
    line.get(start - 1..end.min(len)).unwrap_or("")
}

fn malformed(line: usize, record: &'static str, reason: impl Into<String>) -> ParseError {
    ParseError::MalformedRecord { line, record, reason: reason.into() }
}

fn char_at(line: &str, col: usize) -> Option<char> {
    field(line, col, col).chars().next().filter(|c| *c != ' ')
}

fn parse_int(line: &str, start: usize, end: usize, lineno: usize, record: &'static str) -> Result<i32, ParseError> {
    let raw = field(line, start, end).trim();
    raw.parse()
        .map_err(|_| malformed(lineno, record, format!("columns {start}-{end} {raw:?} is not an integer")))
}

fn parse_float(line: &str, start: usize, end: usize, lineno: usize, record: &'static str) -> Result<f64, ParseError> {
    let raw = field(line, start, end).trim();
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(malformed(lineno, record, format!("columns {start}-{end} {raw:?} is not a number"))),
    }
}

fn parse_atom(line: &str, lineno: usize) -> Result<(ResidueId, [f64; 3], f64), ParseError> {
    if line.len() < 54 {
        return Err(malformed(lineno, "ATOM", "line shorter than 54 columns"));
    }
    let chain = field(line, 22, 22).chars().next().unwrap_or(' ');
    let seq_num = parse_int(line, 23, 26, lineno, "ATOM")?;
    let insertion_code = char_at(line, 27);
    let x = parse_float(line, 31, 38, lineno, "ATOM")?;
    let y = parse_float(line, 39, 46, lineno, "ATOM")?;
    let z = parse_float(line, 47, 54, lineno, "ATOM")?;
    let occupancy = if field(line, 55, 60).trim().is_empty() {
        1.0
    } else {
        parse_float(line, 55, 60, lineno, "ATOM")?
    };
    Ok((ResidueId::new(chain, seq_num, insertion_code), [x, y, z], occupancy))
}

fn parse_helix(line: &str, lineno: usize) -> Result<SseRange, ParseError> {
    let chain = field(line, 20, 20).chars().next().unwrap_or(' ');
    let end_chain = field(line, 32, 32).chars().next().unwrap_or(' ');
    if chain != end_chain {
        return Err(malformed(lineno, "HELIX", "range spans two chains"));
    }
    Ok(SseRange {
        kind: RangeKind::Helix,
        segment: SegmentId(0),
        chain,
        start: (parse_int(line, 22, 25, lineno, "HELIX")?, char_at(line, 26)),
        end: (parse_int(line, 34, 37, lineno, "HELIX")?, char_at(line, 38)),
    })
}

fn parse_sheet(line: &str, lineno: usize) -> Result<SseRange, ParseError> {
    let chain = field(line, 22, 22).chars().next().unwrap_or(' ');
    let end_chain = field(line, 33, 33).chars().next().unwrap_or(' ');
    if chain != end_chain {
        return Err(malformed(lineno, "SHEET", "range spans two chains"));
    }
    Ok(SseRange {
        kind: RangeKind::Sheet,
        segment: SegmentId(0),
        chain,
        start: (parse_int(line, 23, 26, lineno, "SHEET")?, char_at(line, 27)),
        end: (parse_int(line, 34, 37, lineno, "SHEET")?, char_at(line, 38)),
    })
}

/// Writes a Cα-only PDB: one HELIX/SHEET record per segment (first to last
/// residue of the segment in list order) followed by the ATOM records.
///
/// Coordinates are printed with three decimals, so re-parsing reproduces the
/// model exactly when the input coordinates were themselves read from PDB.
pub fn write_ca_pdb(protein: &ProteinStructure) -> String {
    let mut segments: Vec<(SseAnnotation, usize, usize)> = Vec::new();
    let mut seen: HashMap<SegmentId, usize> = HashMap::new();
    for (i, ann) in protein.annotations().iter().enumerate() {
        if let Some(seg) = ann.segment() {
            match seen.get(&seg) {
                Some(&slot) => segments[slot].2 = i,
                None => {
                    seen.insert(seg, segments.len());
                    segments.push((*ann, i, i));
                }
            }
        }
    }

    let residues = protein.residues();
    let icode = |r: &Residue| r.id.insertion_code.unwrap_or(' ');
    let mut out = String::new();
    let mut helix_serial = 0;
    let mut strand_serial = 0;
    for (ann, first, last) in &segments {
        let (a, b) = (&residues[*first], &residues[*last]);
        match ann {
            SseAnnotation::Helix(_) => {
                helix_serial += 1;
                let _ = writeln!(
                    out,
                    "HELIX  {:>3} {:>3} {:>3} {} {:>4}{} {:>3} {} {:>4}{}{:>2}",
                    helix_serial % 1000,
                    helix_serial % 1000,
                    a.aa.code(),
                    a.id.chain,
                    a.id.seq_num,
                    icode(a),
                    b.aa.code(),
                    b.id.chain,
                    b.id.seq_num,
                    icode(b),
                    1
                );
            }
            SseAnnotation::Strand(_) => {
                strand_serial += 1;
                let _ = writeln!(
                    out,
                    "SHEET  {:>3} {:>3}{:>2} {:>3} {}{:>4}{} {:>3} {}{:>4}{}{:>2}",
                    1,
                    strand_serial % 1000,
                    1,
                    a.aa.code(),
                    a.id.chain,
                    a.id.seq_num,
                    icode(a),
                    b.aa.code(),
                    b.id.chain,
                    b.id.seq_num,
                    icode(b),
                    0
                );
            }
            SseAnnotation::Coil => unreachable!("coil has no segment"),
        }
    }
    for (serial, r) in residues.iter().enumerate() {
        let _ = writeln!(
            out,
            "ATOM  {:>5}  CA  {:>3} {}{:>4}{}   {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}           C",
            (serial + 1) % 100_000,
            r.aa.code(),
            r.id.chain,
            r.id.seq_num,
            icode(r),
            r.ca[0],
            r.ca[1],
            r.ca[2],
            1.0,
            0.0
        );
    }
    out.push_str("END\n");
    out
}
