//! ingest, keygen, dict and matrix.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use tsr_core::features::{
    deserialize_dictionary, deserialize_key_stream, serialize_dictionary, serialize_key_stream, serialize_matrix,
};
use tsr_core::structure::{parse_pdb_with, write_ca_pdb, ParseOptions, ParseReport};
use tsr_core::tsr::triangle_count;
use tsr_core::{build_dictionary, key_stream, matrix_from_stream, KeyPolicy, KeyStream, ProteinStructure};

use super::{read, write_csv};
use crate::layout::{fresh_dir, list_files, resolve_inputs, Workdir};
use crate::{Common, StructureInput};

const PDB_EXTENSIONS: &[&str] = &["pdb", "ent"];

#[derive(Serialize)]
struct IngestRow {
    protein_id: String,
    status: String,
    residues: usize,
    helix: usize,
    strand: usize,
    coil: usize,
    nonstandard_dropped: usize,
    altloc_dropped: usize,
    helix_sheet_conflicts: usize,
    extra_models: usize,
}

type Parsed = (String, Result<(ProteinStructure, ParseReport), String>);

/// Parses every input file; files that fail to parse are kept as errors.
fn parse_all(files: &[(String, PathBuf)], structure: &StructureInput) -> anyhow::Result<Vec<Parsed>> {
    let opts = ParseOptions { chains: structure.chains.clone() };
    files
        .par_iter()
        .map(|(id, path)| {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok((id.clone(), parse_pdb_with(&text, id, &opts).map_err(|e| e.to_string())))
        })
        .collect()
}

pub fn ingest(common: &Common, input: &Path, structure: &StructureInput) -> anyhow::Result<()> {
    let wd = Workdir::open(&common.output)?;
    let files = resolve_inputs(input, PDB_EXTENSIONS)?;
    ensure!(!files.is_empty(), "no PDB files under {}", input.display());
    let parsed = parse_all(&files, structure)?;

    fresh_dir(&wd.structures())?;
    let mut rows = Vec::with_capacity(parsed.len());
    for (id, result) in &parsed {
        let row = match result {
            Ok((p, report)) => {
                fs::write(wd.structures().join(format!("{id}.pdb")), write_ca_pdb(p))?;
                let (helix, strand, coil) = p.kind_counts();
                IngestRow {
                    protein_id: id.clone(),
                    status: "ok".into(),
                    residues: p.len(),
                    helix,
                    strand,
                    coil,
                    nonstandard_dropped: report.nonstandard_dropped,
                    altloc_dropped: report.altloc_dropped,
                    helix_sheet_conflicts: report.helix_sheet_conflicts,
                    extra_models: report.extra_models,
                }
            }
            Err(reason) => {
                warn!("{id}: rejected: {reason}");
                IngestRow {
                    protein_id: id.clone(),
                    status: format!("rejected: {reason}"),
                    residues: 0,
                    helix: 0,
                    strand: 0,
                    coil: 0,
                    nonstandard_dropped: 0,
                    altloc_dropped: 0,
                    helix_sheet_conflicts: 0,
                    extra_models: 0,
                }
            }
        };
        if row.helix_sheet_conflicts > 0 {
            warn!("{id}: {} residues in both HELIX and SHEET ranges, kept as helix", row.helix_sheet_conflicts);
        }
        rows.push(row);
    }
    write_csv(&wd.reports().join("ingest.csv"), &rows)?;
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    info!("ingested {ok} of {} structures", rows.len());
    ensure!(ok > 0, "every input file was rejected");
    Ok(())
}

#[derive(Serialize)]
struct DegeneracyRow {
    protein_id: String,
    residues: u64,
    triangles: u64,
    emitted: u64,
    degenerate: u64,
}

pub fn keygen(common: &Common, input: Option<&Path>, structure: &StructureInput) -> anyhow::Result<()> {
    let cfg = common.load_config()?;
    let wd = Workdir::open(&common.output)?;
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| wd.structures());
    let files = resolve_inputs(&input, PDB_EXTENSIONS)?;
    ensure!(!files.is_empty(), "no PDB files under {}", input.display());

    let mut proteins = Vec::new();
    for (id, result) in parse_all(&files, structure)? {
        match result {
            Ok((p, _)) if p.len() < 3 => warn!("{id}: only {} residues, skipped", p.len()),
            Ok((p, _)) => proteins.push(p),
            Err(reason) => warn!("{id}: rejected: {reason}"),
        }
    }
    ensure!(!proteins.is_empty(), "no usable structures");

    let streams: Vec<KeyStream> =
        proteins.par_iter().map(|p| key_stream(p, &cfg)).collect::<Result<_, _>>()?;
    fresh_dir(&wd.keys())?;
    let mut rows = Vec::with_capacity(streams.len());
    for s in &streams {
        fs::write(wd.keys().join(format!("{}.tsrk", s.protein_id)), serialize_key_stream(s))?;
        rows.push(DegeneracyRow {
            protein_id: s.protein_id.clone(),
            residues: s.residue_count,
            triangles: triangle_count(s.residue_count as usize),
            emitted: s.emitted(),
            degenerate: s.degenerate_skipped,
        });
    }
    write_csv(&wd.reports().join("degeneracy.csv"), &rows)?;
    info!(
        "wrote {} key streams ({} degenerate triangles skipped)",
        streams.len(),
        rows.iter().map(|r| r.degenerate).sum::<u64>()
    );
    Ok(())
}

/// Every key stream of `dir`, checked against the active config.
pub(super) fn load_streams(dir: &Path, expected: tsr_core::ConfigHash) -> anyhow::Result<Vec<KeyStream>> {
    let files = list_files(dir, &["tsrk"])?;
    ensure!(!files.is_empty(), "no key streams under {}", dir.display());
    let streams: Vec<KeyStream> = files
        .par_iter()
        .map(|(_, path)| {
            deserialize_key_stream(&read(path)?).with_context(|| format!("decoding {}", path.display()))
        })
        .collect::<anyhow::Result<_>>()?;
    if let Some(s) = streams.iter().find(|s| s.config_hash != expected) {
        bail!("key stream {} was built with config {}, active config is {expected}", s.protein_id, s.config_hash);
    }
    Ok(streams)
}

pub fn dict(common: &Common) -> anyhow::Result<()> {
    let cfg = common.load_config()?;
    let wd = Workdir::open(&common.output)?;
    let streams = load_streams(&wd.keys(), cfg.hash())?;
    let dict = build_dictionary(&streams)?;
    fs::write(wd.dictionary(), serialize_dictionary(&dict))?;
    info!("dictionary has {} keys from {} proteins", dict.len(), streams.len());
    Ok(())
}

pub(super) fn load_dictionary(wd: &Workdir) -> anyhow::Result<tsr_core::KeyDictionary> {
    let path = wd.dictionary();
    deserialize_dictionary(&read(&path)?).with_context(|| format!("decoding {}", path.display()))
}

pub fn matrix(common: &Common, input: Option<&Path>, inference: bool) -> anyhow::Result<()> {
    let cfg = common.load_config()?;
    let wd = Workdir::open(&common.output)?;
    let dict = load_dictionary(&wd)?;
    ensure!(dict.config_hash() == cfg.hash(), "dictionary config {} differs from active config {}", dict.config_hash(), cfg.hash());
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| wd.keys());
    let streams = load_streams(&input, cfg.hash())?;
    let policy = if inference { KeyPolicy::Inference } else { KeyPolicy::Training };
    let built = streams
        .par_iter()
        .map(|s| matrix_from_stream(s, &dict, policy))
        .collect::<Result<Vec<_>, _>>()?;

    fresh_dir(&wd.matrices())?;
    let mut dropped = 0;
    for b in &built {
        fs::write(wd.matrices().join(format!("{}.tsrm", b.matrix.protein_id())), serialize_matrix(&b.matrix))?;
        if b.dropped_unknown > 0 {
            warn!("{}: {} occurrences of keys outside the dictionary dropped", b.matrix.protein_id(), b.dropped_unknown);
        }
        dropped += b.dropped_unknown;
    }
    info!("wrote {} matrices with {} columns ({dropped} unknown occurrences dropped)", built.len(), dict.len());
    Ok(())
}
