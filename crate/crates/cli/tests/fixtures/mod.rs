//! PDB corpora on disk and a wrapper around the built binary.

#![allow(dead_code)]

#[path = "../../../core/tests/common/mod.rs"]
pub mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsr_core::structure::write_ca_pdb;
use tsr_core::ProteinStructure;

pub fn sse_tsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sse-tsr")).args(args).output().expect("binary runs")
}

/// Runs the binary and panics with its stderr unless it exits 0.
pub fn ok(args: &[&str]) {
    let out = sse_tsr(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
}

pub fn write_pdbs(dir: &Path, proteins: &[ProteinStructure]) {
    fs::create_dir_all(dir).unwrap();
    for p in proteins {
        fs::write(dir.join(format!("{}.pdb", p.id())), write_ca_pdb(p)).unwrap();
    }
}

/// Random proteins of 6..=16 residues, `n` per class, plus a
/// `protein,label` CSV. Returns (pdb dir, labels path).
pub fn write_corpus(root: &Path, classes: &[(&str, usize)], seed: u64) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pdb_dir = root.join("pdb");
    let mut labels = String::from("protein,label\n");
    let mut proteins = Vec::new();
    for (label, n) in classes {
        for i in 0..*n {
            let id = format!("{label}{i:03}");
            let len = rng.random_range(6..=16);
            proteins.push(common::synth::random_protein(&mut rng, &id, len));
            labels.push_str(&format!("{id},{label}\n"));
        }
    }
    write_pdbs(&pdb_dir, &proteins);
    let labels_path = root.join("labels.csv");
    fs::write(&labels_path, labels).unwrap();
    (pdb_dir, labels_path)
}

/// ingest → keygen → dict → matrix → dataset with default flags.
pub fn build_workdir(work: &Path, pdb_dir: &Path, labels: &Path, workers: &str) {
    let w = work.to_str().unwrap();
    ok(&["ingest", "--output", w, "--input", pdb_dir.to_str().unwrap(), "--workers", workers]);
    ok(&["keygen", "--output", w, "--workers", workers]);
    ok(&["dict", "--output", w, "--workers", workers]);
    ok(&["matrix", "--output", w, "--workers", workers]);
    ok(&["dataset", "--output", w, "--input", labels.to_str().unwrap(), "--seed", "42", "--workers", workers]);
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}
