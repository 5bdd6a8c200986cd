//! Work-directory layout.
//!
//! ```text
//! LAYOUT                     layout version stamp
//! structures/<id>.pdb        normalized Cα structures (ingest)
//! reports/ingest.csv         per-file parse counters (ingest)
//! keys/<id>.tsrk             aggregated key streams (keygen)
//! reports/degeneracy.csv     triangle totals per protein (keygen)
//! dictionary.tsrd            key dictionary (dict)
//! matrices/<id>.tsrm         sparse matrices (matrix)
//! manifest.csv, manifest.json                       (dataset)
//! batches/<split>/...        dense trainer batches (export)
//! similarity/<mode>.csv      all-vs-all scores (compare)
//! knn/...                    predictions and summary (knn)
//! stats/...                  statistics tables (stats)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

pub const LAYOUT_VERSION: &str = "sse-tsr-workdir-v1";

#[derive(Debug, Clone)]
pub struct Workdir {
    root: PathBuf,
}

impl Workdir {
    /// Creates the directory if needed and checks or writes the layout stamp.
    pub fn open(root: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        let stamp = root.join("LAYOUT");
        match fs::read_to_string(&stamp) {
            Ok(found) if found.trim() == LAYOUT_VERSION => {}
            Ok(found) => bail!("{} has layout {:?}, expected {LAYOUT_VERSION:?}", root.display(), found.trim()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => fs::write(&stamp, format!("{LAYOUT_VERSION}\n"))?,
            Err(e) => return Err(e.into()),
        }
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn structures(&self) -> PathBuf {
        self.root.join("structures")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn keys(&self) -> PathBuf {
        self.root.join("keys")
    }

    pub fn dictionary(&self) -> PathBuf {
        self.root.join("dictionary.tsrd")
    }

    pub fn matrices(&self) -> PathBuf {
        self.root.join("matrices")
    }

    /// Manifest path of a matrix, relative to the root.
    pub fn matrix_rel(id: &str) -> String {
        format!("matrices/{id}.tsrm")
    }

    pub fn manifest_csv(&self) -> PathBuf {
        self.root.join("manifest.csv")
    }

    pub fn manifest_header(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn batches(&self) -> PathBuf {
        self.root.join("batches")
    }

    pub fn similarity(&self) -> PathBuf {
        self.root.join("similarity")
    }

    pub fn knn(&self) -> PathBuf {
        self.root.join("knn")
    }

    pub fn stats(&self) -> PathBuf {
        self.root.join("stats")
    }
}

/// Files in `dir` with extension `ext`, as (stem, path) sorted by stem.
pub fn list_files(dir: &Path, exts: &[&str]) -> anyhow::Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && ext.as_deref().is_some_and(|e| exts.contains(&e)) {
            let stem = path.file_stem().and_then(|s| s.to_str()).context("non-UTF-8 file name")?.to_string();
            out.push((stem, path));
        }
    }
    out.sort();
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        bail!("two input files share the id {:?}", w[0].0);
    }
    Ok(out)
}

/// A single file, or every matching file of a directory.
pub fn resolve_inputs(input: &Path, exts: &[&str]) -> anyhow::Result<Vec<(String, PathBuf)>> {
    if input.is_file() {
        let stem = input.file_stem().and_then(|s| s.to_str()).context("non-UTF-8 file name")?;
        Ok(vec![(stem.to_string(), input.to_path_buf())])
    } else {
        list_files(input, exts)
    }
}

/// Replaces `dir` with an empty directory so no stale files survive a rerun.
pub fn fresh_dir(dir: &Path) -> anyhow::Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).with_context(|| format!("clearing {}", dir.display()))?;
    }
    fs::create_dir_all(dir)?;
    Ok(())
}
