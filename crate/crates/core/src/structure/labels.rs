//! Class-label table ("sample details" CSV).

use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub protein_id: String,
    pub class_label: String,
}

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("label file is empty")]
    EmptyFile,
    #[error("missing column {0:?} in header")]
    MissingColumn(String),
    #[error("protein {0:?} is listed more than once")]
    DuplicateProtein(String),
    #[error("row {row}: empty {column}")]
    EmptyField { row: usize, column: &'static str },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Reads a headed CSV and returns one record per data row, locating the id
/// and label columns by header name.
pub fn load_labels(text: &str, id_column: &str, label_column: &str) -> Result<Vec<LabelRecord>, LabelError> {
    if text.trim().is_empty() {
        return Err(LabelError::EmptyFile);
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LabelError::MissingColumn(name.to_string()))
    };
    let id_idx = find(id_column)?;
    let label_idx = find(label_column)?;

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let protein_id = row.get(id_idx).unwrap_or("").to_string();
        let class_label = row.get(label_idx).unwrap_or("").to_string();
        if protein_id.is_empty() {
            return Err(LabelError::EmptyField { row: i + 1, column: "protein id" });
        }
        if class_label.is_empty() {
            return Err(LabelError::EmptyField { row: i + 1, column: "class label" });
        }
        if !seen.insert(protein_id.clone()) {
            return Err(LabelError::DuplicateProtein(protein_id));
        }
        out.push(LabelRecord { protein_id, class_label });
    }
    if out.is_empty() {
        return Err(LabelError::EmptyFile);
    }
    Ok(out)
}
