use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use fedsignal_core::{DocType, DocumentRecord};
use serde::{Deserialize, Serialize};

use super::{read_to_string, IngestError};

/// One manifest entry. `path` is resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub date: NaiveDate,
    pub doc_type: String,
    pub path: PathBuf,
}

/// Reads a JSON array manifest and every document body it points to.
/// Records come back ordered by date, then id.
pub fn load_documents(manifest_path: &Path) -> Result<Vec<DocumentRecord>, IngestError> {
    let text = read_to_string(manifest_path)?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
        .map_err(|e| IngestError::Manifest { path: manifest_path.into(), message: e.to_string() })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        if !seen.insert(e.doc_id.clone()) {
            return Err(IngestError::DuplicateDocId(e.doc_id));
        }
        let doc_type: DocType = e.doc_type.parse().map_err(|_| IngestError::UnknownDocType(e.doc_type.clone()))?;
        let path = base.join(&e.path);
        if !path.is_file() {
            return Err(IngestError::MissingFile(path));
        }
        let body = read_to_string(&path)?;
        if body.trim().is_empty() {
            return Err(IngestError::EmptyDocument(e.doc_id));
        }
        out.push(DocumentRecord { doc_id: e.doc_id, date: e.date, doc_type, text: body });
    }
    out.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.doc_id.cmp(&b.doc_id)));
    Ok(out)
}
