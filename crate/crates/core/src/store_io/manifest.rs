use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_all, read_header, write_atomically, FormatError};

/// Metadata describing one image dataset and its embedding file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub dataset_id: String,
    pub description: String,
    pub conditions: String,
    pub frame_count: u64,
    pub source_uri: String,
    /// Embedding file, relative to the manifest's directory.
    pub embedding_file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expert_score: Option<u8>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<(), FormatError> {
        if self.dataset_id.trim().is_empty() {
            return Err(FormatError::SchemaViolation("dataset_id is empty".into()));
        }
        if let Some(score) = self.expert_score {
            if !(1..=5).contains(&score) {
                return Err(FormatError::SchemaViolation(format!(
                    "expert_score {score} outside 1..=5"
                )));
            }
        }
        if self.embedding_file.as_os_str().is_empty() || self.embedding_file.is_absolute() {
            return Err(FormatError::SchemaViolation(format!(
                "embedding_file {:?} must be a non-empty relative path",
                self.embedding_file
            )));
        }
        Ok(())
    }

    /// Checks `frame_count` against the embedding file's header.
    pub fn cross_validate(&self, manifest_dir: &Path) -> Result<(), FormatError> {
        self.validate()?;
        let header = read_header(manifest_dir.join(&self.embedding_file))?;
        if header.count != self.frame_count {
            return Err(FormatError::SchemaViolation(format!(
                "frame_count {} but embedding file holds {} rows",
                self.frame_count, header.count
            )));
        }
        Ok(())
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest, FormatError> {
    let bytes = read_all(path.as_ref())?;
    let text = String::from_utf8(bytes)
        .map_err(|e| FormatError::SchemaViolation(format!("manifest is not UTF-8: {e}")))?;
    let manifest: DatasetManifest =
        toml::from_str(&text).map_err(|e| FormatError::SchemaViolation(e.to_string()))?;
    manifest.validate()?;
    Ok(manifest)
}

pub fn write_manifest(
    manifest: &DatasetManifest,
    path: impl AsRef<Path>,
) -> Result<(), FormatError> {
    manifest.validate()?;
    let text =
        toml::to_string(manifest).map_err(|e| FormatError::SchemaViolation(e.to_string()))?;
    write_atomically(path.as_ref(), text.as_bytes())?;
    Ok(())
}
