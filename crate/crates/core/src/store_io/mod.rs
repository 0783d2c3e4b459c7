//! Persistence: the binary embedding file, dataset manifests and decision logs.
//!
//! Every writer goes through [`write_atomically`], so a failed write never
//! leaves a partial file at the destination.

mod decision_log;
mod embedding_file;
mod manifest;

use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub use decision_log::{format_record, parse_record, read_decision_log, DecisionLogWriter};
pub use embedding_file::{
    decode_embeddings, encode_embeddings, read_embeddings, read_header, write_embeddings,
    EmbeddingHeader, FORMAT_VERSION, HEADER_LEN, MAGIC,
};
pub use manifest::{read_manifest, write_manifest, DatasetManifest};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes {0:02x?}")]
    BadMagic([u8; 8]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: u64, actual: u64 },
    #[error("{0} unexpected trailing bytes after payload")]
    TrailingBytes(u64),
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("nothing to write")]
    EmptyInput,
    #[error("row {row} has dimension {actual}, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it into place.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub(crate) fn read_all(path: &Path) -> Result<Vec<u8>, FormatError> {
    Ok(fs::read(path)?)
}
