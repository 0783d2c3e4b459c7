//! Embedding file layout (all integers little-endian):
//!
//! | offset | size            | field                       |
//! |--------|-----------------|-----------------------------|
//! | 0      | 8               | magic `BIOBOTEM`            |
//! | 8      | 4               | version (u32, = 1)          |
//! | 12     | 4               | dim (u32)                   |
//! | 16     | 8               | count (u64)                 |
//! | 24     | count * dim * 4 | row-major binary32 payload  |

use std::path::Path;

use super::{read_all, write_atomically, FormatError};
use crate::feature_space::Embedding;
use crate::scalar::Scalar;

pub const MAGIC: [u8; 8] = *b"BIOBOTEM";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingHeader {
    pub dim: u32,
    pub count: u64,
}

impl EmbeddingHeader {
    fn payload_len(&self) -> Option<u64> {
        self.count.checked_mul(self.dim as u64)?.checked_mul(4)
    }
}

/// Serialises embeddings as binary32. Values that overflow binary32 are rejected.
pub fn encode_embeddings<T: Scalar>(embeddings: &[Embedding<T>]) -> Result<Vec<u8>, FormatError> {
    let first = embeddings.first().ok_or(FormatError::EmptyInput)?;
    let dim = first.dim();
    let dim_u32 = u32::try_from(dim)
        .map_err(|_| FormatError::SchemaViolation(format!("dimension {dim} exceeds u32")))?;
    let mut out = Vec::with_capacity(HEADER_LEN + embeddings.len() * dim * 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&dim_u32.to_le_bytes());
    out.extend_from_slice(&(embeddings.len() as u64).to_le_bytes());
    for (row, e) in embeddings.iter().enumerate() {
        if e.dim() != dim {
            return Err(FormatError::DimensionMismatch {
                row,
                expected: dim,
                actual: e.dim(),
            });
        }
        for (col, v) in e.as_slice().iter().enumerate() {
            let narrow = v.to_f32().filter(|x| x.is_finite());
            let narrow = narrow.ok_or(FormatError::NonFiniteValue { row, col })?;
            out.extend_from_slice(&narrow.to_le_bytes());
        }
    }
    Ok(out)
}

/// Writes the embedding file and returns its size in bytes.
pub fn write_embeddings<T: Scalar>(
    path: impl AsRef<Path>,
    embeddings: &[Embedding<T>],
) -> Result<u64, FormatError> {
    let bytes = encode_embeddings(embeddings)?;
    write_atomically(path.as_ref(), &bytes)?;
    Ok(bytes.len() as u64)
}

fn parse_header(bytes: &[u8]) -> Result<EmbeddingHeader, FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::TruncatedPayload {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    let magic: [u8; 8] = bytes[0..8].try_into().expect("8 bytes");
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let dim = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes"));
    let count = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    if dim == 0 {
        return Err(FormatError::SchemaViolation(
            "dimension must be positive".into(),
        ));
    }
    Ok(EmbeddingHeader { dim, count })
}

/// Parses a complete file image. Any inconsistency fails the whole decode.
pub fn decode_embeddings<T: Scalar>(bytes: &[u8]) -> Result<Vec<Embedding<T>>, FormatError> {
    let header = parse_header(bytes)?;
    let actual = (bytes.len() - HEADER_LEN) as u64;
    let expected = header.payload_len().ok_or(FormatError::TruncatedPayload {
        expected: u64::MAX,
        actual,
    })?;
    if actual < expected {
        return Err(FormatError::TruncatedPayload { expected, actual });
    }
    if actual > expected {
        return Err(FormatError::TrailingBytes(actual - expected));
    }
    let dim = header.dim as usize;
    bytes[HEADER_LEN..]
        .chunks_exact(dim * 4)
        .enumerate()
        .map(|(row, chunk)| {
            let values = chunk
                .chunks_exact(4)
                .enumerate()
                .map(|(col, b)| {
                    let v = f32::from_le_bytes(b.try_into().expect("4 bytes"));
                    T::from(v)
                        .filter(|x| x.is_finite())
                        .ok_or(FormatError::NonFiniteValue { row, col })
                })
                .collect::<Result<Vec<T>, _>>()?;
            Ok(Embedding::new(values).expect("validated finite, nonempty row"))
        })
        .collect()
}

pub fn read_embeddings<T: Scalar>(
    path: impl AsRef<Path>,
) -> Result<Vec<Embedding<T>>, FormatError> {
    decode_embeddings(&read_all(path.as_ref())?)
}

/// Reads and validates only the header (magic, version, payload length).
pub fn read_header(path: impl AsRef<Path>) -> Result<EmbeddingHeader, FormatError> {
    let bytes = read_all(path.as_ref())?;
    let header = parse_header(&bytes)?;
    let actual = (bytes.len() - HEADER_LEN) as u64;
    match header.payload_len() {
        Some(expected) if expected == actual => Ok(header),
        Some(expected) if expected < actual => Err(FormatError::TrailingBytes(actual - expected)),
        expected => Err(FormatError::TruncatedPayload {
            expected: expected.unwrap_or(u64::MAX),
            actual,
        }),
    }
}
