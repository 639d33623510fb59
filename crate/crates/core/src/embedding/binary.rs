//! `SEMB` container: `b"SEMB"`, `u8` version (1), `u32` LE dim, `u64` LE
//! count, then `count * dim` little-endian `f32` values in row-major order.

use std::path::Path;

use super::{EmbeddingError, EmbeddingSeries};

pub const SEMB_MAGIC: [u8; 4] = *b"SEMB";
pub const SEMB_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 8;

pub fn read_binary(path: impl AsRef<Path>) -> Result<EmbeddingSeries, EmbeddingError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_binary_bytes(&bytes, path.display().to_string())
}

pub fn read_binary_bytes(
    bytes: &[u8],
    source_id: impl Into<String>,
) -> Result<EmbeddingSeries, EmbeddingError> {
    if bytes.len() < 4 {
        return Err(EmbeddingError::TruncatedHeader {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != SEMB_MAGIC {
        return Err(EmbeddingError::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(EmbeddingError::TruncatedHeader {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    if bytes[4] != SEMB_VERSION {
        return Err(EmbeddingError::BadVersion(bytes[4]));
    }
    let dim = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[9..17].try_into().unwrap());
    let payload = &bytes[HEADER_LEN..];
    let expected = count
        .checked_mul(dim as u64)
        .and_then(|n| n.checked_mul(4))
        .unwrap_or(u64::MAX);
    if payload.len() as u64 != expected {
        return Err(EmbeddingError::TruncatedPayload {
            expected,
            actual: payload.len() as u64,
        });
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    EmbeddingSeries::from_flat(data, dim, source_id)
}

pub fn write_binary_bytes(series: &EmbeddingSeries) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + series.as_flat().len() * 4);
    out.extend_from_slice(&SEMB_MAGIC);
    out.push(SEMB_VERSION);
    out.extend_from_slice(&(series.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(series.len() as u64).to_le_bytes());
    for x in series.as_flat() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn write_binary(
    series: &EmbeddingSeries,
    path: impl AsRef<Path>,
) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    std::fs::write(path, write_binary_bytes(series)).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })
}
