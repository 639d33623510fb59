//! Per-sentence embedding vectors: validation, the JSONL and `SEMB` binary
//! file formats, and (with the `remote` feature) the HTTP client for an
//! embedding service.
//!
//! Values are held in single precision as ingested and promoted to `f64`
//! by every downstream computation.

mod binary;
mod jsonl;
#[cfg(feature = "remote")]
pub mod remote;

use thiserror::Error;

pub use binary::{
    read_binary, read_binary_bytes, write_binary, write_binary_bytes, SEMB_MAGIC, SEMB_VERSION,
};
pub use jsonl::{read_jsonl, read_jsonl_str, write_jsonl, write_jsonl_string};

/// Vectors with a norm below this are rejected; their angle is undefined.
pub const MIN_NORM: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: i/o error: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: dimension {found} differs from {expected}")]
    DimMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: non-finite component")]
    NonFinite { line: usize },
    #[error("line {line}: vector norm below {MIN_NORM:e}")]
    NearZeroNorm { line: usize },
    #[error("line {line}: malformed: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("dimension {0} is too small; at least 2 is required")]
    DimTooSmall(usize),
    #[error("no vectors")]
    Empty,
    #[error("bad magic bytes {0:?}, expected \"SEMB\"")]
    BadMagic([u8; 4]),
    #[error("unsupported SEMB version {0}")]
    BadVersion(u8),
    #[error("header truncated: {actual} of {expected} bytes")]
    TruncatedHeader { expected: usize, actual: usize },
    #[error("payload size mismatch: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: u64, actual: u64 },
}

/// Ordered embedding vectors, row `t` belonging to sentence `t`.
///
/// Construction always validates: equal dimension (≥ 2), finite
/// components, norms of at least [`MIN_NORM`]. Row numbers in errors are
/// 1-based so they line up with JSONL line numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSeries {
    data: Vec<f32>,
    dim: usize,
    pub source_id: String,
}

impl EmbeddingSeries {
    /// Builds a series from a flat row-major buffer.
    pub fn from_flat(
        data: Vec<f32>,
        dim: usize,
        source_id: impl Into<String>,
    ) -> Result<Self, EmbeddingError> {
        if dim < 2 {
            return Err(EmbeddingError::DimTooSmall(dim));
        }
        if data.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(EmbeddingError::DimMismatch {
                line: data.len() / dim + 1,
                expected: dim,
                found: data.len() % dim,
            });
        }
        for (i, row) in data.chunks_exact(dim).enumerate() {
            validate_row(row, i + 1)?;
        }
        Ok(Self {
            data,
            dim,
            source_id: source_id.into(),
        })
    }

    pub fn from_rows<R: AsRef<[f32]>>(
        rows: &[R],
        source_id: impl Into<String>,
    ) -> Result<Self, EmbeddingError> {
        let first = rows.first().ok_or(EmbeddingError::Empty)?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(dim * rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(EmbeddingError::DimMismatch {
                    line: i + 1,
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(data, dim, source_id)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    /// Reorders rows so that output row `i` is input row `order[i]`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        debug_assert_eq!(order.len(), self.len());
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            dim: self.dim,
            source_id: self.source_id.clone(),
        }
    }
}

/// `line` is reported verbatim in errors.
pub(crate) fn validate_row(row: &[f32], line: usize) -> Result<(), EmbeddingError> {
    if row.iter().any(|x| !x.is_finite()) {
        return Err(EmbeddingError::NonFinite { line });
    }
    let norm = row
        .iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt();
    if norm < MIN_NORM {
        return Err(EmbeddingError::NearZeroNorm { line });
    }
    Ok(())
}
