//! From embeddings to the scalar semantic phase: angular increments between
//! consecutive sentence vectors, their compensated running sum, and the
//! seeded sentence-order permutation used by the shuffle null model.

use thiserror::Error;

use crate::corpus::MIN_SENTENCES;
use crate::embedding::{EmbeddingSeries, MIN_NORM};
use crate::rng;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("vector {index} has norm below {MIN_NORM:e}")]
    ZeroNorm { index: usize },
    #[error("vector {index}: dimension {found} differs from {expected}")]
    DimMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("only {found} vectors; at least {MIN_SENTENCES} are required")]
    TooFewSentences { found: usize },
    #[error("value {index} is not finite")]
    NonFinite { index: usize },
    #[error("empty series")]
    Empty,
}

/// Increments between consecutive sentences, in radians.
///
/// Series built by [`increments`] lie in `[0, π]`. Synthetic signals built
/// with [`IncrementSeries::from_values`] only need to be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSeries {
    values: Vec<f64>,
    pub source_id: String,
}

impl IncrementSeries {
    pub fn from_values(
        values: Vec<f64>,
        source_id: impl Into<String>,
    ) -> Result<Self, SignalError> {
        if values.is_empty() {
            return Err(SignalError::Empty);
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(SignalError::NonFinite { index });
        }
        Ok(Self {
            values,
            source_id: source_id.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same increments in a seeded random order.
    pub fn permuted(&self, seed: u64) -> Self {
        Self {
            values: rng::shuffled(&self.values, seed),
            source_id: self.source_id.clone(),
        }
    }
}

/// Cumulative phase with `phase[0] = 0`, one point per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    values: Vec<f64>,
    pub source_id: String,
}

impl PhaseSeries {
    /// Wraps an arbitrary finite series, e.g. a hand-made test phase.
    pub fn from_values(
        values: Vec<f64>,
        source_id: impl Into<String>,
    ) -> Result<Self, SignalError> {
        if values.is_empty() {
            return Err(SignalError::Empty);
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(SignalError::NonFinite { index });
        }
        Ok(Self {
            values,
            source_id: source_id.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Angle between two vectors: `acos` of the cosine similarity, with the
/// cosine clamped to `[-1, 1]`.
pub fn angular_increment(v: &[f64], w: &[f64]) -> Result<f64, SignalError> {
    if v.len() != w.len() {
        return Err(SignalError::DimMismatch {
            index: 1,
            expected: v.len(),
            found: w.len(),
        });
    }
    angle(v.iter().copied().zip(w.iter().copied()))
}

fn angle(pairs: impl Iterator<Item = (f64, f64)>) -> Result<f64, SignalError> {
    let (mut dot, mut nv, mut nw) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in pairs {
        dot += a * b;
        nv += a * a;
        nw += b * b;
    }
    if nv.sqrt() < MIN_NORM {
        return Err(SignalError::ZeroNorm { index: 0 });
    }
    if nw.sqrt() < MIN_NORM {
        return Err(SignalError::ZeroNorm { index: 1 });
    }
    // sqrt(|v|²|w|²) rather than |v||w|: identical vectors give exactly 1.
    Ok((dot / (nv * nw).sqrt()).clamp(-1.0, 1.0).acos())
}

fn with_index(err: SignalError, t: usize) -> SignalError {
    match err {
        SignalError::ZeroNorm { index } => SignalError::ZeroNorm { index: t + index },
        SignalError::DimMismatch {
            expected, found, ..
        } => SignalError::DimMismatch {
            index: t + 1,
            expected,
            found,
        },
        e => e,
    }
}

/// `increments[t] = angle(v_t, v_{t+1})`, computed in double precision.
pub fn increments(series: &EmbeddingSeries) -> Result<IncrementSeries, SignalError> {
    if series.len() < MIN_SENTENCES {
        return Err(SignalError::TooFewSentences {
            found: series.len(),
        });
    }
    let values = (0..series.len() - 1)
        .map(|t| {
            let (v, w) = (series.row(t), series.row(t + 1));
            angle(
                v.iter()
                    .map(|&x| f64::from(x))
                    .zip(w.iter().map(|&x| f64::from(x))),
            )
            .map_err(|e| with_index(e, t))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IncrementSeries {
        values,
        source_id: series.source_id.clone(),
    })
}

/// Same as [`increments`] for double-precision rows held by the caller.
pub fn increments_of<V: AsRef<[f64]>>(
    rows: &[V],
    source_id: impl Into<String>,
) -> Result<IncrementSeries, SignalError> {
    if rows.len() < MIN_SENTENCES {
        return Err(SignalError::TooFewSentences { found: rows.len() });
    }
    let dim = rows[0].as_ref().len();
    let values = rows
        .windows(2)
        .enumerate()
        .map(|(t, pair)| {
            let (v, w) = (pair[0].as_ref(), pair[1].as_ref());
            if w.len() != dim {
                return Err(SignalError::DimMismatch {
                    index: t + 1,
                    expected: dim,
                    found: w.len(),
                });
            }
            angular_increment(v, w).map_err(|e| with_index(e, t))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IncrementSeries {
        values,
        source_id: source_id.into(),
    })
}

/// Running sum with `phase[0] = 0`, accumulated with Neumaier compensation.
pub fn build_phase(inc: &IncrementSeries) -> PhaseSeries {
    let mut values = Vec::with_capacity(inc.len() + 1);
    values.push(0.0);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in inc.values() {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        values.push(sum + comp);
    }
    PhaseSeries {
        values,
        source_id: inc.source_id.clone(),
    }
}

/// Uniformly random reordering of the sentence vectors, reproducible from
/// `seed` (see [`rng::permutation`]).
pub fn permute(series: &EmbeddingSeries, seed: u64) -> EmbeddingSeries {
    series.reordered(&rng::permutation(series.len(), seed))
}
