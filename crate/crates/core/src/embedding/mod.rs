//! Document embeddings: pluggable providers, a disk cache, incremental PCA
//! reduction, and cosine distance.

mod cache;
mod pca;
mod provider;

pub use cache::EmbeddingCache;
pub use pca::{fit_pca, fit_pca_chunked, transform, PcaModel, DEFAULT_PCA_CHUNK};
pub use provider::{EmbeddingProvider, HashEmbedder, OpenAiCompatEmbedder};

use crate::store::StoreError;
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding provider transport error: {0}")]
    Transport(String),
    #[error("provider returned row {index} of width {got}, expected {expected}")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        index: usize,
    },
    #[error("matrix width {got} does not match model dimension {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("cannot embed an empty text list")]
    EmptyInput,
    #[error("text at index {0} is empty")]
    EmptyText(usize),
    #[error("embedding row {0} contains non-finite values")]
    NonFinite(usize),
    #[error("embedding row {0} is all zeros")]
    ZeroRow(usize),
    #[error("cosine distance is undefined for zero vectors")]
    ZeroVector,
    #[error("degenerate input: all rows identical (zero variance)")]
    DegenerateInput,
    #[error("PCA requires at least 2 rows, got {0}")]
    InsufficientRows(usize),
    #[error("embedding provider not configured: {0}")]
    NotConfigured(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Numeric(#[from] crate::numeric::NumericError),
}

/// An n x D embedding matrix with row-aligned ids.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub vectors: Array2<f64>,
    pub ids: Vec<String>,
}

impl EmbeddingMatrix {
    pub fn new(vectors: Array2<f64>, ids: Vec<String>) -> Result<Self, EmbeddingError> {
        assert_eq!(vectors.nrows(), ids.len(), "row count must equal id count");
        for (i, row) in vectors.rows().into_iter().enumerate() {
            let mut all_zero = true;
            for &v in row.iter() {
                if !v.is_finite() {
                    return Err(EmbeddingError::NonFinite(i));
                }
                if v != 0.0 {
                    all_zero = false;
                }
            }
            if all_zero {
                return Err(EmbeddingError::ZeroRow(i));
            }
        }
        Ok(EmbeddingMatrix { vectors, ids })
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.vectors.row(i).to_vec()
    }
}

/// Quantize through f32 so cached (float32 on disk) and freshly computed
/// embeddings are bit-identical, keeping warm and cold runs in agreement.
fn quantize_f32(v: f64) -> f64 {
    v as f32 as f64
}

/// Embeds texts in batches of `batch_size`, one row per text, preserving
/// input order. Fails when the provider returns inconsistent widths.
pub fn embed(
    texts: &[String],
    provider: &dyn EmbeddingProvider,
    batch_size: usize,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    embed_with_ids(
        texts,
        &(0..texts.len()).map(|i| i.to_string()).collect::<Vec<_>>(),
        provider,
        batch_size,
        None,
    )
}

/// Full-featured embedding entry point: explicit row ids and an optional
/// disk cache keyed by (provider id, text hash).
pub fn embed_with_ids(
    texts: &[String],
    ids: &[String],
    provider: &dyn EmbeddingProvider,
    batch_size: usize,
    cache: Option<&EmbeddingCache>,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    assert!(batch_size >= 1, "batch_size must be positive");
    assert_eq!(texts.len(), ids.len(), "texts and ids must align");
    if texts.is_empty() {
        return Err(EmbeddingError::EmptyInput);
    }
    for (i, t) in texts.iter().enumerate() {
        if t.trim().is_empty() {
            return Err(EmbeddingError::EmptyText(i));
        }
    }

    let mut rows: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
    if let Some(cache) = cache {
        for (i, text) in texts.iter().enumerate() {
            if let Some(v) = cache.get(provider, text)? {
                rows[i] = Some(v);
            }
        }
    }

    let missing: Vec<usize> = (0..texts.len()).filter(|&i| rows[i].is_none()).collect();
    for chunk in missing.chunks(batch_size) {
        let batch: Vec<String> = chunk.iter().map(|&i| texts[i].clone()).collect();
        let embedded = provider.embed_batch(&batch)?;
        if embedded.len() != batch.len() {
            return Err(EmbeddingError::Transport(format!(
                "provider returned {} rows for a batch of {}",
                embedded.len(),
                batch.len()
            )));
        }
        for (&i, mut v) in chunk.iter().zip(embedded) {
            for x in &mut v {
                *x = quantize_f32(*x);
            }
            if let Some(cache) = cache {
                cache.put(provider, &texts[i], &v)?;
            }
            rows[i] = Some(v);
        }
    }

    let dim = rows[0].as_ref().expect("row 0 filled").len();
    let mut data = Vec::with_capacity(texts.len() * dim);
    for (i, row) in rows.into_iter().enumerate() {
        let row = row.expect("all rows filled");
        if row.len() != dim {
            return Err(EmbeddingError::DimensionMismatch {
                expected: dim,
                got: row.len(),
                index: i,
            });
        }
        data.extend_from_slice(&row);
    }
    let vectors = Array2::from_shape_vec((texts.len(), dim), data).expect("consistent shape");
    EmbeddingMatrix::new(vectors, ids.to_vec())
}

/// Cosine distance `1 - a.b / (|a||b|)`, clamped into [0, 2] against
/// floating-point drift. Zero vectors are rejected.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    let na = crate::numeric::norm(a);
    let nb = crate::numeric::norm(b);
    if na <= 0.0 || nb <= 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    let cos = crate::numeric::dot(a, b) / (na * nb);
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_rows_align_with_texts() {
        let provider = HashEmbedder::new(16);
        let m = embed(
            &["first text".to_string(), "second text".to_string()],
            &provider,
            8,
        )
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.dim(), 16);
    }

    #[test]
    fn identical_texts_identical_rows() {
        let provider = HashEmbedder::new(16);
        let m = embed(
            &["same words".to_string(), "same words".to_string()],
            &provider,
            8,
        )
        .unwrap();
        assert_eq!(m.row(0), m.row(1));
    }

    #[test]
    fn batch_size_does_not_change_results() {
        let provider = HashEmbedder::new(32);
        let texts: Vec<String> = (0..10).map(|i| format!("text number {}", i)).collect();
        let one = embed(&texts, &provider, 1).unwrap();
        let thirty_two = embed(&texts, &provider, 32).unwrap();
        assert_eq!(one.vectors, thirty_two.vectors);
    }

    #[test]
    fn cosine_distance_anchors() {
        assert_eq!(cosine_distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 2.0);
        assert!(matches!(
            cosine_distance(&[0.0, 0.0], &[1.0, 0.0]),
            Err(EmbeddingError::ZeroVector)
        ));
    }
}
