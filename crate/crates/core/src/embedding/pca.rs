//! Incremental PCA over embedding matrices.
//!
//! Statistics (mean and centered scatter) accumulate chunk by chunk, so the
//! full data never has to be held twice; the covariance eigendecomposition
//! happens once at the end. The reduced dimension is the smallest one whose
//! cumulative explained variance reaches the target, optionally capped.

use super::{EmbeddingError, EmbeddingMatrix};
use crate::numeric::symmetric_eigen;
use crate::store::StoreError;
use ndarray::{Array1, Array2};
use std::path::Path;

pub const DEFAULT_PCA_CHUNK: usize = 1024;

#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// d x D matrix with orthonormal rows.
    pub components: Array2<f64>,
    /// Variance share of each kept component, non-increasing.
    pub explained_variance_ratio: Array1<f64>,
    pub reduced_dim: usize,
}

/// Fits PCA with the default chunk size.
pub fn fit_pca(
    x: &EmbeddingMatrix,
    variance_target: f64,
    max_dim: Option<usize>,
) -> Result<PcaModel, EmbeddingError> {
    fit_pca_chunked(x, variance_target, max_dim, DEFAULT_PCA_CHUNK)
}

/// Fits PCA by accumulating mean/scatter over fixed-size row chunks.
/// `variance_target` is in (0, 1]; `max_dim` caps the kept dimension.
pub fn fit_pca_chunked(
    x: &EmbeddingMatrix,
    variance_target: f64,
    max_dim: Option<usize>,
    chunk_size: usize,
) -> Result<PcaModel, EmbeddingError> {
    assert!(
        variance_target > 0.0 && variance_target <= 1.0,
        "variance_target must be in (0, 1]"
    );
    assert!(chunk_size >= 1, "chunk_size must be positive");
    let n = x.len();
    if n < 2 {
        return Err(EmbeddingError::InsufficientRows(n));
    }
    let d_full = x.dim();

    // Merge per-chunk (count, mean, centered scatter) into running totals.
    let mut count = 0usize;
    let mut mean = Array1::<f64>::zeros(d_full);
    let mut scatter = Array2::<f64>::zeros((d_full, d_full));
    for chunk_start in (0..n).step_by(chunk_size) {
        let chunk_end = (chunk_start + chunk_size).min(n);
        let m = chunk_end - chunk_start;
        let mut chunk_mean = Array1::<f64>::zeros(d_full);
        for r in chunk_start..chunk_end {
            for c in 0..d_full {
                chunk_mean[c] += x.vectors[[r, c]];
            }
        }
        chunk_mean.mapv_inplace(|v| v / m as f64);
        let mut chunk_scatter = Array2::<f64>::zeros((d_full, d_full));
        for r in chunk_start..chunk_end {
            let centered: Vec<f64> = (0..d_full)
                .map(|c| x.vectors[[r, c]] - chunk_mean[c])
                .collect();
            for i in 0..d_full {
                if centered[i] == 0.0 {
                    continue;
                }
                for j in i..d_full {
                    chunk_scatter[[i, j]] += centered[i] * centered[j];
                }
            }
        }
        // Fill the symmetric lower triangle.
        for i in 0..d_full {
            for j in 0..i {
                chunk_scatter[[i, j]] = chunk_scatter[[j, i]];
            }
        }
        if count == 0 {
            mean = chunk_mean;
            scatter = chunk_scatter;
            count = m;
        } else {
            let total = (count + m) as f64;
            let w = count as f64 * m as f64 / total;
            let delta: Vec<f64> = (0..d_full).map(|c| chunk_mean[c] - mean[c]).collect();
            for i in 0..d_full {
                for j in 0..d_full {
                    scatter[[i, j]] += chunk_scatter[[i, j]] + w * delta[i] * delta[j];
                }
            }
            for c in 0..d_full {
                mean[c] += m as f64 / total * delta[c];
            }
            count += m;
        }
    }

    let covariance = scatter.mapv(|v| v / (n - 1) as f64);
    let total_variance: f64 = (0..d_full).map(|i| covariance[[i, i]]).sum();
    if total_variance <= 1e-18 {
        return Err(EmbeddingError::DegenerateInput);
    }

    let (eigenvalues, eigenvectors) = symmetric_eigen(&covariance)?;
    let ratios: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| (l.max(0.0)) / total_variance)
        .collect();

    let cap = max_dim.unwrap_or(d_full).min(d_full).max(1);
    let mut cumulative = 0.0;
    let mut keep = cap;
    for (i, &r) in ratios.iter().enumerate() {
        cumulative += r;
        if cumulative >= variance_target - 1e-12 {
            keep = (i + 1).min(cap);
            break;
        }
    }

    let mut components = Array2::<f64>::zeros((keep, d_full));
    for r in 0..keep {
        for c in 0..d_full {
            components[[r, c]] = eigenvectors[[r, c]];
        }
    }
    let explained_variance_ratio = Array1::from_vec(ratios[..keep].to_vec());
    Ok(PcaModel {
        mean,
        components,
        explained_variance_ratio,
        reduced_dim: keep,
    })
}

/// Projects rows of `x` into the model's component space: `(x - mean) C^T`.
pub fn transform(model: &PcaModel, x: &Array2<f64>) -> Result<Array2<f64>, EmbeddingError> {
    let d_full = model.mean.len();
    if x.ncols() != d_full {
        return Err(EmbeddingError::WidthMismatch {
            expected: d_full,
            got: x.ncols(),
        });
    }
    let n = x.nrows();
    let d = model.reduced_dim;
    let mut out = Array2::<f64>::zeros((n, d));
    for r in 0..n {
        for k in 0..d {
            let mut acc = 0.0;
            for c in 0..d_full {
                acc += (x[[r, c]] - model.mean[c]) * model.components[[k, c]];
            }
            out[[r, k]] = acc;
        }
    }
    Ok(out)
}

impl PcaModel {
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, EmbeddingError> {
        let x = Array2::from_shape_vec((1, row.len()), row.to_vec())
            .map_err(|_| EmbeddingError::WidthMismatch {
                expected: self.mean.len(),
                got: row.len(),
            })?;
        Ok(transform(self, &x)?.row(0).to_vec())
    }

    /// Portable binary container with a shape header.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let d_full = self.mean.len();
        let d = self.reduced_dim;
        let mut buf = Vec::new();
        buf.extend_from_slice(b"TLPCA\0\0\0");
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.extend_from_slice(&(d_full as u64).to_le_bytes());
        buf.extend_from_slice(&(d as u64).to_le_bytes());
        for v in self.mean.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.components.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.explained_variance_ratio.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        crate::store::atomic_write(path, &buf)
    }

    pub fn load(path: &Path) -> Result<PcaModel, StoreError> {
        let bytes = std::fs::read(path).map_err(|e| StoreError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let name = path.display().to_string();
        if bytes.len() < 28 || &bytes[0..8] != b"TLPCA\0\0\0" {
            return Err(StoreError::BadMagic(name));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != 1 {
            return Err(StoreError::BadVersion(version));
        }
        let d_full = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let d = u64::from_le_bytes(bytes[20..28].try_into().unwrap()) as usize;
        let need = 28 + (d_full + d * d_full + d) * 8;
        if bytes.len() < need {
            return Err(StoreError::Truncated(name));
        }
        let mut offset = 28;
        let mut read_f64s = |count: usize| -> Vec<f64> {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap()));
                offset += 8;
            }
            out
        };
        let mean = Array1::from_vec(read_f64s(d_full));
        let components =
            Array2::from_shape_vec((d, d_full), read_f64s(d * d_full)).expect("shape from header");
        let explained_variance_ratio = Array1::from_vec(read_f64s(d));
        Ok(PcaModel {
            mean,
            components,
            explained_variance_ratio,
            reduced_dim: d,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matrix_from(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        let n = rows.len();
        let d = rows[0].len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        EmbeddingMatrix::new(
            Array2::from_shape_vec((n, d), flat).unwrap(),
            (0..n).map(|i| i.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rank_one_data_needs_one_component() {
        let base = [1.0, 2.0, 3.0, 4.0];
        let rows: Vec<Vec<f64>> = (1..=6)
            .map(|k| base.iter().map(|b| b * k as f64 + 0.5).collect())
            .collect();
        let m = matrix_from(rows);
        let model = fit_pca(&m, 0.9, None).unwrap();
        assert_eq!(model.reduced_dim, 1);
        assert!(model.explained_variance_ratio[0] > 0.999_999);
    }

    #[test]
    fn isotropic_gaussian_needs_all_dims_at_target_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..3).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        let m = matrix_from(rows);
        let model = fit_pca(&m, 1.0, None).unwrap();
        assert_eq!(model.reduced_dim, 3);
    }

    #[test]
    fn all_rows_identical_is_degenerate() {
        let rows: Vec<Vec<f64>> = (0..5).map(|_| vec![1.0, 2.0, 3.0]).collect();
        let m = matrix_from(rows);
        assert!(matches!(
            fit_pca(&m, 0.9, None),
            Err(EmbeddingError::DegenerateInput)
        ));
    }

    #[test]
    fn transforming_the_mean_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let m = matrix_from(rows);
        let model = fit_pca(&m, 0.9, None).unwrap();
        let projected = model.transform_row(&model.mean.to_vec()).unwrap();
        for v in projected {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn identity_model_leaves_data_unchanged() {
        let model = PcaModel {
            mean: Array1::zeros(3),
            components: Array2::eye(3),
            explained_variance_ratio: Array1::from_vec(vec![0.5, 0.3, 0.2]),
            reduced_dim: 3,
        };
        let x = Array2::from_shape_vec((2, 3), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let y = transform(&model, &x).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn width_mismatch_rejected() {
        let model = PcaModel {
            mean: Array1::zeros(3),
            components: Array2::eye(3),
            explained_variance_ratio: Array1::from_vec(vec![1.0, 0.0, 0.0]),
            reduced_dim: 3,
        };
        let x = Array2::zeros((2, 4));
        assert!(matches!(
            transform(&model, &x),
            Err(EmbeddingError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn chunked_fit_matches_single_chunk_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..6).map(|_| rng.random::<f64>()).collect())
            .collect();
        let m = matrix_from(rows);
        let a = fit_pca_chunked(&m, 0.95, None, 300).unwrap();
        let b = fit_pca_chunked(&m, 0.95, None, 64).unwrap();
        assert_eq!(a.reduced_dim, b.reduced_dim);
        for (ra, rb) in a
            .explained_variance_ratio
            .iter()
            .zip(b.explained_variance_ratio.iter())
        {
            assert!((ra - rb).abs() < 1e-9);
        }
    }

    #[test]
    fn model_saves_and_loads() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..5).map(|_| rng.random::<f64>()).collect())
            .collect();
        let m = matrix_from(rows);
        let model = fit_pca(&m, 0.9, Some(3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pca.bin");
        model.save(&path).unwrap();
        let back = PcaModel::load(&path).unwrap();
        assert_eq!(model.mean, back.mean);
        assert_eq!(model.components, back.components);
        assert_eq!(
            model.explained_variance_ratio,
            back.explained_variance_ratio
        );
    }
}
