//! Small dense numeric kernels shared across the crate.
//!
//! Everything here operates on `ndarray` types and stays deliberately
//! dependency-free: the matrices involved (covariances, normal equations,
//! topic distance matrices) are small enough that cyclic Jacobi and
//! Gaussian elimination are both adequate and bit-reproducible.

use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("matrix is singular or nearly singular (pivot {pivot:.3e} at column {col})")]
    Singular { col: usize, pivot: f64 },
    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance (divides by n-1); 0.0 for fewer than two values.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue;
/// eigenvectors are the *rows* of the returned matrix. The sign of each
/// eigenvector is fixed so its largest-magnitude entry is positive, which
/// keeps downstream results reproducible across runs.
pub fn symmetric_eigen(matrix: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>), NumericError> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(NumericError::NotSquare {
            rows: n,
            cols: matrix.ncols(),
        });
    }
    let mut a = matrix.clone();
    let mut v = Array2::<f64>::eye(n);
    let max_sweeps = 100;
    let mut converged = false;

    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[[i, j] ] * a[[i, j]];
            }
        }
        if off.sqrt() <= 1e-14 * (n as f64) {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(NumericError::NoConvergence(max_sweeps));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[[j, j]]
            .partial_cmp(&a[[i, i]])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut values = Array1::<f64>::zeros(n);
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (rank, &idx) in order.iter().enumerate() {
        values[rank] = a[[idx, idx]];
        let mut max_abs = 0.0;
        let mut sign = 1.0;
        for k in 0..n {
            let entry = v[[k, idx]];
            if entry.abs() > max_abs {
                max_abs = entry.abs();
                sign = if entry >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        for k in 0..n {
            vectors[[rank, k]] = sign * v[[k, idx]];
        }
    }
    Ok((values, vectors))
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>, NumericError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(NumericError::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = m[[col, col]].abs();
        for row in (col + 1)..n {
            if m[[row, col]].abs() > pivot_val {
                pivot_val = m[[row, col]].abs();
                pivot_row = row;
            }
        }
        if pivot_val < 1e-12 {
            return Err(NumericError::Singular {
                col,
                pivot: pivot_val,
            });
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap([col, k], [pivot_row, k]);
            }
            rhs.swap(col, pivot_row);
        }
        for row in (col + 1)..n {
            let factor = m[[row, col]] / m[[col, col]];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[[row, k]] -= factor * m[[col, k]];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = Array1::<f64>::zeros(n);
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[[row, k]] * x[k];
        }
        x[row] = acc / m[[row, row]];
    }
    Ok(x)
}

/// Inverse of a small square matrix; used for OLS covariance estimates.
pub fn invert(a: &Array2<f64>) -> Result<Array2<f64>, NumericError> {
    let n = a.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    for col in 0..n {
        let mut e = Array1::<f64>::zeros(n);
        e[col] = 1.0;
        let x = solve_linear(a, &e)?;
        for row in 0..n {
            inv[[row, col]] = x[row];
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eigen_recovers_diagonal() {
        let m = array![[3.0, 0.0], [0.0, 1.0]];
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vecs[[0, 0]].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_satisfies_definition() {
        let m = array![
            [4.0, 1.0, 0.5],
            [1.0, 3.0, -0.2],
            [0.5, -0.2, 1.0]
        ];
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        for r in 0..3 {
            let v: Vec<f64> = (0..3).map(|k| vecs[[r, k]]).collect();
            let mv: Vec<f64> = (0..3)
                .map(|i| (0..3).map(|j| m[[i, j]] * v[j]).sum())
                .collect();
            for i in 0..3 {
                assert!((mv[i] - vals[r] * v[i]).abs() < 1e-10);
            }
        }
        // Orthonormal rows.
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                let got: f64 = (0..3).map(|k| vecs[[i, k]] * vecs[[j, k]]).sum();
                assert!((got - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn solve_matches_hand_computation() {
        let a = array![[2.0, 1.0], [1.0, 3.0]];
        let b = array![5.0, 10.0];
        let x = solve_linear(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        let b = array![1.0, 2.0];
        assert!(matches!(
            solve_linear(&a, &b),
            Err(NumericError::Singular { .. })
        ));
    }
}
