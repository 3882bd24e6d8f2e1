//! Elastic net by coordinate descent with k-fold cross-validated
//! hyperparameter selection.
//!
//! Objective (sklearn parameterization):
//!
//! ```text
//! (1/2n) ||y - X b||^2 + alpha * (l1 ||b||_1 + (1 - l1)/2 ||b||_2^2)
//! ```
//!
//! Columns are standardized internally (zero mean, unit population
//! variance) and y is centered; reported coefficients are mapped back to
//! the original scale with an intercept.

use super::OutcomeError;
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElasticNetConfig {
    pub l1_ratios: Vec<f64>,
    /// Explicit alpha grid; when None a log-spaced grid is derived from the
    /// data (alpha_max down to alpha_max * eps).
    pub alphas: Option<Vec<f64>>,
    pub n_alphas: usize,
    pub alpha_eps: f64,
    pub cv_folds: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ElasticNetConfig {
    fn default() -> Self {
        ElasticNetConfig {
            l1_ratios: vec![0.5],
            alphas: None,
            n_alphas: 20,
            alpha_eps: 1e-3,
            cv_folds: 5,
            max_iter: 10_000,
            tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElasticNetFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub alpha: f64,
    pub l1_ratio: f64,
    pub converged: bool,
    pub n_iter: usize,
    pub cv_mse: f64,
    /// Out-of-fold RSS of the selected hyperparameters (CV-predicted).
    pub cv_rss: f64,
}

impl ElasticNetFit {
    pub fn predict(&self, x: &Array2<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| {
                self.intercept
                    + self
                        .coefficients
                        .iter()
                        .enumerate()
                        .map(|(j, b)| b * x[[i, j]])
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn rss(&self, x: &Array2<f64>, y: &[f64]) -> f64 {
        self.predict(x)
            .iter()
            .zip(y)
            .map(|(p, t)| (p - t) * (p - t))
            .sum()
    }
}

struct Standardized {
    x: Array2<f64>,
    col_mean: Vec<f64>,
    col_std: Vec<f64>,
    y_centered: Vec<f64>,
    y_mean: f64,
}

fn standardize(x: &Array2<f64>, y: &[f64]) -> Standardized {
    let (n, p) = (x.nrows(), x.ncols());
    let mut col_mean = vec![0.0; p];
    let mut col_std = vec![0.0; p];
    for j in 0..p {
        let mean = (0..n).map(|i| x[[i, j]]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (x[[i, j]] - mean).powi(2)).sum::<f64>() / n as f64;
        col_mean[j] = mean;
        col_std[j] = var.sqrt();
    }
    let mut xs = Array2::<f64>::zeros((n, p));
    for i in 0..n {
        for j in 0..p {
            // Constant columns standardize to zero and stay out of the fit.
            xs[[i, j]] = if col_std[j] > 1e-12 {
                (x[[i, j]] - col_mean[j]) / col_std[j]
            } else {
                0.0
            };
        }
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let y_centered: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    Standardized {
        x: xs,
        col_mean,
        col_std,
        y_centered,
        y_mean,
    }
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Coordinate descent on standardized data. Returns (beta, converged, iters).
fn coordinate_descent(
    xs: &Array2<f64>,
    y: &[f64],
    alpha: f64,
    l1_ratio: f64,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, bool, usize) {
    let (n, p) = (xs.nrows(), xs.ncols());
    let nf = n as f64;
    // Per-column second moments (1 for standardized, 0 for dropped columns).
    let col_sq: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| xs[[i, j]] * xs[[i, j]]).sum::<f64>() / nf)
        .collect();
    let mut beta = vec![0.0; p];
    let mut residual: Vec<f64> = y.to_vec();
    let l1_penalty = alpha * l1_ratio;
    let l2_penalty = alpha * (1.0 - l1_ratio);

    for iter in 0..max_iter {
        let mut max_step: f64 = 0.0;
        for j in 0..p {
            if col_sq[j] <= 1e-24 {
                continue;
            }
            let old = beta[j];
            let mut rho = 0.0;
            for i in 0..n {
                rho += xs[[i, j]] * residual[i];
            }
            rho = rho / nf + col_sq[j] * old;
            let new = soft_threshold(rho, l1_penalty) / (col_sq[j] + l2_penalty);
            if new != old {
                for i in 0..n {
                    residual[i] += xs[[i, j]] * (old - new);
                }
                beta[j] = new;
                max_step = max_step.max((new - old).abs());
            }
        }
        if max_step < tol {
            return (beta, true, iter + 1);
        }
    }
    (beta, false, max_iter)
}

fn alpha_grid(xs: &Array2<f64>, y: &[f64], l1_ratio: f64, cfg: &ElasticNetConfig) -> Vec<f64> {
    if let Some(a) = &cfg.alphas {
        return a.clone();
    }
    let (n, p) = (xs.nrows(), xs.ncols());
    let nf = n as f64;
    let mut max_corr: f64 = 0.0;
    for j in 0..p {
        let c: f64 = (0..n).map(|i| xs[[i, j]] * y[i]).sum::<f64>() / nf;
        max_corr = max_corr.max(c.abs());
    }
    let l1 = l1_ratio.max(1e-3);
    let alpha_max = (max_corr / l1).max(1e-12);
    let alpha_min = alpha_max * cfg.alpha_eps;
    let count = cfg.n_alphas.max(2);
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (alpha_max.ln() * (1.0 - t) + alpha_min.ln() * t).exp()
        })
        .collect()
}

/// Seeded shuffled round-robin fold assignment.
fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let mut assignment = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        assignment[idx] = pos % folds;
    }
    assignment
}

/// Fits an elastic net with (alpha, l1_ratio) chosen by k-fold CV on mean
/// squared error; coefficients come back on the original scale.
pub fn elastic_net_fit(
    x: &Array2<f64>,
    y: &[f64],
    cfg: &ElasticNetConfig,
) -> Result<ElasticNetFit, OutcomeError> {
    let n = x.nrows();
    if n != y.len() {
        return Err(OutcomeError::BadConfig(format!(
            "X has {} rows but y has {}",
            n,
            y.len()
        )));
    }
    if cfg.cv_folds < 2 {
        return Err(OutcomeError::BadConfig("cv_folds must be >= 2".to_string()));
    }
    if n <= cfg.cv_folds {
        return Err(OutcomeError::TooFewRows {
            n,
            needed: cfg.cv_folds,
        });
    }
    if cfg.l1_ratios.is_empty() {
        return Err(OutcomeError::BadConfig("l1_ratios is empty".to_string()));
    }
    for &r in &cfg.l1_ratios {
        if !(0.0..=1.0).contains(&r) {
            return Err(OutcomeError::BadConfig(format!("l1_ratio {} out of [0,1]", r)));
        }
    }

    let p = x.ncols();
    let folds = fold_assignment(n, cfg.cv_folds, cfg.seed);
    let full = standardize(x, y);

    // Grids are derived on the full standardized data so every fold scores
    // the same candidate set.
    let mut best: Option<(f64, f64, f64, f64)> = None; // (mse, alpha, l1, rss)
    for &l1_ratio in &cfg.l1_ratios {
        let alphas = alpha_grid(&full.x, &full.y_centered, l1_ratio, cfg);
        for &alpha in &alphas {
            let mut squared_error = 0.0;
            for fold in 0..cfg.cv_folds {
                let train_idx: Vec<usize> = (0..n).filter(|&i| folds[i] != fold).collect();
                let val_idx: Vec<usize> = (0..n).filter(|&i| folds[i] == fold).collect();
                if val_idx.is_empty() {
                    continue;
                }
                let mut x_train = Array2::<f64>::zeros((train_idx.len(), p));
                let mut y_train = Vec::with_capacity(train_idx.len());
                for (r, &i) in train_idx.iter().enumerate() {
                    for j in 0..p {
                        x_train[[r, j]] = x[[i, j]];
                    }
                    y_train.push(y[i]);
                }
                let s = standardize(&x_train, &y_train);
                let (beta_std, _, _) = coordinate_descent(
                    &s.x,
                    &s.y_centered,
                    alpha,
                    l1_ratio,
                    cfg.max_iter,
                    cfg.tol,
                );
                // Back to original scale for validation predictions.
                let mut beta = vec![0.0; p];
                let mut intercept = s.y_mean;
                for j in 0..p {
                    if s.col_std[j] > 1e-12 {
                        beta[j] = beta_std[j] / s.col_std[j];
                        intercept -= beta[j] * s.col_mean[j];
                    }
                }
                for &i in &val_idx {
                    let pred: f64 = intercept
                        + (0..p).map(|j| beta[j] * x[[i, j]]).sum::<f64>();
                    squared_error += (pred - y[i]).powi(2);
                }
            }
            let mse = squared_error / n as f64;
            if best.map_or(true, |(b, _, _, _)| mse < b) {
                best = Some((mse, alpha, l1_ratio, squared_error));
            }
        }
    }
    let (cv_mse, alpha, l1_ratio, cv_rss) = best.expect("grids are non-empty");

    let (beta_std, converged, n_iter) = coordinate_descent(
        &full.x,
        &full.y_centered,
        alpha,
        l1_ratio,
        cfg.max_iter,
        cfg.tol,
    );
    if !converged {
        return Err(OutcomeError::NonConvergence {
            iterations: n_iter,
            last_step: cfg.tol,
        });
    }
    let mut coefficients = vec![0.0; p];
    let mut intercept = full.y_mean;
    for j in 0..p {
        if full.col_std[j] > 1e-12 {
            coefficients[j] = beta_std[j] / full.col_std[j];
            intercept -= coefficients[j] * full.col_mean[j];
        }
    }
    Ok(ElasticNetFit {
        coefficients,
        intercept,
        alpha,
        l1_ratio,
        converged,
        n_iter,
        cv_mse,
        cv_rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn tiny_alpha_cfg() -> ElasticNetConfig {
        ElasticNetConfig {
            alphas: Some(vec![1e-8]),
            l1_ratios: vec![0.5],
            cv_folds: 3,
            max_iter: 200_000,
            tol: 1e-12,
            ..Default::default()
        }
    }

    #[test]
    fn single_column_exact_relation() {
        let n = 60;
        let mut x = Array2::<f64>::zeros((n, 1));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let v = i as f64 / 10.0 - 3.0;
            x[[i, 0]] = v;
            y.push(3.0 * v);
        }
        let fit = elastic_net_fit(&x, &y, &tiny_alpha_cfg()).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-3, "{}", fit.coefficients[0]);
        assert!(fit.intercept.abs() < 1e-3);
    }

    #[test]
    fn near_zero_alpha_matches_ols() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = StandardNormal;
        let n = 120;
        let p = 3;
        let mut x = Array2::<f64>::zeros((n, p));
        let mut y = Vec::with_capacity(n);
        let truth = [1.5, -2.0, 0.7];
        for i in 0..n {
            let mut target = 0.3;
            for j in 0..p {
                let v: f64 = normal.sample(&mut rng);
                x[[i, j]] = v;
                target += truth[j] * v;
            }
            let noise: f64 = normal.sample(&mut rng);
            y.push(target + 0.01 * noise);
        }
        let fit = elastic_net_fit(&x, &y, &tiny_alpha_cfg()).unwrap();

        // Closed-form OLS via normal equations with an intercept column.
        let mut xtx = ndarray::Array2::<f64>::zeros((p + 1, p + 1));
        let mut xty = ndarray::Array1::<f64>::zeros(p + 1);
        for i in 0..n {
            let row: Vec<f64> = std::iter::once(1.0)
                .chain((0..p).map(|j| x[[i, j]]))
                .collect();
            for a in 0..=p {
                xty[a] += row[a] * y[i];
                for b in 0..=p {
                    xtx[[a, b]] += row[a] * row[b];
                }
            }
        }
        let ols = crate::numeric::solve_linear(&xtx, &xty).unwrap();
        assert!((fit.intercept - ols[0]).abs() < 1e-6);
        for j in 0..p {
            assert!(
                (fit.coefficients[j] - ols[j + 1]).abs() < 1e-6,
                "coef {}: {} vs {}",
                j,
                fit.coefficients[j],
                ols[j + 1]
            );
        }
    }

    #[test]
    fn pure_noise_shrinks_to_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = StandardNormal;
        let n = 400;
        let p = 4;
        let mut x = Array2::<f64>::zeros((n, p));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..p {
                x[[i, j]] = normal.sample(&mut rng);
            }
            y.push(normal.sample(&mut rng));
        }
        let cfg = ElasticNetConfig {
            seed: 9,
            ..Default::default()
        };
        let fit = elastic_net_fit(&x, &y, &cfg).unwrap();
        for b in &fit.coefficients {
            assert!(b.abs() < 0.05, "noise coefficient too large: {}", b);
        }
        // CV-selected model has near-zero R^2 against the null.
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
        let r2 = 1.0 - fit.rss(&x, &y) / tss;
        assert!(r2.abs() < 0.05, "null-design R^2 was {}", r2);
    }

    #[test]
    fn constant_column_gets_zero_coefficient() {
        let n = 40;
        let mut x = Array2::<f64>::zeros((n, 2));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            x[[i, 0]] = 1.0; // constant
            x[[i, 1]] = i as f64;
            y.push(2.0 * i as f64 + 1.0);
        }
        let fit = elastic_net_fit(&x, &y, &tiny_alpha_cfg()).unwrap();
        assert_eq!(fit.coefficients[0], 0.0);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-3);
    }

    use rand_chacha::ChaCha8Rng;
    use rand::SeedableRng;
}
