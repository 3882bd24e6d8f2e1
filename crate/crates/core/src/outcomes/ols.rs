//! Per-topic OLS: outcome on [topic frequency, log(employees)] with an
//! intercept, conventional standard errors, and a two-sided t-test.

use super::{OutcomeError, OutcomeVector, RegressionResult};
use crate::numeric::{invert, variance};
use ndarray::{Array1, Array2};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn per_topic_ols(
    topic_id: i64,
    frequencies: &[f64],
    log_employees: &[f64],
    y: &OutcomeVector,
    threshold: usize,
    n_posts: usize,
) -> Result<RegressionResult, OutcomeError> {
    let n = frequencies.len();
    if n != log_employees.len() || n != y.values.len() {
        return Err(OutcomeError::BadConfig(
            "frequency, control, and outcome lengths differ".to_string(),
        ));
    }
    if n <= 3 {
        return Err(OutcomeError::TooFewRows { n, needed: 3 });
    }
    if variance(frequencies) <= 1e-24 {
        return Err(OutcomeError::RankDeficient(format!(
            "topic {} frequency column is constant",
            topic_id
        )));
    }

    let p = 3; // intercept, frequency, log employees
    let mut xtx = Array2::<f64>::zeros((p, p));
    let mut xty = Array1::<f64>::zeros(p);
    for i in 0..n {
        let row = [1.0, frequencies[i], log_employees[i]];
        for a in 0..p {
            xty[a] += row[a] * y.values[i];
            for b in 0..p {
                xtx[[a, b]] += row[a] * row[b];
            }
        }
    }
    let xtx_inv = invert(&xtx).map_err(|e| OutcomeError::RankDeficient(e.to_string()))?;
    let mut coef = [0.0; 3];
    for a in 0..p {
        for b in 0..p {
            coef[a] += xtx_inv[[a, b]] * xty[b];
        }
    }

    let mut rss = 0.0;
    for i in 0..n {
        let fitted = coef[0] + coef[1] * frequencies[i] + coef[2] * log_employees[i];
        rss += (y.values[i] - fitted).powi(2);
    }
    let df = (n - p) as f64;
    let sigma2 = rss / df;
    let se = (sigma2 * xtx_inv[[1, 1]]).sqrt();
    if !(se > 0.0) {
        return Err(OutcomeError::RankDeficient(
            "zero standard error (perfect fit or degenerate design)".to_string(),
        ));
    }
    let t_stat = coef[1] / se;
    let t_dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| OutcomeError::BadConfig(e.to_string()))?;
    let p_value = 2.0 * (1.0 - t_dist.cdf(t_stat.abs()));

    Ok(RegressionResult {
        topic_id,
        beta: coef[1],
        se,
        p_value: p_value.clamp(0.0, 1.0),
        n_posts,
        threshold,
        alpha_log_employees: coef[2],
        intercept: coef[0],
        n_rows: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcomes::OutcomeKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn outcome(values: Vec<f64>) -> OutcomeVector {
        OutcomeVector {
            values,
            kind: OutcomeKind::Morale,
            demeaned: true,
        }
    }

    #[test]
    fn exact_linear_relation_recovered() {
        let n = 50;
        let f: Vec<f64> = (0..n).map(|i| (i as f64) / 10.0).collect();
        // Control orthogonal to f by symmetry around its mean.
        let ctrl: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let y = outcome(f.iter().map(|v| 2.0 * v).collect());
        let r = per_topic_ols(7, &f, &ctrl, &y, 10, 100).unwrap();
        assert!((r.beta - 2.0).abs() < 1e-10);
        assert!(r.p_value < 1e-12);
    }

    #[test]
    fn constant_frequency_is_rank_deficient() {
        let f = vec![0.5; 10];
        let ctrl: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y = outcome((0..10).map(|i| i as f64).collect());
        assert!(matches!(
            per_topic_ols(1, &f, &ctrl, &y, 10, 50),
            Err(OutcomeError::RankDeficient(_))
        ));
    }

    #[test]
    fn beta_and_se_match_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let normal = StandardNormal;
        let n = 200;
        let f: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let ctrl: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let yv: Vec<f64> = (0..n)
            .map(|i| {
                let noise: f64 = normal.sample(&mut rng);
                0.8 * f[i] - 0.3 * ctrl[i] + noise
            })
            .collect();
        let y = outcome(yv.clone());
        let r = per_topic_ols(1, &f, &ctrl, &y, 10, 500).unwrap();

        // Independent oracle: explicit normal equations solved by Cramer's
        // rule, and the conventional covariance via the (1,1) cofactor.
        let mut xtx = [[0.0f64; 3]; 3];
        let mut xty = [0.0f64; 3];
        for i in 0..n {
            let row = [1.0, f[i], ctrl[i]];
            for a in 0..3 {
                xty[a] += row[a] * yv[i];
                for b in 0..3 {
                    xtx[a][b] += row[a] * row[b];
                }
            }
        }
        let det3 = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let det = det3(&xtx);
        let mut with_col1 = xtx;
        for a in 0..3 {
            with_col1[a][1] = xty[a];
        }
        let beta_oracle = det3(&with_col1) / det;
        assert!(
            (r.beta - beta_oracle).abs() < 1e-8,
            "{} vs {}",
            r.beta,
            beta_oracle
        );

        // inv(XtX)[1][1] = minor(1,1) / det for a symmetric matrix.
        let inv11 = (xtx[0][0] * xtx[2][2] - xtx[0][2] * xtx[2][0]) / det;
        let mut rss = 0.0;
        for i in 0..n {
            let fitted = r.intercept + r.beta * f[i] + r.alpha_log_employees * ctrl[i];
            rss += (yv[i] - fitted).powi(2);
        }
        let se_oracle = (rss / (n as f64 - 3.0) * inv11).sqrt();
        assert!((r.se - se_oracle).abs() < 1e-8, "{} vs {}", r.se, se_oracle);
    }
}
