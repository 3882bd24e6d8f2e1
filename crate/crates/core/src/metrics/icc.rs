//! ICC(2,2): two-way random-effects, average-measures intraclass
//! correlation between the judge and a human rater, with F-based 95%
//! confidence bounds (single-rater bounds stepped up by Spearman-Brown).

use super::MetricsError;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use std::path::Path;

/// n targets x 2 raters, no missing cells (rater 1 = judge, rater 2 = human).
#[derive(Debug, Clone)]
pub struct RatingsMatrix {
    pub targets: Vec<String>,
    pub ratings: Vec<[f64; 2]>,
}

impl RatingsMatrix {
    pub fn new(targets: Vec<String>, ratings: Vec<[f64; 2]>) -> Result<Self, MetricsError> {
        if ratings.len() < 3 {
            return Err(MetricsError::TooFewTargets(ratings.len()));
        }
        assert_eq!(targets.len(), ratings.len());
        Ok(RatingsMatrix { targets, ratings })
    }

    pub fn n(&self) -> usize {
        self.ratings.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IccResult {
    pub icc: f64,
    pub ci95: (f64, f64),
    pub msr: f64,
    pub msc: f64,
    pub mse: f64,
}

/// Loads a `target_id,judge,human` CSV (header required).
pub fn load_ratings_csv(path: &Path) -> Result<RatingsMatrix, MetricsError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| MetricsError::RatingsParse {
        line: 0,
        message: e.to_string(),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| MetricsError::RatingsParse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| -> Result<usize, MetricsError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MetricsError::RatingsParse {
                line: 1,
                message: format!("missing column '{}'", name),
            })
    };
    let (target_col, judge_col, human_col) = (col("target_id")?, col("judge")?, col("human")?);
    let mut targets = Vec::new();
    let mut ratings = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| MetricsError::RatingsParse {
            line,
            message: e.to_string(),
        })?;
        let parse = |c: usize| -> Result<f64, MetricsError> {
            record
                .get(c)
                .unwrap_or("")
                .parse()
                .map_err(|_| MetricsError::RatingsParse {
                    line,
                    message: format!("missing or non-numeric cell '{}'", record.get(c).unwrap_or("")),
                })
        };
        targets.push(record.get(target_col).unwrap_or("").to_string());
        ratings.push([parse(judge_col)?, parse(human_col)?]);
    }
    RatingsMatrix::new(targets, ratings)
}

/// Two-way random-effects, average-of-2-raters ICC:
///
/// ```text
/// ICC(2,2) = (MSR - MSE) / (MSR + (MSC - MSE) / n)
/// ```
///
/// from the two-way ANOVA decomposition (rows = targets, columns = raters).
pub fn icc_2_2(matrix: &RatingsMatrix) -> Result<IccResult, MetricsError> {
    let n = matrix.n();
    if n < 3 {
        return Err(MetricsError::TooFewTargets(n));
    }
    let k = 2.0f64;
    let nf = n as f64;

    let grand: f64 = matrix.ratings.iter().map(|r| r[0] + r[1]).sum::<f64>() / (nf * k);
    let row_means: Vec<f64> = matrix.ratings.iter().map(|r| (r[0] + r[1]) / k).collect();
    let col_means: [f64; 2] = [
        matrix.ratings.iter().map(|r| r[0]).sum::<f64>() / nf,
        matrix.ratings.iter().map(|r| r[1]).sum::<f64>() / nf,
    ];

    let ss_rows: f64 = k * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols: f64 = nf * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let mut ss_err = 0.0;
    for (i, r) in matrix.ratings.iter().enumerate() {
        for (j, &x) in r.iter().enumerate() {
            let fitted = row_means[i] + col_means[j] - grand;
            ss_err += (x - fitted).powi(2);
        }
    }
    let total_ss = ss_rows + ss_cols + ss_err;
    if total_ss < 1e-24 {
        return Err(MetricsError::DegenerateVariance);
    }

    let msr = ss_rows / (nf - 1.0);
    let msc = ss_cols / (k - 1.0);
    let mse = ss_err / ((nf - 1.0) * (k - 1.0));

    let denom = msr + (msc - mse) / nf;
    if denom.abs() < 1e-24 {
        return Err(MetricsError::DegenerateVariance);
    }
    let icc = (msr - mse) / denom;

    // Confidence bounds: single-rater ICC(2,1) F-bounds, then
    // Spearman-Brown step-up to the 2-rater average.
    let icc1_denom = msr + (k - 1.0) * mse + k * (msc - mse) / nf;
    let icc1 = (msr - mse) / icc1_denom;
    let ci95 = if mse <= 1e-24 || (1.0 - icc1).abs() < 1e-12 {
        (icc, icc)
    } else {
        let alpha = 0.05;
        let a = k * icc1 / (nf * (1.0 - icc1));
        let b = 1.0 + k * icc1 * (nf - 1.0) / (nf * (1.0 - icc1));
        let v = (a * msc + b * mse).powi(2)
            / ((a * msc).powi(2) / (k - 1.0) + (b * mse).powi(2) / ((nf - 1.0) * (k - 1.0)));
        let f_low = FisherSnedecor::new(nf - 1.0, v)
            .map(|f| f.inverse_cdf(1.0 - alpha / 2.0))
            .unwrap_or(f64::INFINITY);
        let f_up = FisherSnedecor::new(v, nf - 1.0)
            .map(|f| f.inverse_cdf(1.0 - alpha / 2.0))
            .unwrap_or(f64::INFINITY);
        let lower1 = nf * (msr - f_low * mse)
            / (f_low * (k * msc + (k * nf - k - nf) * mse) + nf * msr);
        let upper1 = nf * (f_up * msr - mse)
            / (k * msc + (k * nf - k - nf) * mse + nf * f_up * msr);
        let step_up = |x: f64| (k * x / (1.0 + (k - 1.0) * x)).clamp(-1.0, 1.0);
        (step_up(lower1), step_up(upper1))
    };

    Ok(IccResult {
        icc,
        ci95,
        msr,
        msc,
        mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[[f64; 2]]) -> RatingsMatrix {
        RatingsMatrix::new(
            (0..rows.len()).map(|i| format!("t{}", i)).collect(),
            rows.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_agreement_is_one() {
        let m = matrix(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]]);
        let r = icc_2_2(&m).unwrap();
        assert!((r.icc - 1.0).abs() < 1e-12);
        assert_eq!(r.ci95, (r.icc, r.icc));
    }

    #[test]
    fn constant_offset_absorbed_by_column_effect() {
        // Rater 2 = rater 1 + 0.5 across 20 targets whose spread dominates
        // the offset; the column effect absorbs the shift almost entirely.
        let rows: Vec<[f64; 2]> = (0..20)
            .map(|i| {
                let v = i as f64 * 0.5;
                [v, v + 0.5]
            })
            .collect();
        let r = icc_2_2(&matrix(&rows)).unwrap();
        assert!(r.icc >= 0.99, "got {}", r.icc);
    }

    #[test]
    fn all_equal_ratings_is_degenerate() {
        let m = matrix(&[[3.0, 3.0], [3.0, 3.0], [3.0, 3.0]]);
        assert!(matches!(icc_2_2(&m), Err(MetricsError::DegenerateVariance)));
    }

    #[test]
    fn invariant_to_common_constant_shift() {
        let rows = [[1.0, 2.0], [3.0, 2.5], [4.0, 4.5], [2.0, 1.5], [5.0, 4.0]];
        let shifted: Vec<[f64; 2]> = rows.iter().map(|r| [r[0] + 7.0, r[1] + 7.0]).collect();
        let a = icc_2_2(&matrix(&rows)).unwrap();
        let b = icc_2_2(&matrix(&shifted)).unwrap();
        assert!((a.icc - b.icc).abs() < 1e-12);
    }

    #[test]
    fn ratings_csv_loader() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        use std::io::Write;
        writeln!(f, "target_id,judge,human").unwrap();
        for i in 0..5 {
            writeln!(f, "t{},{},{}", i, i, i as f64 + 0.2).unwrap();
        }
        let m = load_ratings_csv(f.path()).unwrap();
        assert_eq!(m.n(), 5);
        assert_eq!(m.ratings[2], [2.0, 2.2]);
    }
}
