//! Topic-outcome analysis: firm-year frequency aggregation, elastic-net
//! explanatory power (partial R^2), per-topic OLS, and robustness filtering.

mod elastic_net;
mod frequency;
mod ols;
mod report;

pub use elastic_net::{elastic_net_fit, ElasticNetConfig, ElasticNetFit};
pub use frequency::{aggregate_frequencies, demean_by_year_industry, DemeanDiagnostics};
pub use ols::per_topic_ols;
pub use report::{per_topic_table_csv, significance_stars, PerTopicRow};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutcomeError {
    #[error("passage '{0}' maps to no firm-year")]
    UnmappedPassage(String),
    #[error("elastic net did not converge after {iterations} iterations (last max step {last_step:.3e})")]
    NonConvergence { iterations: usize, last_step: f64 },
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),
    #[error("baseline RSS is zero; partial R^2 undefined")]
    ZeroBaselineRss,
    #[error("need more rows than degrees of freedom: n={n}, needed>{needed}")]
    TooFewRows { n: usize, needed: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Numeric(#[from] crate::numeric::NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Roa,
    Morale,
}

impl OutcomeKind {
    pub fn name(&self) -> &'static str {
        match self {
            OutcomeKind::Roa => "roa",
            OutcomeKind::Morale => "morale",
        }
    }
}

/// Outcome values aligned with a panel row order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeVector {
    pub values: Vec<f64>,
    pub kind: OutcomeKind,
    pub demeaned: bool,
}

/// Firm-year topic frequencies: share of the firm-year's posts assigned to
/// each topic. Soft assignments count once per topic in numerators; the
/// denominator is the firm-year's total post count (assigned or not).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyMatrix {
    pub rows: Vec<(String, i32)>,
    pub topic_ids: Vec<i64>,
    pub values: Array2<f64>,
    pub post_counts: Vec<usize>,
    pub threshold: usize,
    /// Rows with post_count >= threshold; only these enter model fitting.
    pub included: Vec<bool>,
}

impl FrequencyMatrix {
    pub fn included_rows(&self) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.included[i]).collect()
    }

    pub fn frequency(&self, row: usize, topic_id: i64) -> Option<f64> {
        let col = self.topic_ids.iter().position(|&t| t == topic_id)?;
        Some(self.values[[row, col]])
    }
}

/// One per-topic regression: Y on [topic frequency, log(employees)] with an
/// intercept; conventional standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionResult {
    pub topic_id: i64,
    pub beta: f64,
    pub se: f64,
    pub p_value: f64,
    pub n_posts: usize,
    pub threshold: usize,
    pub alpha_log_employees: f64,
    pub intercept: f64,
    pub n_rows: usize,
}

/// All regressions for one topic across post-count thresholds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicOutcomeRegressions {
    pub topic_id: i64,
    pub n_posts: usize,
    /// threshold -> (roa result, morale result)
    pub by_threshold: BTreeMap<usize, (RegressionResult, RegressionResult)>,
}

/// Keeps topics significant at the 5% level for both outcomes in at least
/// two threshold specifications, with at least `min_posts` assigned posts.
pub fn robustness_filter(topics: &[TopicOutcomeRegressions], min_posts: usize) -> Vec<i64> {
    let mut kept = Vec::new();
    for t in topics {
        let joint_significant = t
            .by_threshold
            .values()
            .filter(|(roa, morale)| roa.p_value < 0.05 && morale.p_value < 0.05)
            .count();
        if joint_significant >= 2 && t.n_posts >= min_posts {
            kept.push(t.topic_id);
        }
    }
    kept
}

/// Partial R^2 of the topic-augmented model over the controls-only
/// baseline: (RSS_baseline - RSS_full) / RSS_baseline. May be negative when
/// the regularized full model underperforms.
pub fn partial_r2(rss_full: f64, rss_baseline: f64) -> Result<f64, OutcomeError> {
    if rss_baseline <= 0.0 {
        return Err(OutcomeError::ZeroBaselineRss);
    }
    Ok((rss_baseline - rss_full) / rss_baseline)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(topic_id: i64, p: f64) -> RegressionResult {
        RegressionResult {
            topic_id,
            beta: 1.0,
            se: 0.1,
            p_value: p,
            n_posts: 0,
            threshold: 10,
            alpha_log_employees: 0.0,
            intercept: 0.0,
            n_rows: 100,
        }
    }

    fn topic(
        id: i64,
        n_posts: usize,
        per_threshold: &[(usize, f64, f64)],
    ) -> TopicOutcomeRegressions {
        TopicOutcomeRegressions {
            topic_id: id,
            n_posts,
            by_threshold: per_threshold
                .iter()
                .map(|&(thr, p_roa, p_mor)| (thr, (reg(id, p_roa), reg(id, p_mor))))
                .collect(),
        }
    }

    #[test]
    fn filter_keeps_jointly_significant_twice() {
        let t = topic(1, 150, &[(5, 0.01, 0.02), (10, 0.03, 0.01), (15, 0.5, 0.5)]);
        assert_eq!(robustness_filter(&[t], 100), vec![1]);
    }

    #[test]
    fn filter_drops_single_threshold_significance() {
        let t = topic(2, 500, &[(5, 0.5, 0.5), (10, 0.01, 0.01), (15, 0.9, 0.2)]);
        assert!(robustness_filter(&[t], 100).is_empty());
    }

    #[test]
    fn filter_drops_low_post_counts() {
        let t = topic(3, 99, &[(5, 0.01, 0.01), (10, 0.01, 0.01), (15, 0.01, 0.01)]);
        assert!(robustness_filter(&[t], 100).is_empty());
    }

    #[test]
    fn partial_r2_anchors() {
        assert_eq!(partial_r2(5.0, 5.0).unwrap(), 0.0);
        assert!(matches!(
            partial_r2(1.0, 0.0),
            Err(OutcomeError::ZeroBaselineRss)
        ));
        assert!((partial_r2(3.0, 4.0).unwrap() - 0.25).abs() < 1e-12);
    }
}
