//! The evaluation framework: NPMI coherence, bag-of-words topic diversity,
//! the four judge-based metrics, and ICC(2,2) agreement validation.

mod coherence;
mod icc;
mod judged;
mod table;

pub use coherence::{bow_topic_diversity, npmi_coherence, NpmiReport};
pub use icc::{icc_2_2, load_ratings_csv, IccResult, RatingsMatrix};
pub use judged::{
    polarity_stance_consistency, semantic_topic_diversity, specificity, topic_label_alignment,
    DiversityOutcome, JudgedMetric,
};
pub use table::GridTable;

use crate::llm::LlmError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("reference corpus is empty")]
    EmptyCorpus,
    #[error("topic needs at least 2 top words for coherence, got {0}")]
    TooFewWords(usize),
    #[error("metric requires at least one topic")]
    EmptyTopicList,
    #[error("metric requires at least one member document")]
    NoMemberDocs,
    #[error(transparent)]
    Provider(#[from] LlmError),
    #[error("all ratings identical: ICC is undetermined")]
    DegenerateVariance,
    #[error("ICC requires at least 3 targets, got {0}")]
    TooFewTargets(usize),
    #[error("ratings parse error on line {line}: {message}")]
    RatingsParse { line: usize, message: String },
}

/// A serialized metric evaluation: per-item scores, their declared
/// aggregate, and the configuration that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric_id: String,
    pub per_item: Vec<(String, f64)>,
    pub aggregate: f64,
    pub n_evaluated: usize,
    pub config: serde_json::Value,
}
