//! The five-stage topic modeling pipeline with checkpointed, resumable
//! state: initial clustering and naming, LLM reassignment, polarity
//! splitting, and stance-aware integration.

mod checkpoint;
mod distance;
mod runner;
mod tfidf;

pub use checkpoint::{state_hash, ManifestInfo, RunDir, RunLock};
pub use distance::{
    integration_distance, topic_count_grid, topic_representation, IntegrationDistance,
    TopicCountGrid,
};
pub use runner::{PipelineConfig, PipelineRunner};
pub use tfidf::{class_tfidf_top_words, tokenize, TokenizerMode};

use crate::clustering::{DensityError, WardError};
use crate::corpus::CorpusError;
use crate::embedding::EmbeddingError;
use crate::llm::LlmError;
use crate::store::StoreError;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Ward(#[from] WardError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("stage order violated: expected {expected:?}, state is at {got:?}")]
    StageOrder { expected: Stage, got: Stage },
    #[error("topic {0} has no members with embeddings")]
    EmptyTopic(i64),
    #[error("representation weights must be non-negative and sum to 1")]
    BadWeights,
    #[error("integration requires at least 2 topics, got {0}")]
    TooFewTopicsForDistance(usize),
    #[error("topic count grid requires at least 5 topics, got {0}")]
    TooFewTopics(usize),
    #[error("quantile of an empty distance set")]
    QuantileOfEmpty,
    #[error("run directory is locked by another command (lock file {0})")]
    Locked(String),
    #[error("checkpoint at {path} is corrupt: {message}")]
    CorruptCheckpoint { path: String, message: String },
}

/// Pipeline stages in their mandatory order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Initial,
    Named,
    Reassigned,
    Split,
    Integrated,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Initial => "initial",
            Stage::Named => "named",
            Stage::Reassigned => "reassigned",
            Stage::Split => "split",
            Stage::Integrated => "integrated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub topic_id: i64,
    pub name: String,
    pub description: String,
    pub member_passage_ids: BTreeSet<String>,
    pub top_words: Vec<String>,
    pub representative_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<i64>,
    pub stage: Stage,
}

/// The checkpointable state of one slice's topic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModelState {
    pub slice_key: String,
    pub stage: Stage,
    pub topics: Vec<Topic>,
    pub unassigned_ids: BTreeSet<String>,
    pub config_snapshot: serde_json::Value,
    /// Per-stage content hashes; a hash changes iff the content changed.
    pub provenance: BTreeMap<String, String>,
    /// Non-fatal per-topic issues recorded during a stage (e.g. a split
    /// response that stayed inconsistent after its re-ask).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stage_warnings: Vec<String>,
}

impl TopicModelState {
    pub fn expect_stage(&self, expected: Stage) -> Result<(), PipelineError> {
        if self.stage != expected {
            return Err(PipelineError::StageOrder {
                expected,
                got: self.stage,
            });
        }
        Ok(())
    }

    pub fn topic(&self, id: i64) -> Option<&Topic> {
        self.topics.iter().find(|t| t.topic_id == id)
    }
}
