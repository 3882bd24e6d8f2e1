//! Provider abstraction, prompt contracts, response schemas, and the
//! rubric-based judge.
//!
//! The five structured operations (extract, name_topic, assign_topics,
//! polarity_split, child_assign) and the judge all funnel through
//! [`LlmClient`], which adds disk caching, transport retries with backoff,
//! and schema re-asks on malformed responses.

mod cache;
mod client;
mod http;
mod mock;
mod rubrics;
mod templates;

pub use cache::{CacheEntry, PromptCache};
pub use client::{LlmClient, LlmClientOptions};
pub use http::OpenAiCompatChatProvider;
pub use mock::{
    MockChatProvider, ScriptedChatProvider, ScriptedResponse, NEGATIVE_MARKERS, POSITIVE_MARKERS,
};
pub use rubrics::{JudgeRubric, RubricId, ScoreRange};
pub use templates::{
    default_extract_bindings, FieldSpec, FieldType, PromptLanguage, PromptTemplate, TemplateError,
    TemplateId,
};

use crate::corpus::{Characteristic, LeaderType};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("provider transport error after {attempts} attempt(s): {message}")]
    Transport { message: String, attempts: u32 },
    #[error("response violated the {kind} schema after {attempts} attempt(s): {message}")]
    SchemaViolation {
        kind: String,
        attempts: u32,
        message: String,
    },
    #[error("inconsistent response: {0}")]
    InconsistentResponse(String),
    #[error("cache corruption at {path}: {message}")]
    CacheCorruption { path: String, message: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("provider not configured: {0}")]
    NotConfigured(String),
}

/// What kind of structured call a request is; providers may use it for
/// routing, the mock uses it for dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RequestKind {
    Template(TemplateId),
    Judge(RubricId),
}

impl RequestKind {
    pub fn name(&self) -> String {
        match self {
            RequestKind::Template(t) => t.name().to_string(),
            RequestKind::Judge(r) => format!("judge:{}", r.name()),
        }
    }
}

/// A fully rendered request. `fields` carries the raw placeholder bindings;
/// real providers read only `prompt`, the deterministic mock reads `fields`.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub kind: RequestKind,
    pub prompt: String,
    pub fields: BTreeMap<String, String>,
}

/// A chat-completion backend. Implementations must be safe for concurrent
/// use; the pipeline may issue calls from multiple threads.
pub trait ChatProvider: Send + Sync {
    fn provider_id(&self) -> String;
    fn complete_raw(&self, request: &ChatRequest) -> Result<String, LlmError>;
}

/// One passage extracted from a document, as returned by the extract prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedPassage {
    pub text: String,
    #[serde(rename = "target_leader_layer")]
    pub leader_type: LeaderType,
    #[serde(rename = "element_type")]
    pub characteristic: Characteristic,
    #[serde(default)]
    pub implicit_extraction: bool,
    #[serde(default)]
    pub change_meaning: bool,
    #[serde(default)]
    pub is_past: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub(crate) struct ExtractResponse {
    pub extractions: Vec<ExtractedPassage>,
}

#[derive(Debug, Clone, Deserialize)]
pub(crate) struct NameTopicResponse {
    pub topic_name: String,
    pub topic_short_description: String,
}

#[derive(Debug, Clone, Deserialize)]
pub(crate) struct AssignmentItem {
    pub topic_id: i64,
    #[serde(default)]
    #[allow(dead_code)]
    pub topic_name: String,
    #[serde(default)]
    pub reason: String,
}

#[derive(Debug, Clone, Deserialize)]
pub(crate) struct AssignTopicsResponse {
    pub topic_list: Vec<AssignmentItem>,
}

/// One child topic proposed by the polarity-split prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildTopicSpec {
    pub child_topic_name: String,
    pub child_topic_short_description: String,
    #[serde(default, deserialize_with = "string_or_list")]
    pub document_examples: Vec<String>,
    #[serde(default)]
    pub opposing_stance_reason: String,
}

/// Outcome of the polarity-split judgment for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritySplitOutcome {
    pub contain_opposing_stance: bool,
    pub child_topics: Vec<ChildTopicSpec>,
}

#[derive(Debug, Clone, Deserialize)]
pub(crate) struct ChildAssignResponse {
    pub topic_id: i64,
    #[serde(default)]
    #[allow(dead_code)]
    pub topic_name: String,
    #[serde(default)]
    #[allow(dead_code)]
    pub reason: String,
}

#[derive(Debug, Clone, Deserialize)]
pub(crate) struct JudgeResponse {
    pub score: i64,
    #[serde(default)]
    pub reason: String,
}

/// A rubric evaluation: integer 0-10 plus the exact /10 normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeScore {
    pub raw: u8,
    pub normalized: f64,
    pub reason: String,
}

impl JudgeScore {
    pub fn new(raw: u8, reason: String) -> JudgeScore {
        debug_assert!(raw <= 10);
        JudgeScore {
            raw,
            normalized: raw as f64 / 10.0,
            reason,
        }
    }
}

/// Accepts either a JSON string or a list of strings; the split prompt's
/// document_examples field appears in both shapes in the wild.
fn string_or_list<'de, D>(deserializer: D) -> Result<Vec<String>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(String),
        Many(Vec<String>),
    }
    Ok(match Raw::deserialize(deserializer)? {
        Raw::One(s) => vec![s],
        Raw::Many(v) => v,
    })
}
