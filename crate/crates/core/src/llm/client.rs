//! The client that drives every structured LLM call: render, cache lookup,
//! transport retry with exponential backoff, schema validation with
//! re-asks, and typed parsing.

use super::cache::PromptCache;
use super::rubrics::JudgeRubric;
use super::templates::{PromptLanguage, PromptTemplate, TemplateId};
use super::{
    AssignTopicsResponse, ChatProvider, ChatRequest, ChildAssignResponse, ExtractResponse,
    ExtractedPassage, JudgeResponse, JudgeScore, LlmError, NameTopicResponse,
    PolaritySplitOutcome, RequestKind,
};
use serde::de::DeserializeOwned;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct LlmClientOptions {
    pub cache_dir: Option<PathBuf>,
    pub language: PromptLanguage,
    /// Total transport attempts per ask (first try included).
    pub transport_attempts: u32,
    /// Re-asks allowed when a response fails schema validation.
    pub schema_reasks: u32,
    /// Re-asks allowed when a judge score falls outside 0-10.
    pub judge_reasks: u32,
    pub backoff_base_ms: u64,
}

impl Default for LlmClientOptions {
    fn default() -> Self {
        LlmClientOptions {
            cache_dir: None,
            language: PromptLanguage::English,
            transport_attempts: 5,
            schema_reasks: 2,
            judge_reasks: 1,
            backoff_base_ms: 250,
        }
    }
}

#[derive(Debug, Default)]
pub struct CallStats {
    pub provider_calls: AtomicU64,
    pub cache_hits: AtomicU64,
    pub cache_misses: AtomicU64,
}

pub struct LlmClient {
    provider: Arc<dyn ChatProvider>,
    options: LlmClientOptions,
    cache: Option<PromptCache>,
    stats: CallStats,
}

impl LlmClient {
    pub fn new(provider: Arc<dyn ChatProvider>, options: LlmClientOptions) -> LlmClient {
        let cache = options.cache_dir.as_ref().map(|d| PromptCache::new(d));
        LlmClient {
            provider,
            options,
            cache,
            stats: CallStats::default(),
        }
    }

    pub fn provider_id(&self) -> String {
        self.provider.provider_id()
    }

    pub fn language(&self) -> PromptLanguage {
        self.options.language
    }

    pub fn provider_calls(&self) -> u64 {
        self.stats.provider_calls.load(Ordering::Relaxed)
    }

    pub fn cache_hits(&self) -> u64 {
        self.stats.cache_hits.load(Ordering::Relaxed)
    }

    pub fn cache_misses(&self) -> u64 {
        self.stats.cache_misses.load(Ordering::Relaxed)
    }

    /// One provider call wrapped in the transport retry loop.
    fn call_with_retries(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let attempts = self.options.transport_attempts.max(1);
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let delay = self.options.backoff_base_ms.saturating_mul(1 << (attempt - 1));
                if delay > 0 {
                    std::thread::sleep(std::time::Duration::from_millis(delay));
                }
            }
            self.stats.provider_calls.fetch_add(1, Ordering::Relaxed);
            match self.provider.complete_raw(request) {
                Ok(raw) => return Ok(raw),
                Err(LlmError::Transport { message, .. }) => {
                    last = message;
                }
                Err(other) => return Err(other),
            }
        }
        Err(LlmError::Transport {
            message: last,
            attempts,
        })
    }

    /// Completes a request and parses it into `T`, consulting the cache
    /// first (unless `skip_cache_read`) and re-asking on schema violations.
    /// `semantic_check` validates constraints the type system cannot express.
    fn ask_typed<T: DeserializeOwned>(
        &self,
        request: &ChatRequest,
        semantic_check: impl Fn(&T) -> Result<(), String>,
        skip_cache_read: bool,
    ) -> Result<T, LlmError> {
        let model = self.provider.provider_id();
        if let Some(cache) = &self.cache {
            if !skip_cache_read {
                if let Some(entry) = cache.get(&model, &request.prompt)? {
                    match serde_json::from_value::<T>(entry.parsed.clone()) {
                        Ok(value) => {
                            if semantic_check(&value).is_ok() {
                                self.stats.cache_hits.fetch_add(1, Ordering::Relaxed);
                                return Ok(value);
                            }
                            log::warn!(
                                "cached response for {} no longer passes validation; refetching",
                                request.kind.name()
                            );
                        }
                        Err(e) => {
                            log::warn!(
                                "cached response for {} failed schema ({}); refetching",
                                request.kind.name(),
                                e
                            );
                        }
                    }
                }
            }
            self.stats.cache_misses.fetch_add(1, Ordering::Relaxed);
        }

        let asks = 1 + self.options.schema_reasks;
        let mut last_error = String::new();
        for _ in 0..asks {
            let raw = self.call_with_retries(request)?;
            let parsed: serde_json::Value = match serde_json::from_str(raw.trim()) {
                Ok(v) => v,
                Err(e) => {
                    last_error = format!("not valid JSON: {}", e);
                    continue;
                }
            };
            let value: T = match serde_json::from_value(parsed.clone()) {
                Ok(v) => v,
                Err(e) => {
                    last_error = e.to_string();
                    continue;
                }
            };
            if let Err(msg) = semantic_check(&value) {
                last_error = msg;
                continue;
            }
            if let Some(cache) = &self.cache {
                cache.put(&model, &request.prompt, &raw, &parsed)?;
            }
            return Ok(value);
        }
        Err(LlmError::SchemaViolation {
            kind: request.kind.name(),
            attempts: asks,
            message: last_error,
        })
    }

    fn render_request(
        &self,
        id: TemplateId,
        bindings: BTreeMap<String, String>,
    ) -> Result<ChatRequest, LlmError> {
        let template = PromptTemplate::get(id, self.options.language);
        let prompt = template.render(&bindings)?;
        Ok(ChatRequest {
            kind: RequestKind::Template(id),
            prompt,
            fields: bindings,
        })
    }

    /// Runs the extraction prompt over one document.
    pub fn extract(
        &self,
        input_text: &str,
        input_text_metadata: &str,
    ) -> Result<Vec<ExtractedPassage>, LlmError> {
        let mut bindings = super::templates::default_extract_bindings();
        bindings.insert("input_text".to_string(), input_text.to_string());
        bindings.insert(
            "input_text_metadata".to_string(),
            input_text_metadata.to_string(),
        );
        let request = self.render_request(TemplateId::Extract, bindings)?;
        let response: ExtractResponse = self.ask_typed(&request, |_| Ok(()), false)?;
        Ok(response.extractions)
    }

    /// Names a topic from its top words and representative documents.
    pub fn name_topic(
        &self,
        top_words: &[String],
        representative_docs: &[String],
        corpus_metadata: &str,
    ) -> Result<(String, String), LlmError> {
        if representative_docs.is_empty() {
            return Err(LlmError::Precondition(
                "name_topic requires at least one representative document".to_string(),
            ));
        }
        let docs_block = representative_docs
            .iter()
            .map(|d| format!("- {}", d))
            .collect::<Vec<_>>()
            .join("\n");
        let bindings = BTreeMap::from([
            ("document_metadata".to_string(), corpus_metadata.to_string()),
            ("topic_top_words".to_string(), top_words.join(", ")),
            ("topic_representative_documents".to_string(), docs_block),
        ]);
        let request = self.render_request(TemplateId::NameTopic, bindings)?;
        let response: NameTopicResponse = self.ask_typed(
            &request,
            |r: &NameTopicResponse| {
            if r.topic_name.trim().is_empty() {
                return Err("topic_name is empty".to_string());
            }
            if r.topic_name.contains('\n') {
                return Err("topic_name contains a newline".to_string());
            }
            if r.topic_short_description.trim().is_empty() {
                return Err("topic_short_description is empty".to_string());
            }
                Ok(())
            },
            false,
        )?;
        Ok((response.topic_name, response.topic_short_description))
    }

    /// Soft-assigns one document against the full topic list. Returns zero
    /// or more `(topic_id, reason)` pairs; ids outside the candidate list
    /// are coerced to -1 with a warning.
    pub fn assign_topics(
        &self,
        doc_text: &str,
        topic_defs: &[(i64, String, String)],
        doc_metadata: &str,
    ) -> Result<Vec<(i64, String)>, LlmError> {
        if topic_defs.is_empty() {
            return Err(LlmError::Precondition(
                "assign_topics requires a non-empty candidate topic list".to_string(),
            ));
        }
        let bindings = BTreeMap::from([
            ("document_metadata".to_string(), doc_metadata.to_string()),
            ("topic_definitions".to_string(), format_topic_defs(topic_defs)),
            ("input_text".to_string(), doc_text.to_string()),
        ]);
        let request = self.render_request(TemplateId::AssignTopics, bindings)?;
        let response: AssignTopicsResponse = self.ask_typed(&request, |_| Ok(()), false)?;

        let known: BTreeSet<i64> = topic_defs.iter().map(|(id, _, _)| *id).collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for item in response.topic_list {
            let id = if item.topic_id == -1 || known.contains(&item.topic_id) {
                item.topic_id
            } else {
                log::warn!(
                    "assign_topics returned unknown topic id {}; coercing to -1",
                    item.topic_id
                );
                -1
            };
            if seen.insert(id) {
                out.push((id, item.reason));
            }
        }
        Ok(out)
    }

    /// Asks whether a topic mixes opposing stances and, if so, how to split
    /// it. A flag/children mismatch earns one re-ask, then an error.
    pub fn polarity_split(
        &self,
        topic_name: &str,
        topic_description: &str,
        sampled_docs: &[String],
        corpus_metadata: &str,
    ) -> Result<PolaritySplitOutcome, LlmError> {
        if sampled_docs.is_empty() {
            return Err(LlmError::Precondition(
                "polarity_split requires at least one sampled document".to_string(),
            ));
        }
        let docs_block = sampled_docs
            .iter()
            .map(|d| format!("- {}", d))
            .collect::<Vec<_>>()
            .join("\n");
        let bindings = BTreeMap::from([
            ("topic_name".to_string(), topic_name.to_string()),
            (
                "topic_short_description".to_string(),
                topic_description.to_string(),
            ),
            ("document_metadata".to_string(), corpus_metadata.to_string()),
            ("topic_documents".to_string(), docs_block),
        ]);
        let request = self.render_request(TemplateId::PolaritySplit, bindings)?;

        let consistent = |r: &PolaritySplitOutcome| {
            if r.contain_opposing_stance {
                r.child_topics.len() >= 2
            } else {
                r.child_topics.is_empty()
            }
        };
        for attempt in 0..2 {
            let response: PolaritySplitOutcome =
                self.ask_typed(&request, |_| Ok(()), attempt > 0)?;
            if consistent(&response) {
                return Ok(response);
            }
            if attempt == 0 {
                log::warn!(
                    "polarity_split for '{}' returned flag/children mismatch; re-asking",
                    topic_name
                );
            }
        }
        Err(LlmError::InconsistentResponse(format!(
            "polarity_split for '{}': contain_opposing_stance inconsistent with child_topics",
            topic_name
        )))
    }

    /// Routes one member document of a split topic into exactly one child
    /// topic or -1 ("Other" / neither).
    pub fn child_assign(
        &self,
        parent_topic: &str,
        child_defs: &[(i64, String, String)],
        doc_text: &str,
        doc_metadata: &str,
    ) -> Result<i64, LlmError> {
        if child_defs.is_empty() {
            return Err(LlmError::Precondition(
                "child_assign requires a non-empty child topic list".to_string(),
            ));
        }
        let bindings = BTreeMap::from([
            ("parent_topic".to_string(), parent_topic.to_string()),
            ("input_text".to_string(), doc_text.to_string()),
            ("document_metadata".to_string(), doc_metadata.to_string()),
            (
                "child_topic_definition".to_string(),
                format_topic_defs(child_defs),
            ),
        ]);
        let request = self.render_request(TemplateId::ChildAssign, bindings)?;
        let response: ChildAssignResponse = self.ask_typed(&request, |_| Ok(()), false)?;
        let known: BTreeSet<i64> = child_defs.iter().map(|(id, _, _)| *id).collect();
        if response.topic_id == -1 || known.contains(&response.topic_id) {
            Ok(response.topic_id)
        } else {
            log::warn!(
                "child_assign returned unknown child id {}; coercing to -1",
                response.topic_id
            );
            Ok(-1)
        }
    }

    /// Scores named inputs against a rubric. Out-of-range scores get a
    /// single re-ask, then are clamped into 0-10 with a warning.
    pub fn judge(
        &self,
        rubric: &JudgeRubric,
        inputs: &BTreeMap<String, String>,
    ) -> Result<JudgeScore, LlmError> {
        let prompt = rubric.render(inputs);
        let request = ChatRequest {
            kind: RequestKind::Judge(rubric.rubric_id),
            prompt,
            fields: inputs.clone(),
        };
        let mut response: JudgeResponse = self.ask_typed(&request, |_| Ok(()), false)?;
        let mut reasks = 0;
        while !(0..=10).contains(&response.score) && reasks < self.options.judge_reasks {
            log::warn!(
                "judge {} returned out-of-range score {}; re-asking",
                rubric.rubric_id.name(),
                response.score
            );
            reasks += 1;
            response = self.ask_typed(&request, |_| Ok(()), true)?;
        }
        let raw = if (0..=10).contains(&response.score) {
            response.score as u8
        } else {
            let clamped = response.score.clamp(0, 10) as u8;
            log::warn!(
                "judge {} score {} still out of range after re-ask; clamping to {}",
                rubric.rubric_id.name(),
                response.score,
                clamped
            );
            clamped
        };
        Ok(JudgeScore::new(raw, response.reason))
    }

}

fn format_topic_defs(defs: &[(i64, String, String)]) -> String {
    defs.iter()
        .map(|(id, name, desc)| format!("{}, {} ({})", id, name, desc))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::super::mock::{ScriptedChatProvider, ScriptedResponse};
    use super::super::{JudgeRubric, MockChatProvider, RubricId};
    use super::*;

    fn no_backoff() -> LlmClientOptions {
        LlmClientOptions {
            backoff_base_ms: 0,
            ..Default::default()
        }
    }

    fn scripted(responses: Vec<ScriptedResponse>) -> (Arc<ScriptedChatProvider>, LlmClient) {
        let provider = Arc::new(ScriptedChatProvider::new(responses));
        let client = LlmClient::new(provider.clone(), no_backoff());
        (provider, client)
    }

    #[test]
    fn canned_response_parses_without_network() {
        let (_, client) = scripted(vec![ScriptedResponse::Text(
            r#"{"topic_name":"迅速な意思決定","topic_short_description":"意思決定の速さを評価する記述"}"#
                .to_string(),
        )]);
        let (name, desc) = client
            .name_topic(
                &["speed".to_string()],
                &["doc one".to_string()],
                "employee reviews",
            )
            .unwrap();
        assert_eq!(name, "迅速な意思決定");
        assert!(!desc.is_empty());
    }

    #[test]
    fn empty_rep_docs_is_a_precondition_error() {
        let (_, client) = scripted(vec![]);
        assert!(matches!(
            client.name_topic(&["w".to_string()], &[], "meta"),
            Err(LlmError::Precondition(_))
        ));
    }

    #[test]
    fn unparsable_twice_is_schema_violation() {
        let (_, client) = scripted(vec![
            ScriptedResponse::Text("not json".to_string()),
            ScriptedResponse::Text("still not json".to_string()),
            ScriptedResponse::Text("nope".to_string()),
        ]);
        match client.name_topic(&["w".to_string()], &["d".to_string()], "meta") {
            Err(LlmError::SchemaViolation { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("expected schema violation, got {:?}", other),
        }
    }

    #[test]
    fn transport_errors_retry_then_succeed() {
        let (provider, client) = scripted(vec![
            ScriptedResponse::TransportError("connection reset".to_string()),
            ScriptedResponse::TransportError("connection reset".to_string()),
            ScriptedResponse::Text(
                r#"{"topic_name":"n","topic_short_description":"d"}"#.to_string(),
            ),
        ]);
        let (name, _) = client
            .name_topic(&["w".to_string()], &["d".to_string()], "meta")
            .unwrap();
        assert_eq!(name, "n");
        assert_eq!(provider.calls(), 3);
    }

    #[test]
    fn second_identical_prompt_served_from_cache() {
        let dir = tempfile::tempdir().unwrap();
        let provider = Arc::new(MockChatProvider::new());
        let client = LlmClient::new(
            provider.clone(),
            LlmClientOptions {
                cache_dir: Some(dir.path().to_path_buf()),
                backoff_base_ms: 0,
                ..Default::default()
            },
        );
        let words = vec!["alpha".to_string(), "beta".to_string()];
        let docs = vec!["alpha beta gamma".to_string()];
        client.name_topic(&words, &docs, "meta").unwrap();
        let calls_after_first = provider.calls();
        client.name_topic(&words, &docs, "meta").unwrap();
        assert_eq!(provider.calls(), calls_after_first);
        assert_eq!(client.cache_hits(), 1);
    }

    #[test]
    fn unknown_assignment_ids_coerced_to_unassigned() {
        let (_, client) = scripted(vec![ScriptedResponse::Text(
            r#"{"topic_list":[{"topic_id":99,"topic_name":"ghost","reason":"r"}]}"#.to_string(),
        )]);
        let defs = vec![(0, "a".to_string(), "d".to_string())];
        let out = client.assign_topics("text", &defs, "meta").unwrap();
        assert_eq!(out, vec![(-1, "r".to_string())]);
    }

    #[test]
    fn multi_label_assignment_passes_through() {
        let (_, client) = scripted(vec![ScriptedResponse::Text(
            r#"{"topic_list":[
                {"topic_id":3,"topic_name":"a","reason":"ra"},
                {"topic_id":7,"topic_name":"b","reason":"rb"}]}"#
                .to_string(),
        )]);
        let defs = vec![
            (3, "a".to_string(), "d".to_string()),
            (7, "b".to_string(), "d".to_string()),
        ];
        let out = client.assign_topics("text", &defs, "meta").unwrap();
        assert_eq!(out.iter().map(|(id, _)| *id).collect::<Vec<_>>(), vec![3, 7]);
    }

    #[test]
    fn split_flag_without_children_errors_after_reask() {
        let (_, client) = scripted(vec![
            ScriptedResponse::Text(
                r#"{"contain_opposing_stance":true,"child_topics":[]}"#.to_string(),
            ),
            ScriptedResponse::Text(
                r#"{"contain_opposing_stance":true,"child_topics":[]}"#.to_string(),
            ),
        ]);
        assert!(matches!(
            client.polarity_split("t", "d", &["doc".to_string()], "meta"),
            Err(LlmError::InconsistentResponse(_))
        ));
    }

    #[test]
    fn judge_out_of_range_reasks_then_clamps() {
        let (provider, client) = scripted(vec![
            ScriptedResponse::Text(r#"{"score":15,"reason":"too keen"}"#.to_string()),
            ScriptedResponse::Text(r#"{"score":15,"reason":"still keen"}"#.to_string()),
        ]);
        let rubric = JudgeRubric::standard(RubricId::SemanticSimilarity);
        let inputs = BTreeMap::from([("topic_name_1".to_string(), "x".to_string())]);
        let score = client.judge(&rubric, &inputs).unwrap();
        assert_eq!(score.raw, 10);
        assert_eq!(score.normalized, 1.0);
        assert_eq!(provider.calls(), 2);
    }
}
