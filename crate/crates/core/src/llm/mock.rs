//! Deterministic offline providers.
//!
//! [`MockChatProvider`] answers every structured prompt from the request's
//! raw field bindings using small lexical rules, so the whole pipeline and
//! test suite run with zero network. [`ScriptedChatProvider`] replays a
//! fixed response script for unit tests of retry and schema handling.
//!
//! Mock conventions:
//! - Extraction reads passage markers of the form
//!   `@<leader_type>/<characteristic>: <text>` from document lines; lines
//!   without a marker are ignored.
//! - Stance is detected against fixed positive/negative word lists; fixture
//!   corpora are built from the same lists.

use super::{ChatRequest, ChatProvider, LlmError, RequestKind, RubricId, TemplateId};
use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

pub const POSITIVE_MARKERS: &[&str] = &[
    "rapid", "supportive", "excellent", "clear", "proactive", "strong", "attentive", "fair",
];
pub const NEGATIVE_MARKERS: &[&str] = &[
    "slow", "absent", "dismissive", "vague", "passive", "weak", "neglectful", "unfair",
];

fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 3)
        .map(|t| t.to_string())
        .collect()
}

fn token_set(text: &str) -> BTreeSet<String> {
    tokenize(text).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stance {
    Positive,
    Negative,
    Mixed,
    None,
}

fn stance_of(text: &str) -> Stance {
    let tokens = token_set(text);
    let pos = POSITIVE_MARKERS.iter().any(|m| tokens.contains(*m));
    let neg = NEGATIVE_MARKERS.iter().any(|m| tokens.contains(*m));
    match (pos, neg) {
        (true, true) => Stance::Mixed,
        (true, false) => Stance::Positive,
        (false, true) => Stance::Negative,
        (false, false) => Stance::None,
    }
}

/// Parses "id, name (description)" candidate lines as rendered by the
/// client's topic-definition formatter.
fn parse_topic_defs(block: &str) -> Vec<(i64, String, String)> {
    let mut out = Vec::new();
    for line in block.lines() {
        let line = line.trim();
        let Some((id_part, rest)) = line.split_once(", ") else {
            continue;
        };
        let Ok(id) = id_part.trim().parse::<i64>() else {
            continue;
        };
        let (name, desc) = match rest.rfind(" (") {
            Some(pos) => (
                rest[..pos].to_string(),
                rest[pos + 2..].trim_end_matches(')').to_string(),
            ),
            None => (rest.to_string(), String::new()),
        };
        out.push((id, name, desc));
    }
    out
}

fn doc_lines(block: &str) -> Vec<String> {
    block
        .lines()
        .map(|l| l.trim().trim_start_matches("- ").to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

/// Deterministic lexical stand-in for a chat model.
pub struct MockChatProvider {
    calls: AtomicU64,
}

impl MockChatProvider {
    pub fn new() -> MockChatProvider {
        MockChatProvider {
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn extract(&self, fields: &std::collections::BTreeMap<String, String>) -> String {
        let text = fields.get("input_text").cloned().unwrap_or_default();
        let mut extractions = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            let Some(rest) = line.strip_prefix('@') else {
                continue;
            };
            let Some((tags, passage)) = rest.split_once(':') else {
                continue;
            };
            let Some((layer, element)) = tags.split_once('/') else {
                continue;
            };
            let layer = layer.trim();
            let element = element.trim();
            if !["top", "non_top", "unknown"].contains(&layer)
                || !["behavior", "attitude", "ability", "other"].contains(&element)
            {
                continue;
            }
            extractions.push(serde_json::json!({
                "text": passage.trim(),
                "target_leader_layer": layer,
                "element_type": element,
                "implicit_extraction": false,
                "change_meaning": false,
                "is_past": false,
            }));
        }
        serde_json::json!({ "extractions": extractions }).to_string()
    }

    fn name_topic(&self, fields: &std::collections::BTreeMap<String, String>) -> String {
        let words: Vec<String> = fields
            .get("topic_top_words")
            .map(|w| {
                w.split(',')
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        let name = if words.is_empty() {
            "unlabeled topic".to_string()
        } else {
            words.iter().take(3).cloned().collect::<Vec<_>>().join(" ")
        };
        let description = format!(
            "Passages mentioning {}.",
            words.iter().take(5).cloned().collect::<Vec<_>>().join(", ")
        );
        serde_json::json!({
            "topic_name": name,
            "topic_short_description": description,
        })
        .to_string()
    }

    fn assign_topics(&self, fields: &std::collections::BTreeMap<String, String>) -> String {
        let defs = parse_topic_defs(fields.get("topic_definitions").map(String::as_str).unwrap_or(""));
        let doc_tokens = token_set(fields.get("input_text").map(String::as_str).unwrap_or(""));
        let mut list = Vec::new();
        for (id, name, desc) in &defs {
            let topic_tokens = token_set(&format!("{} {}", name, desc));
            let overlap = topic_tokens.intersection(&doc_tokens).count();
            if overlap >= 2 {
                list.push(serde_json::json!({
                    "topic_id": id,
                    "topic_name": name,
                    "reason": format!("{} shared terms", overlap),
                }));
            }
        }
        if list.is_empty() {
            list.push(serde_json::json!({
                "topic_id": -1,
                "topic_name": "Other",
                "reason": "no clear topic match",
            }));
        }
        serde_json::json!({ "topic_list": list }).to_string()
    }

    fn polarity_split(&self, fields: &std::collections::BTreeMap<String, String>) -> String {
        let parent = fields.get("topic_name").cloned().unwrap_or_default();
        let docs = doc_lines(fields.get("topic_documents").map(String::as_str).unwrap_or(""));
        let pos_docs: Vec<&String> = docs
            .iter()
            .filter(|d| stance_of(d) == Stance::Positive)
            .collect();
        let neg_docs: Vec<&String> = docs
            .iter()
            .filter(|d| stance_of(d) == Stance::Negative)
            .collect();
        if pos_docs.len() < 2 || neg_docs.len() < 2 {
            return serde_json::json!({
                "contain_opposing_stance": false,
                "child_topics": [],
            })
            .to_string();
        }
        let dominant = |ds: &[&String], markers: &[&str]| -> String {
            let mut best = (0usize, String::new());
            for m in markers {
                let count = ds.iter().filter(|d| token_set(d).contains(*m)).count();
                if count > best.0 {
                    best = (count, m.to_string());
                }
            }
            best.1
        };
        let pos_word = dominant(&pos_docs, POSITIVE_MARKERS);
        let neg_word = dominant(&neg_docs, NEGATIVE_MARKERS);
        let examples = |ds: &[&String]| -> Vec<String> {
            ds.iter().take(3).map(|d| (*d).clone()).collect()
        };
        serde_json::json!({
            "contain_opposing_stance": true,
            "child_topics": [
                {
                    "child_topic_name": format!("{} {}", pos_word, parent),
                    "child_topic_short_description":
                        format!("{} described as {}", parent, pos_word),
                    "document_examples": examples(&pos_docs),
                    "opposing_stance_reason":
                        format!("documents describe {} favorably", parent),
                },
                {
                    "child_topic_name": format!("{} {}", neg_word, parent),
                    "child_topic_short_description":
                        format!("{} described as {}", parent, neg_word),
                    "document_examples": examples(&neg_docs),
                    "opposing_stance_reason":
                        format!("documents describe {} unfavorably", parent),
                },
            ],
        })
        .to_string()
    }

    fn child_assign(&self, fields: &std::collections::BTreeMap<String, String>) -> String {
        let defs =
            parse_topic_defs(fields.get("child_topic_definition").map(String::as_str).unwrap_or(""));
        let doc_stance = stance_of(fields.get("input_text").map(String::as_str).unwrap_or(""));
        let pick = defs.iter().find(|(_, name, desc)| {
            let child_stance = stance_of(&format!("{} {}", name, desc));
            matches!(
                (doc_stance, child_stance),
                (Stance::Positive, Stance::Positive) | (Stance::Negative, Stance::Negative)
            )
        });
        match pick {
            Some((id, name, _)) => serde_json::json!({
                "topic_id": id,
                "topic_name": name,
                "reason": "stance marker match",
            })
            .to_string(),
            None => serde_json::json!({
                "topic_id": -1,
                "topic_name": "Other",
                "reason": "no stance marker match",
            })
            .to_string(),
        }
    }

    fn judge(&self, rubric: RubricId, fields: &std::collections::BTreeMap<String, String>) -> String {
        let get = |k: &str| fields.get(k).cloned().unwrap_or_default();
        let (score, reason) = match rubric {
            RubricId::SemanticSimilarity => {
                let a = format!("{} {}", get("topic_name_1"), get("topic_short_description_1"));
                let b = format!("{} {}", get("topic_name_2"), get("topic_short_description_2"));
                if a == b {
                    (10, "identical name and description".to_string())
                } else {
                    let ta = token_set(&a);
                    let tb = token_set(&b);
                    let inter = ta.intersection(&tb).count() as f64;
                    let union = ta.union(&tb).count().max(1) as f64;
                    let score = (10.0 * inter / union).round() as i64;
                    (score, format!("token overlap {:.2}", inter / union))
                }
            }
            RubricId::StanceSimilarity => {
                let a = stance_of(&format!("{} {}", get("topic_name_1"), get("topic_short_description_1")));
                let b = stance_of(&format!("{} {}", get("topic_name_2"), get("topic_short_description_2")));
                match (a, b) {
                    (Stance::Positive, Stance::Negative) | (Stance::Negative, Stance::Positive) => {
                        (10, "opposing stance markers".to_string())
                    }
                    (Stance::Positive, Stance::Positive) | (Stance::Negative, Stance::Negative) => {
                        (0, "matching stance markers".to_string())
                    }
                    _ => (5, "stance markers inconclusive".to_string()),
                }
            }
            RubricId::LabelAlignment => {
                let label = token_set(&format!("{} {}", get("topic_name"), get("topic_short_description")));
                let doc = token_set(&get("document"));
                let overlap = label.intersection(&doc).count();
                let score = match overlap {
                    0 => 2,
                    1 => 5,
                    2 => 8,
                    _ => 10,
                };
                (score, format!("{} shared terms", overlap))
            }
            RubricId::Specificity => {
                let tokens = token_set(&format!("{} {}", get("topic_name"), get("topic_short_description")));
                let score = (2 * tokens.len() as i64).min(10);
                (score, format!("{} distinct content terms", tokens.len()))
            }
            RubricId::StanceConsistency => {
                match stance_of(&format!("{} {}", get("topic_name"), get("topic_short_description"))) {
                    Stance::Mixed => (1, "mixed stance markers".to_string()),
                    Stance::Positive | Stance::Negative => (9, "single stance marker".to_string()),
                    Stance::None => (6, "no stance markers".to_string()),
                }
            }
        };
        serde_json::json!({ "score": score, "reason": reason }).to_string()
    }
}

impl Default for MockChatProvider {
    fn default() -> Self {
        Self::new()
    }
}

impl ChatProvider for MockChatProvider {
    fn provider_id(&self) -> String {
        "mock-chat-v1".to_string()
    }

    fn complete_raw(&self, request: &ChatRequest) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(match request.kind {
            RequestKind::Template(TemplateId::Extract) => self.extract(&request.fields),
            RequestKind::Template(TemplateId::NameTopic) => self.name_topic(&request.fields),
            RequestKind::Template(TemplateId::AssignTopics) => self.assign_topics(&request.fields),
            RequestKind::Template(TemplateId::PolaritySplit) => self.polarity_split(&request.fields),
            RequestKind::Template(TemplateId::ChildAssign) => self.child_assign(&request.fields),
            RequestKind::Judge(rubric) => self.judge(rubric, &request.fields),
        })
    }
}

/// One step of a scripted conversation.
#[derive(Debug, Clone)]
pub enum ScriptedResponse {
    Text(String),
    TransportError(String),
}

/// Replays a fixed script; panics when the script runs dry so test bugs
/// surface immediately.
pub struct ScriptedChatProvider {
    script: Mutex<std::collections::VecDeque<ScriptedResponse>>,
    calls: AtomicU64,
}

impl ScriptedChatProvider {
    pub fn new(responses: Vec<ScriptedResponse>) -> ScriptedChatProvider {
        ScriptedChatProvider {
            script: Mutex::new(responses.into()),
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl ChatProvider for ScriptedChatProvider {
    fn provider_id(&self) -> String {
        "scripted-chat".to_string()
    }

    fn complete_raw(&self, _request: &ChatRequest) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let next = self
            .script
            .lock()
            .expect("script lock poisoned")
            .pop_front()
            .expect("scripted provider ran out of responses");
        match next {
            ScriptedResponse::Text(t) => Ok(t),
            ScriptedResponse::TransportError(m) => Err(LlmError::Transport {
                message: m,
                attempts: 1,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(kind: RequestKind, fields: Vec<(&str, &str)>) -> ChatRequest {
        ChatRequest {
            kind,
            prompt: String::new(),
            fields: fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    #[test]
    fn extract_reads_markers() {
        let mock = MockChatProvider::new();
        let req = request(
            RequestKind::Template(TemplateId::Extract),
            vec![(
                "input_text",
                "plain line\n@top/behavior: communicates clearly\n@non_top/ability: lacks planning",
            )],
        );
        let raw = mock.complete_raw(&req).unwrap();
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        let items = v["extractions"].as_array().unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0]["target_leader_layer"], "top");
        assert_eq!(items[1]["element_type"], "ability");
    }

    #[test]
    fn extract_returns_empty_list_without_markers() {
        let mock = MockChatProvider::new();
        let req = request(
            RequestKind::Template(TemplateId::Extract),
            vec![("input_text", "nothing about leaders here")],
        );
        let raw = mock.complete_raw(&req).unwrap();
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert!(v["extractions"].as_array().unwrap().is_empty());
    }

    #[test]
    fn stance_judge_scores_opposing_markers_high() {
        let mock = MockChatProvider::new();
        let req = request(
            RequestKind::Judge(RubricId::StanceSimilarity),
            vec![
                ("topic_name_1", "rapid approval decisions"),
                ("topic_short_description_1", "approvals handled quickly"),
                ("topic_name_2", "slow approval decisions"),
                ("topic_short_description_2", "approvals handled slowly"),
            ],
        );
        let v: serde_json::Value =
            serde_json::from_str(&mock.complete_raw(&req).unwrap()).unwrap();
        assert_eq!(v["score"], 10);
    }

    #[test]
    fn semantic_judge_identical_is_ten() {
        let mock = MockChatProvider::new();
        let req = request(
            RequestKind::Judge(RubricId::SemanticSimilarity),
            vec![
                ("topic_name_1", "mentoring support"),
                ("topic_short_description_1", "d"),
                ("topic_name_2", "mentoring support"),
                ("topic_short_description_2", "d"),
            ],
        );
        let v: serde_json::Value =
            serde_json::from_str(&mock.complete_raw(&req).unwrap()).unwrap();
        assert_eq!(v["score"], 10);
    }
}
