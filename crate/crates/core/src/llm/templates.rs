//! Prompt templates for the five structured LLM operations.
//!
//! Each template is a plain string with `{placeholder}` slots and a typed
//! response schema. Templates exist in English and Japanese; the run
//! configuration selects the language.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Extract,
    NameTopic,
    AssignTopics,
    PolaritySplit,
    ChildAssign,
}

impl TemplateId {
    pub fn all() -> [TemplateId; 5] {
        [
            TemplateId::Extract,
            TemplateId::NameTopic,
            TemplateId::AssignTopics,
            TemplateId::PolaritySplit,
            TemplateId::ChildAssign,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            TemplateId::Extract => "extract",
            TemplateId::NameTopic => "name_topic",
            TemplateId::AssignTopics => "assign_topics",
            TemplateId::PolaritySplit => "polarity_split",
            TemplateId::ChildAssign => "child_assign",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptLanguage {
    English,
    Japanese,
}

impl Default for PromptLanguage {
    fn default() -> Self {
        PromptLanguage::English
    }
}

/// Expected type of a field in a structured response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldType {
    String,
    Integer,
    Boolean,
    List,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub field_type: FieldType,
}

#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub template_id: TemplateId,
    pub body: String,
    pub response_schema: Vec<FieldSpec>,
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("unbound placeholder '{{{0}}}' in template")]
    UnboundPlaceholder(String),
    #[error("rendered prompt is empty")]
    EmptyPrompt,
}

fn field(name: &str, field_type: FieldType) -> FieldSpec {
    FieldSpec {
        name: name.to_string(),
        field_type,
    }
}

impl PromptTemplate {
    pub fn get(id: TemplateId, language: PromptLanguage) -> PromptTemplate {
        let body = match (id, language) {
            (TemplateId::Extract, PromptLanguage::English) => EXTRACT_EN,
            (TemplateId::Extract, PromptLanguage::Japanese) => EXTRACT_JA,
            (TemplateId::NameTopic, PromptLanguage::English) => NAME_TOPIC_EN,
            (TemplateId::NameTopic, PromptLanguage::Japanese) => NAME_TOPIC_JA,
            (TemplateId::AssignTopics, PromptLanguage::English) => ASSIGN_TOPICS_EN,
            (TemplateId::AssignTopics, PromptLanguage::Japanese) => ASSIGN_TOPICS_JA,
            (TemplateId::PolaritySplit, PromptLanguage::English) => POLARITY_SPLIT_EN,
            (TemplateId::PolaritySplit, PromptLanguage::Japanese) => POLARITY_SPLIT_JA,
            (TemplateId::ChildAssign, PromptLanguage::English) => CHILD_ASSIGN_EN,
            (TemplateId::ChildAssign, PromptLanguage::Japanese) => CHILD_ASSIGN_JA,
        };
        let response_schema = match id {
            TemplateId::Extract => vec![field("extractions", FieldType::List)],
            TemplateId::NameTopic => vec![
                field("topic_name", FieldType::String),
                field("topic_short_description", FieldType::String),
            ],
            TemplateId::AssignTopics => vec![field("topic_list", FieldType::List)],
            TemplateId::PolaritySplit => vec![
                field("contain_opposing_stance", FieldType::Boolean),
                field("child_topics", FieldType::List),
            ],
            TemplateId::ChildAssign => vec![
                field("topic_id", FieldType::Integer),
                field("topic_name", FieldType::String),
                field("reason", FieldType::String),
            ],
        };
        PromptTemplate {
            template_id: id,
            body: body.to_string(),
            response_schema,
        }
    }

    /// Substitutes every `{placeholder}` with its binding. Fails if a
    /// placeholder has no binding or the result is empty.
    pub fn render(&self, bindings: &BTreeMap<String, String>) -> Result<String, TemplateError> {
        let mut out = self.body.clone();
        for (key, value) in bindings {
            out = out.replace(&format!("{{{}}}", key), value);
        }
        if let Some(unbound) = find_placeholder(&out) {
            return Err(TemplateError::UnboundPlaceholder(unbound));
        }
        if out.trim().is_empty() {
            return Err(TemplateError::EmptyPrompt);
        }
        Ok(out)
    }
}

/// Finds the first `{identifier}`-shaped placeholder left in `text`.
fn find_placeholder(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len()
                && (bytes[j].is_ascii_lowercase() || bytes[j] == b'_' || bytes[j].is_ascii_digit())
            {
                j += 1;
            }
            if j > start && j < bytes.len() && bytes[j] == b'}' {
                return Some(text[start..j].to_string());
            }
            i = j;
        } else {
            i += 1;
        }
    }
    None
}

/// Default extraction-target bindings for leadership corpora. Callers may
/// override any of these to retarget the extraction step.
pub fn default_extract_bindings() -> BTreeMap<String, String> {
    BTreeMap::from([
        (
            "extraction_target".to_string(),
            "Descriptions of leader-related attributes that are explicitly stated in the \
             review text and attributable to an individual leader."
                .to_string(),
        ),
        (
            "extraction_target_supplement".to_string(),
            "Exclude wishes or ideals, statements about general employees, company policies, \
             or organizational features, and passive statements. Do not infer beyond the text; \
             preserve the original meaning; split into minimal concise units."
                .to_string(),
        ),
        (
            "classification_guideline".to_string(),
            "Label target_leader_layer as one of top / non_top / unknown, and element_type as \
             one of behavior / attitude / ability / other. Use unknown or other when the \
             evidence is insufficient."
                .to_string(),
        ),
        (
            "output_json_schema".to_string(),
            r#"{
  "extractions": [
    {
      "text": "extracted passage",
      "target_leader_layer": "top | non_top | unknown",
      "element_type": "behavior | attitude | ability | other",
      "implicit_extraction": false,
      "change_meaning": false,
      "is_past": false
    }
  ]
}"#
            .to_string(),
        ),
    ])
}

const EXTRACT_EN: &str = r#"# Task
From the given text, extract instances of the specified extraction target at the minimum granularity, and classify them according to the provided classification guidelines.

# Requirements
- If multiple instances of the extraction target are present, extract all of them.
- If no instances of the extraction target are found, return an empty list.
- Avoid speculative or overly interpretive reasoning, and base the extraction strictly on information explicitly stated in the text.

# Metadata for the given text
{input_text_metadata}

# Given text
{input_text}

# Extraction target
{extraction_target}

# Supplementary definition of the extraction target
{extraction_target_supplement}

# Classification guidelines
{classification_guideline}

# Output format
Output the results in JSON using the following schema.
{output_json_schema}
"#;

const EXTRACT_JA: &str = r#"# タスク
与えられた文章から#抽出対象を最小粒度で抽出し、#分類仕様に従って分類してください。

# 要件
・抽出対象の記述が複数ある場合は、全て抽出してください。
・抽出対象の記述がない場合は、空リストを返してください。
・飛躍した解釈や過度な推測を避け、文章に明確に記載されている内容に基づいて抽出してください。

# 与えられた文章に関するメタ情報
{input_text_metadata}

# 与えられた文章
{input_text}

# 抽出対象
{extraction_target}

# 抽出対象の補足定義
{extraction_target_supplement}

# 分類仕様
{classification_guideline}

# 出力形式
以下の形式でJSONを出力してください。
{output_json_schema}
"#;

const NAME_TOPIC_EN: &str = r#"# Task
For a single topic generated by the topic model, determine an appropriate topic name by referring to the topic's top words and representative documents.

# Requirements
- In addition to the topic name (topic_name), provide a short description of the topic (topic_short_description).
- Output the result in JSON format.

# Supplementary naming guidelines
- The topic name should be a noun phrase.
- The topic name should be concise; avoid redundant expressions such as "A and B" or "A and B-related," and keep the number of words to a minimum.
- The topic name should comprehensively reflect the content of the representative documents.
- The topic name should be as specific as possible.
- The topic name should be consistent with the overall context inferred from the metadata of the topic modeling corpus.
- The topic description should consist of approximately one sentence and serve as a supplementary explanation of the topic name.

# Metadata of the topic modeling corpus
{document_metadata}

# Top words of the topic
{topic_top_words}

# Representative documents of the topic
{topic_representative_documents}

# Output schema
topic_name: string
topic_short_description: string

# Output format
{
  "topic_name": "Topic name",
  "topic_short_description": "Short description of the topic"
}
"#;

const NAME_TOPIC_JA: &str = r#"# タスク
トピックモデルによって作成された1つのトピックについて、#トピックの上位単語および#トピックの代表文章を参考に、適切なトピック名を決定してください。

# 要件
・トピック名（topic_name）に加えて、トピック名についての短い説明（topic_short_description）を付与してください。
・JSON形式で出力してください。

# 命名規則の補足定義
・トピック名は名詞句としてください。
・トピック名は簡潔な表現とし、「AとB」「AおよびBに関する〜」のような冗長な表現は避け、単語数はできるだけ少なくしてください。
・トピック名は、#トピックの代表文章の内容を網羅する表現としてください。
・トピック名は、可能な限り具体的な表現としてください。
・トピック名は、#トピックモデリング対象の文章全体のメタ情報から読み取れる文脈やニュアンスに沿った表現としてください。
・トピック説明は1文程度とし、トピック名の補足説明となる内容としてください。

# トピックモデリング対象の文章全体のメタ情報
{document_metadata}

# トピックの上位単語
{topic_top_words}

# トピックの代表文章
{topic_representative_documents}

# 出力型
topic_name: str
topic_short_description: str

# 出力形式
{
  "topic_name": "トピック名",
  "topic_short_description": "トピック名についての短い説明"
}
"#;

const ASSIGN_TOPICS_EN: &str = r#"# Task
Given the input text, select the topic or topics from the list of candidate topics to which the text corresponds.

# Requirements
- Judge whether the text corresponds to each topic by considering both the topic name and its description.
- If the text corresponds to multiple topics, select all applicable topics.
- For each selected topic, output the topic ID (topic_id), topic name (topic_name), and the reason for selection (reason).
- Output the results in JSON format.

# Supplementary guidelines for topic assignment
- Avoid judgments based on speculative or inferential reasoning.
- Select only topics that clearly apply to the text; apply a conservative judgment criterion.
- Make the judgment in accordance with the nuance inferred from the metadata of the input text.

# Notes on output
- If the text does not correspond to any topic, set the topic ID to -1 and the topic name to Other.
- Except for Other, do not output topics that are not included in the candidate topic list.

# Metadata of the text
{document_metadata}

# Candidate topics (legend: topic_id, topic name (topic description))
{topic_definitions}

# Input text
{input_text}

# Output format
{
  "topic_list": [
    {
      "topic_id": 0,
      "topic_name": "name",
      "reason": "reason"
    }
  ]
}
"#;

const ASSIGN_TOPICS_JA: &str = r#"# タスク
与えられた文章が、候補となるトピックのうちどのトピックに該当するかを選出してください。

# 要件
・トピック名およびトピックの説明の両方を確認したうえで、文章がトピックに該当するかを判断してください。
・複数のトピックに該当する場合は、複数選択してください。
・選択したトピックについて、トピックID（topic_id）、トピック名（topic_name）、および選択理由（reason）を出力してください。
・JSON形式で出力してください。

# トピック判定における補足定義
・飛躍した推測による判断は避けてください。
・明確に該当すると判断できるトピックのみを選出してください（厳しめの判断基準としてください）。
・文章のメタ情報を踏まえたニュアンスに沿って判断してください。

# 出力に関する注意点
・どのトピックにも該当しない場合は、トピックIDは -1、トピック名は その他 を選択してください。
・その他 を除き、候補となるトピックに記載されていないトピックは出力しないでください。

# 文章のメタ情報
{document_metadata}

# 候補となるトピック（凡例：トピックID，トピック名（トピック説明））
{topic_definitions}

# 文章
{input_text}

# 出力形式
{
  "topic_list": [
    {
      "topic_id": 0,
      "topic_name": "トピック名",
      "reason": "理由"
    }
  ]
}
"#;

const POLARITY_SPLIT_EN: &str = r#"# Task
For a single topic generated by the topic model, determine whether documents with opposing stances are mixed within the topic. If opposing stances are present, split the topic accordingly.

# Definition of terms
- "Opposing stances" refer to cases in which documents classified under the same topic convey conflicting meanings.
- Examples of opposing stances include contrasts such as "present vs. absent," "many vs. few," and "strong vs. weak."

# Requirements
- Output the judgment result indicating whether opposing stances are present (contain_opposing_stance).
- If topic splitting is required, output a list of child topics (child_topics).
- Each element of child_topics should be a dictionary containing the child topic name (child_topic_name), a short description (child_topic_short_description), up to three example documents (document_examples), and the reason for interpreting the stance as opposing (opposing_stance_reason).
- If splitting is not required, output an empty list for child_topics.
- Output the results in JSON format.

# Supplementary guidelines for judgment
- Topic information is provided in the topic name, description, and the set of documents assigned to the topic.
- Judge opposing stances only when documents can be clearly interpreted as conveying conflicting stances.

# Supplementary guidelines for naming child topics
- Child topic names should be noun phrases.
- Child topic names should be concise; avoid redundant expressions such as "A and B."
- Child topic names should be as specific as possible.
- Child topic names should be interpretable on their own without reference to the parent topic.
- Child topic names should reflect the overall context inferred from the metadata of the topic modeling corpus.

# Topic name and description
Topic name: {topic_name}
Topic description: {topic_short_description}

# Metadata of the topic modeling corpus
{document_metadata}

# Documents assigned to the topic
{topic_documents}

# Output format (if opposing stances are present)
{
  "contain_opposing_stance": true,
  "child_topics": [
    {
      "child_topic_name": "Child topic name 1",
      "child_topic_short_description": "Description of child topic 1",
      "document_examples": "Up to three example documents",
      "opposing_stance_reason": "Reason for interpreting the stance as opposing"
    },
    {
      "child_topic_name": "Child topic name 2",
      "child_topic_short_description": "Description of child topic 2",
      "document_examples": "Up to three example documents",
      "opposing_stance_reason": "Reason for interpreting the stance as opposing"
    }
  ]
}

# Output format (if no opposing stances are present)
{
  "contain_opposing_stance": false,
  "child_topics": []
}
"#;

const POLARITY_SPLIT_JA: &str = r#"# タスク
トピックモデルによって作成された1つのトピックに、スタンスが対立する文章が混在しているかどうかを判定してください。混在している場合は、そのトピックを分割してください。

# 用語の定義
・スタンスが対立するとは、同一トピックに分類されるものの、対立する意味合いを持つ文章が含まれている場合を指します。
・スタンスが対立する例として、「有る vs 無い」「多い vs 少ない」「強い vs 弱い」などがあります。

# 要件
・スタンスが対立する文章が混在しているかの判定結果（contain_opposing_stance）を出力してください。
・トピックの分割が必要な場合は、分割された子トピック（child_topics）のリストを出力してください。
・child_topics の各要素には、子トピック名（child_topic_name）、子トピックの説明（child_topic_short_description）、該当する文章例（最大3件、document_examples）、およびスタンスが対立すると解釈した理由（opposing_stance_reason）を含めてください。
・分割が不要な場合は、child_topics は空リストとしてください。
・JSON形式で出力してください。

# 判定における補足定義
・該当トピックの情報は、トピック名、トピック説明、およびトピックに該当する文章群に記載されています。
・明らかにスタンスが対立していると解釈できる文章が混在している場合のみ、スタンスが対立すると判定してください。

# 子トピック命名規則の補足定義
・名詞句としてください。
・簡潔な表現とし、「AとB」「AおよびBに関する〜」のような冗長な表現は避け、単語数はできるだけ少なくしてください。
・可能な限り具体的な表現としてください。
・親トピック名がなくても、子トピック名のみで意味が明確に解釈できる表現としてください。
・トピックモデリング対象の文章全体のメタ情報を考慮した表現としてください。

# トピック名と説明
トピック名: {topic_name}
トピック説明: {topic_short_description}

# トピックモデリング対象の文章全体のメタ情報
{document_metadata}

# トピックに該当する文章群
{topic_documents}

# 出力形式（スタンスが対立する文章が含まれている場合）
{
  "contain_opposing_stance": true,
  "child_topics": [
    {
      "child_topic_name": "子トピック名1",
      "child_topic_short_description": "子トピック名1の説明",
      "document_examples": "子トピック名1の文章例（最大3件）",
      "opposing_stance_reason": "子トピック2とスタンスが対立すると解釈した理由"
    },
    {
      "child_topic_name": "子トピック名2",
      "child_topic_short_description": "子トピック名2の説明",
      "document_examples": "子トピック名2の文章例（最大3件）",
      "opposing_stance_reason": "子トピック1とスタンスが対立すると解釈した理由"
    }
  ]
}

# 出力形式（スタンスが対立する文章が含まれていない場合）
{
  "contain_opposing_stance": false,
  "child_topics": []
}
"#;

const CHILD_ASSIGN_EN: &str = r#"# Task
Determine which of the candidate child topics best matches the input text that has been classified under the parent topic.

# Requirements
- Always output the topic ID (topic_id), topic name (topic_name), and the reason for the decision (reason).
- If the text does not match any of the candidate child topics, select Other.
- Output the result in JSON format.

# Supplementary guidelines for judgment
- Make the judgment by taking into account the metadata of the input text.

# Parent topic
{parent_topic}

# Input text
{input_text}

# Metadata of the text
{document_metadata}

# Candidate child topics (legend: topic_id, topic name (topic description))
{child_topic_definition}

# Output format
{
  "topic_id": 0,
  "topic_name": "name",
  "reason": "reason"
}
"#;

const CHILD_ASSIGN_JA: &str = r#"# タスク
親トピックに分類されている文章が、子トピック候補のいずれに一致するかを判断してください。

# 要件
・トピックID（topic_id）、トピック名（topic_name）、および判断理由（reason）を必ず出力してください。
・いずれの子トピック候補とも一致しない場合は、その他 を選択してください。
・JSON形式で出力してください。

# 判定の際の補足定義
・文章のメタ情報を考慮して判断してください。

# 親トピック
{parent_topic}

# 文章
{input_text}

# 文章のメタ情報
{document_metadata}

# トピック候補（凡例：トピックID，トピック名（トピック説明））
{child_topic_definition}

# 出力形式
{
  "topic_id": 0,
  "topic_name": "トピック名",
  "reason": "理由"
}
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_substitutes_all_placeholders() {
        let t = PromptTemplate::get(TemplateId::NameTopic, PromptLanguage::English);
        let bindings = BTreeMap::from([
            ("document_metadata".to_string(), "employee reviews".to_string()),
            ("topic_top_words".to_string(), "a, b, c".to_string()),
            (
                "topic_representative_documents".to_string(),
                "doc one\ndoc two".to_string(),
            ),
        ]);
        let rendered = t.render(&bindings).unwrap();
        assert!(rendered.contains("a, b, c"));
        assert!(!rendered.contains("{topic_top_words}"));
    }

    #[test]
    fn unbound_placeholder_is_an_error() {
        let t = PromptTemplate::get(TemplateId::NameTopic, PromptLanguage::English);
        let bindings = BTreeMap::from([(
            "topic_top_words".to_string(),
            "a".to_string(),
        )]);
        match t.render(&bindings) {
            Err(TemplateError::UnboundPlaceholder(p)) => {
                assert_eq!(p, "document_metadata");
            }
            other => panic!("expected unbound placeholder, got {:?}", other),
        }
    }

    #[test]
    fn json_output_examples_do_not_trip_placeholder_scan() {
        // The JSON braces in output-format sections must not be mistaken
        // for placeholders once real placeholders are bound.
        for id in TemplateId::all() {
            for lang in [PromptLanguage::English, PromptLanguage::Japanese] {
                let t = PromptTemplate::get(id, lang);
                let mut bindings = BTreeMap::new();
                let mut body = t.body.clone();
                while let Some(p) = find_placeholder(&body) {
                    bindings.insert(p.clone(), format!("<{}>", p));
                    body = body.replace(&format!("{{{}}}", p), "bound");
                }
                t.render(&bindings).unwrap();
            }
        }
    }

    #[test]
    fn japanese_and_english_share_placeholders() {
        for id in TemplateId::all() {
            let mut en = Vec::new();
            let mut body = PromptTemplate::get(id, PromptLanguage::English).body;
            while let Some(p) = find_placeholder(&body) {
                body = body.replace(&format!("{{{}}}", p), "");
                en.push(p);
            }
            let mut ja = Vec::new();
            let mut body = PromptTemplate::get(id, PromptLanguage::Japanese).body;
            while let Some(p) = find_placeholder(&body) {
                body = body.replace(&format!("{{{}}}", p), "");
                ja.push(p);
            }
            en.sort();
            ja.sort();
            assert_eq!(en, ja, "placeholder mismatch in {:?}", id);
        }
    }
}
