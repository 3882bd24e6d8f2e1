//! Rubric definitions for the LLM judge.
//!
//! A rubric is a set of ordered evaluation steps, a criterion question, and
//! score-range interpretations that together partition the 0-10 scale. The
//! judge renders these into a single scoring prompt and expects
//! `{"score": int, "reason": str}` back.
//!
//! Note on `StanceSimilarity`: its rubric scores stance *distinctness* --
//! 9-10 means the two topics express clearly opposing or mutually exclusive
//! positions, 0-2 means they share almost the same stance. The integration
//! distance consumes the score with exactly that orientation.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RubricId {
    StanceSimilarity,
    LabelAlignment,
    Specificity,
    StanceConsistency,
    SemanticSimilarity,
}

impl RubricId {
    pub fn all() -> [RubricId; 5] {
        [
            RubricId::StanceSimilarity,
            RubricId::LabelAlignment,
            RubricId::Specificity,
            RubricId::StanceConsistency,
            RubricId::SemanticSimilarity,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            RubricId::StanceSimilarity => "stance_similarity",
            RubricId::LabelAlignment => "label_alignment",
            RubricId::Specificity => "specificity",
            RubricId::StanceConsistency => "stance_consistency",
            RubricId::SemanticSimilarity => "semantic_similarity",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreRange {
    pub lo: u8,
    pub hi: u8,
    pub description: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeRubric {
    pub rubric_id: RubricId,
    pub criteria_steps: Vec<String>,
    pub criteria_prompt: String,
    pub score_ranges: Vec<ScoreRange>,
}

fn range(lo: u8, hi: u8, description: &str) -> ScoreRange {
    ScoreRange {
        lo,
        hi,
        description: description.to_string(),
    }
}

impl JudgeRubric {
    pub fn standard(id: RubricId) -> JudgeRubric {
        match id {
            RubricId::StanceSimilarity => JudgeRubric {
                rubric_id: id,
                criteria_steps: vec![
                    "Read the topic labels and descriptions of the two topics carefully."
                        .to_string(),
                    "Compare the main themes, concepts, and ideas expressed in both topics."
                        .to_string(),
                    "Determine whether the topics are clearly distinct in stances.".to_string(),
                ],
                criteria_prompt: "Are the two topics clearly distinct in stance, describing \
                                  opposing or mutually exclusive positions on a theme or idea?"
                    .to_string(),
                score_ranges: vec![
                    range(0, 2, "The two topics have almost the same stance (very low stance diversity)."),
                    range(3, 5, "The topics are somewhat distinct in stance (low stance diversity)."),
                    range(6, 8, "The topics are mostly different in stance (moderate stance diversity)."),
                    range(9, 10, "The topics are clearly distinct, expressing opposing or mutually exclusive positions on a theme or idea (high stance diversity)."),
                ],
            },
            RubricId::LabelAlignment => JudgeRubric {
                rubric_id: id,
                criteria_steps: vec![
                    "Read the topic label and topic description carefully.".to_string(),
                    "Read the given document associated with the topic.".to_string(),
                    "For the given document, strictly judge whether its main meaning, theme, \
                     and details are fully and semantically captured by the topic label and \
                     description, and vice versa."
                        .to_string(),
                    "If any meaning-level mismatch, omission, or extraneous concept is found \
                     between the document and the label and description, even if minor, count \
                     the document as misaligned."
                        .to_string(),
                ],
                criteria_prompt: "For the document, do the topic label and description align \
                                  completely and semantically with its content?"
                    .to_string(),
                score_ranges: vec![
                    range(0, 2, "The document is largely misaligned with the topic label and description; its main meaning, theme, or details differ substantially, and the label fails to capture the document's semantic core."),
                    range(3, 5, "The document shows partial alignment, but key meanings or important details are missing or incorrectly represented."),
                    range(6, 8, "The document is mostly aligned; minor omissions or slight semantic mismatches are present, but the overall meaning is adequately captured."),
                    range(9, 10, "The document is fully and semantically aligned; its central meaning, theme, and key details are precisely and completely represented."),
                ],
            },
            RubricId::Specificity => JudgeRubric {
                rubric_id: id,
                criteria_steps: vec![
                    "Read the topic label and its description carefully.".to_string(),
                    "When it becomes clear that the topic has a positive or negative impact on \
                     business performance or employee engagement, evaluate whether the leader \
                     --- the subject of the topic --- can easily form an actionable mental \
                     image of the behavioral changes they should implement."
                        .to_string(),
                    "Evaluate whether the topic refers to a narrowly defined situation rather \
                     than a broad or generalized category of issues."
                        .to_string(),
                    "If the topic relies on overly broad themes or spans multiple unrelated \
                     aspects, treat it as low in specificity."
                        .to_string(),
                ],
                criteria_prompt: "This criterion evaluates the topic along two axes: (i) \
                                  imaginability --- whether a concrete and actionable mental \
                                  image can be formed; and (ii) specificity --- whether the \
                                  described situation is narrow and well-defined rather than \
                                  overly broad or semantically dispersed. Is the topic \
                                  imaginable and specific enough for the leader?"
                    .to_string(),
                score_ranges: vec![
                    range(0, 2, "Extremely low specificity and imaginability. The topic is abstract, overly broad, or mixes multiple unrelated aspects, preventing a coherent mental image. The leader cannot visualize who is acting, what is happening, or in what situation. Example: 組織迷走と多問題化（経営層の方向性が不明確なまま、複数の問題が同時に生じている状況）。"),
                    range(3, 5, "Low specificity and imaginability. Some concrete elements are present, but the topic remains broad or semantically dispersed, making it difficult to form a single actionable scenario. The leader can grasp the general idea but not a coherent behavioral change. Example: 新規事業推進の負荷増大（意思決定遅延と情報共有不足により現場負荷が増加している状態）。"),
                    range(6, 8, "Moderate to high specificity and imaginability. The topic is reasonably focused with identifiable actors and actions, allowing a mostly coherent mental image, though some details may remain generalized. Example: 承認停滞を生む業務放置（管理職によるレビュー遅延で業務進行が滞る状況）。"),
                    range(9, 10, "Very high specificity and imaginability. The topic is narrow, concrete, and semantically unified, with clear actors, actions, and context. The leader can immediately visualize a vivid and actionable scene. Example: 会議発言遮断による停滞（週次会議で部長が部下の発言を遮る場面）。"),
                ],
            },
            RubricId::StanceConsistency => JudgeRubric {
                rubric_id: id,
                criteria_steps: vec![
                    "Read the topic label and description carefully.".to_string(),
                    "Paraphrase the main phenomenon, condition, or state described, without \
                     considering emotional or evaluative direction."
                        .to_string(),
                    "Consider whether the topic could plausibly be interpreted as describing \
                     more than one mutually exclusive or opposite state, such as presence vs. \
                     absence, strong vs. weak, positive vs. negative, or increase vs. decrease."
                        .to_string(),
                    "List the main plausible interpretations regarding the presence, absence, \
                     or degree of the phenomenon. If any pair of interpretations are mutually \
                     exclusive or opposites, mark the topic as inconsistent. If only a single \
                     meaning or state is reasonably plausible, mark it as consistent."
                        .to_string(),
                ],
                criteria_prompt: "Do the topic label and description allow for mutually \
                                  exclusive or opposite meanings (e.g., presence vs. absence, \
                                  high vs. low, increase vs. decrease)? If any pair of \
                                  plausible interpretations are opposites or mutually \
                                  exclusive, the topic is inconsistent, regardless of \
                                  evaluative direction. If only one meaning or state is \
                                  reasonably plausible, the topic is consistent."
                    .to_string(),
                score_ranges: vec![
                    range(0, 2, "The topic is clearly contradictory or contains explicitly opposing stances, making it impossible to assign a single position. Example: \"Manager's management of subordinates\" (describes various and opposing behaviors and attitudes without indicating a clear stance)."),
                    range(3, 5, "The topic somewhat includes opposing or conflicting stances. Both positive and negative interpretations are possible, but one may be slightly more dominant."),
                    range(6, 8, "The topic is generally consistent in stance, though minor ambiguity or alternative interpretations are possible."),
                    range(9, 10, "The topic is clearly consistent, expressing a single and unambiguous stance. Example: \"Supportive management practices\" (clearly indicates a positive stance)."),
                ],
            },
            RubricId::SemanticSimilarity => JudgeRubric {
                rubric_id: id,
                criteria_steps: vec![
                    "Based on the topic names and descriptions, evaluate similarity using the \
                     criteria below and assign a score on a 10-point scale."
                        .to_string(),
                    "Check whether the topic names describe similar content.".to_string(),
                    "Check whether the topic descriptions describe similar content.".to_string(),
                    "Similarity requires a comparable level of granularity and matching \
                     evaluative or affective nuances (e.g., positive vs. negative)."
                        .to_string(),
                ],
                criteria_prompt: "To evaluate the diversity of topic modeling results, judge \
                                  the semantic similarity between the two topics."
                    .to_string(),
                score_ranges: vec![
                    range(0, 2, "Completely different content. Example: \"Lack of teamwork\" (inability or unwillingness to cooperate with team members) vs. \"One-on-one meetings\" (regular one-on-one meetings between supervisors and subordinates)."),
                    range(3, 5, "Partially related, but different in granularity or nuance. Example: \"Lack of teamwork\" vs. \"Teamwork culture\" (organizational culture regarding collaboration)."),
                    range(6, 8, "Semantically similar despite lexical differences. Example: \"Lack of teamwork\" vs. \"Passive teamwork\" (collaboration characterized by passive attitudes)."),
                    range(9, 10, "Nearly or fully identical wording and content; topic names and descriptions match."),
                ],
            },
        }
    }

    /// The score ranges must partition 0-10 without gaps or overlaps.
    pub fn validate(&self) -> bool {
        let mut covered = [false; 11];
        for r in &self.score_ranges {
            if r.lo > r.hi || r.hi > 10 {
                return false;
            }
            for s in r.lo..=r.hi {
                if covered[s as usize] {
                    return false;
                }
                covered[s as usize] = true;
            }
        }
        covered.iter().all(|&c| c)
    }

    /// Renders the rubric and its named inputs into a scoring prompt.
    pub fn render(&self, inputs: &BTreeMap<String, String>) -> String {
        let mut out = String::new();
        out.push_str(&format!("# Criteria name\n{}\n\n", self.rubric_id.name()));
        out.push_str("# Evaluation steps\n");
        for (i, step) in self.criteria_steps.iter().enumerate() {
            out.push_str(&format!("{}. {}\n", i + 1, step));
        }
        out.push_str(&format!("\n# Criteria (prompt)\n{}\n\n", self.criteria_prompt));
        out.push_str("# Rubric (score interpretation)\n");
        for r in &self.score_ranges {
            out.push_str(&format!("{}-{}: {}\n", r.lo, r.hi, r.description));
        }
        out.push_str("\n# Inputs\n");
        for (key, value) in inputs {
            out.push_str(&format!("{}: {}\n", key, value));
        }
        out.push_str(
            "\n# Output format\nScore the inputs on the 0-10 scale above and output JSON:\n\
             {\"score\": 0, \"reason\": \"reason for the score\"}\n",
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_rubrics_partition_the_scale() {
        for id in RubricId::all() {
            assert!(JudgeRubric::standard(id).validate(), "{:?}", id);
        }
    }

    #[test]
    fn render_includes_inputs_and_ranges() {
        let rubric = JudgeRubric::standard(RubricId::SemanticSimilarity);
        let inputs = BTreeMap::from([
            ("topic_name_1".to_string(), "alpha".to_string()),
            ("topic_name_2".to_string(), "beta".to_string()),
        ]);
        let prompt = rubric.render(&inputs);
        assert!(prompt.contains("semantic_similarity"));
        assert!(prompt.contains("topic_name_1: alpha"));
        assert!(prompt.contains("9-10:"));
    }
}
