//! The four LLM-judge metrics. Every score comes back normalized to [0, 1]
//! via the exact /10 rule; aggregates are unweighted means unless stated.

use super::MetricsError;
use crate::llm::{JudgeRubric, LlmClient, RubricId};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct JudgedMetric {
    pub per_item: Vec<f64>,
    pub mean: f64,
}

fn mean_of(scores: &[f64]) -> f64 {
    if scores.is_empty() {
        0.0
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

/// Judge-scored semantic fit between a topic's name/description and a
/// seeded sample of its member documents (sample size configurable).
pub fn topic_label_alignment(
    name: &str,
    description: &str,
    member_docs: &[String],
    client: &LlmClient,
    sample_size: usize,
    seed: u64,
) -> Result<JudgedMetric, MetricsError> {
    if member_docs.is_empty() {
        return Err(MetricsError::NoMemberDocs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<&String> = member_docs.iter().collect();
    let take = sample_size.min(pool.len());
    for i in 0..take {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    let rubric = JudgeRubric::standard(RubricId::LabelAlignment);
    let mut per_item = Vec::with_capacity(take);
    for doc in pool.into_iter().take(take) {
        let inputs = BTreeMap::from([
            ("topic_name".to_string(), name.to_string()),
            ("topic_short_description".to_string(), description.to_string()),
            ("document".to_string(), doc.clone()),
        ]);
        per_item.push(client.judge(&rubric, &inputs)?.normalized);
    }
    Ok(JudgedMetric {
        mean: mean_of(&per_item),
        per_item,
    })
}

#[derive(Debug, Clone)]
pub struct DiversityOutcome {
    pub score: f64,
    pub n_components: usize,
    /// Unordered pairs the judge scored >= 9 (semantically equivalent).
    pub equivalent_pairs: Vec<(usize, usize)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Semantic-based topic diversity: judge every unordered pair, connect
/// pairs scoring raw >= 9, and return components / topics.
pub fn semantic_topic_diversity(
    topics: &[(String, String)],
    client: &LlmClient,
) -> Result<DiversityOutcome, MetricsError> {
    if topics.is_empty() {
        return Err(MetricsError::EmptyTopicList);
    }
    let n = topics.len();
    let rubric = JudgeRubric::standard(RubricId::SemanticSimilarity);
    let mut uf = UnionFind::new(n);
    let mut equivalent_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let inputs = BTreeMap::from([
                ("topic_name_1".to_string(), topics[i].0.clone()),
                ("topic_short_description_1".to_string(), topics[i].1.clone()),
                ("topic_name_2".to_string(), topics[j].0.clone()),
                ("topic_short_description_2".to_string(), topics[j].1.clone()),
            ]);
            let score = client.judge(&rubric, &inputs)?;
            if score.raw >= 9 {
                uf.union(i, j);
                equivalent_pairs.push((i, j));
            }
        }
    }
    let mut roots = std::collections::BTreeSet::new();
    for i in 0..n {
        roots.insert(uf.find(i));
    }
    Ok(DiversityOutcome {
        score: roots.len() as f64 / n as f64,
        n_components: roots.len(),
        equivalent_pairs,
    })
}

/// Judge-scored imaginability/narrowness of one topic.
pub fn specificity(
    name: &str,
    description: &str,
    client: &LlmClient,
) -> Result<f64, MetricsError> {
    let rubric = JudgeRubric::standard(RubricId::Specificity);
    let inputs = BTreeMap::from([
        ("topic_name".to_string(), name.to_string()),
        ("topic_short_description".to_string(), description.to_string()),
    ]);
    Ok(client.judge(&rubric, &inputs)?.normalized)
}

/// Judge-scored absence of mutually opposing stance readings.
pub fn polarity_stance_consistency(
    name: &str,
    description: &str,
    client: &LlmClient,
) -> Result<f64, MetricsError> {
    let rubric = JudgeRubric::standard(RubricId::StanceConsistency);
    let inputs = BTreeMap::from([
        ("topic_name".to_string(), name.to_string()),
        ("topic_short_description".to_string(), description.to_string()),
    ]);
    Ok(client.judge(&rubric, &inputs)?.normalized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{LlmClientOptions, ScriptedChatProvider, ScriptedResponse};
    use std::sync::Arc;

    fn scripted_client(scores: Vec<i64>) -> LlmClient {
        let responses = scores
            .into_iter()
            .map(|s| ScriptedResponse::Text(format!("{{\"score\":{},\"reason\":\"r\"}}", s)))
            .collect();
        LlmClient::new(
            Arc::new(ScriptedChatProvider::new(responses)),
            LlmClientOptions {
                backoff_base_ms: 0,
                ..Default::default()
            },
        )
    }

    #[test]
    fn alignment_all_tens_is_one() {
        let client = scripted_client(vec![10, 10, 10]);
        let docs = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let m = topic_label_alignment("n", "d", &docs, &client, 30, 7).unwrap();
        assert_eq!(m.mean, 1.0);
    }

    #[test]
    fn alignment_mixed_scores_average() {
        let client = scripted_client(vec![10, 8, 6]);
        let docs = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let m = topic_label_alignment("n", "d", &docs, &client, 30, 7).unwrap();
        assert!((m.mean - 0.8).abs() < 1e-12);
    }

    #[test]
    fn alignment_zero_is_zero() {
        let client = scripted_client(vec![0]);
        let docs = vec!["a".to_string()];
        let m = topic_label_alignment("n", "d", &docs, &client, 30, 7).unwrap();
        assert_eq!(m.mean, 0.0);
    }

    #[test]
    fn diversity_no_edges_is_one() {
        // 3 topics, 3 pairs, all scored below 9.
        let client = scripted_client(vec![8, 5, 0]);
        let topics = vec![
            ("a".to_string(), "da".to_string()),
            ("b".to_string(), "db".to_string()),
            ("c".to_string(), "dc".to_string()),
        ];
        let out = semantic_topic_diversity(&topics, &client).unwrap();
        assert_eq!(out.score, 1.0);
    }

    #[test]
    fn diversity_all_equivalent_is_one_over_n() {
        // 4 topics, 6 pairs, all 10.
        let client = scripted_client(vec![10; 6]);
        let topics: Vec<(String, String)> = (0..4)
            .map(|i| (format!("t{}", i), format!("d{}", i)))
            .collect();
        let out = semantic_topic_diversity(&topics, &client).unwrap();
        assert!((out.score - 0.25).abs() < 1e-12);
    }

    #[test]
    fn diversity_chain_components() {
        // 5 topics; edges (0,1) and (1,2) only.
        // Pair order: (0,1),(0,2),(0,3),(0,4),(1,2),(1,3),(1,4),(2,3),(2,4),(3,4)
        let scores = vec![9, 0, 0, 0, 10, 0, 0, 0, 0, 0];
        let client = scripted_client(scores);
        let topics: Vec<(String, String)> = (0..5)
            .map(|i| (format!("t{}", i), format!("d{}", i)))
            .collect();
        let out = semantic_topic_diversity(&topics, &client).unwrap();
        assert_eq!(out.n_components, 3);
        assert!((out.score - 0.6).abs() < 1e-12);
    }

    #[test]
    fn specificity_and_consistency_normalize() {
        let client = scripted_client(vec![9]);
        assert!((specificity("n", "d", &client).unwrap() - 0.9).abs() < 1e-12);
        let client = scripted_client(vec![10]);
        assert_eq!(polarity_stance_consistency("n", "d", &client).unwrap(), 1.0);
    }
}
