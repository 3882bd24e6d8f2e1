//! Word co-occurrence metrics over the reference corpus: NPMI coherence and
//! bag-of-words topic diversity.

use super::MetricsError;
use std::collections::{BTreeMap, BTreeSet};

const SMOOTHING: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NpmiReport {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    /// Word pairs skipped because a word never appears in the corpus.
    pub skipped_pairs: usize,
}

/// NPMI per topic over all top-word pairs, with document-level
/// co-occurrence probabilities:
///
/// ```text
/// npmi(wi, wj) = ln(P(wi,wj) / (P(wi) P(wj))) / (-ln P(wi,wj))
/// ```
///
/// where the joint probability carries additive smoothing. Pairs involving
/// a word with zero document frequency are skipped and counted.
pub fn npmi_coherence(
    topics: &[Vec<String>],
    reference_docs: &[Vec<String>],
) -> Result<NpmiReport, MetricsError> {
    if reference_docs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    for t in topics {
        if t.len() < 2 {
            return Err(MetricsError::TooFewWords(t.len()));
        }
    }
    let d = reference_docs.len() as f64;
    let doc_sets: Vec<BTreeSet<&str>> = reference_docs
        .iter()
        .map(|doc| doc.iter().map(|t| t.as_str()).collect())
        .collect();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for set in &doc_sets {
        for &w in set {
            *df.entry(w).or_insert(0) += 1;
        }
    }
    let joint_df = |a: &str, b: &str| -> usize {
        doc_sets
            .iter()
            .filter(|s| s.contains(a) && s.contains(b))
            .count()
    };

    let mut per_topic = Vec::with_capacity(topics.len());
    let mut skipped_pairs = 0usize;
    for topic in topics {
        let mut pair_scores = Vec::new();
        for i in 0..topic.len() {
            for j in (i + 1)..topic.len() {
                let (wi, wj) = (topic[i].as_str(), topic[j].as_str());
                let dfi = df.get(wi).copied().unwrap_or(0);
                let dfj = df.get(wj).copied().unwrap_or(0);
                if dfi == 0 || dfj == 0 {
                    skipped_pairs += 1;
                    continue;
                }
                // Probabilities clamp just below 1 so that a pair present
                // in every document hits the perfect-dependence limit (+1)
                // instead of dividing by ln(1) = 0.
                let cap = 1.0 - 1e-9;
                let p_i = (dfi as f64 / d).min(cap);
                let p_j = (dfj as f64 / d).min(cap);
                let p_ij = ((joint_df(wi, wj) as f64 + SMOOTHING) / d).min(cap);
                let npmi = (p_ij / (p_i * p_j)).ln() / (-p_ij.ln());
                pair_scores.push(npmi.clamp(-1.0, 1.0));
            }
        }
        per_topic.push(if pair_scores.is_empty() {
            0.0
        } else {
            pair_scores.iter().sum::<f64>() / pair_scores.len() as f64
        });
    }
    let mean = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.iter().sum::<f64>() / per_topic.len() as f64
    };
    Ok(NpmiReport {
        per_topic,
        mean,
        skipped_pairs,
    })
}

/// Unique words across all top-word lists over total list length. A single
/// topic always scores 1.0 because its own list has no duplicates.
pub fn bow_topic_diversity(topics: &[Vec<String>]) -> Result<f64, MetricsError> {
    if topics.is_empty() {
        return Err(MetricsError::EmptyTopicList);
    }
    let total: usize = topics.iter().map(|t| t.len()).sum();
    if total == 0 {
        return Err(MetricsError::TooFewWords(0));
    }
    let unique: BTreeSet<&str> = topics
        .iter()
        .flat_map(|t| t.iter().map(|w| w.as_str()))
        .collect();
    Ok(unique.len() as f64 / total as f64)
}
