//! Class-based TF-IDF for topic top words: relative term frequency within a
//! cluster times `ln(k / cluster-document-frequency)`. Ties break by higher
//! raw frequency, then lexicographic order, so word lists are reproducible.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerMode {
    /// Lowercased split on whitespace and punctuation.
    Words,
    /// Character bigrams, for scripts without word separators.
    CharBigrams,
}

impl Default for TokenizerMode {
    fn default() -> Self {
        TokenizerMode::Words
    }
}

pub fn tokenize(text: &str, mode: TokenizerMode) -> Vec<String> {
    match mode {
        TokenizerMode::Words => text
            .to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(|t| t.to_string())
            .collect(),
        TokenizerMode::CharBigrams => {
            let chars: Vec<char> = text
                .to_lowercase()
                .chars()
                .filter(|c| c.is_alphanumeric())
                .collect();
            if chars.len() < 2 {
                return chars.iter().map(|c| c.to_string()).collect();
            }
            chars.windows(2).map(|w| w.iter().collect()).collect()
        }
    }
}

/// Top `n_words` terms per cluster. `clusters[c]` holds the texts of class
/// `c`; the class count `k` is `clusters.len()`.
pub fn class_tfidf_top_words(
    clusters: &[Vec<String>],
    n_words: usize,
    mode: TokenizerMode,
) -> Vec<Vec<String>> {
    let k = clusters.len();
    if k == 0 {
        return Vec::new();
    }

    // term -> number of clusters containing it
    let mut cluster_df: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_cluster_tf: Vec<BTreeMap<String, usize>> = Vec::with_capacity(k);
    for texts in clusters {
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for text in texts {
            for token in tokenize(text, mode) {
                *tf.entry(token).or_insert(0) += 1;
            }
        }
        for term in tf.keys() {
            *cluster_df.entry(term.clone()).or_insert(0) += 1;
        }
        per_cluster_tf.push(tf);
    }

    per_cluster_tf
        .into_iter()
        .map(|tf| {
            let total: usize = tf.values().sum();
            if total == 0 {
                return Vec::new();
            }
            let mut scored: Vec<(f64, usize, String)> = tf
                .into_iter()
                .map(|(term, count)| {
                    let idf = (k as f64 / cluster_df[&term] as f64).ln();
                    let score = count as f64 / total as f64 * idf;
                    (score, count, term)
                })
                .collect();
            scored.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.1.cmp(&a.1))
                    .then(a.2.cmp(&b.2))
            });
            scored.into_iter().take(n_words).map(|(_, _, t)| t).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminative_terms_rank_first() {
        let clusters = vec![
            vec!["approval approval delay shared".to_string()],
            vec!["mentoring mentoring growth shared".to_string()],
        ];
        let words = class_tfidf_top_words(&clusters, 3, TokenizerMode::Words);
        assert_eq!(words[0][0], "approval");
        assert_eq!(words[1][0], "mentoring");
        // "shared" appears in both clusters: idf ln(2/2)=0, so it sorts last.
        assert_eq!(words[0].last().unwrap(), "shared");
    }

    #[test]
    fn single_cluster_falls_back_to_frequency_order() {
        let clusters = vec![vec!["beta beta alpha alpha alpha gamma".to_string()]];
        let words = class_tfidf_top_words(&clusters, 3, TokenizerMode::Words);
        assert_eq!(words[0], vec!["alpha", "beta", "gamma"]);
    }

    #[test]
    fn char_bigrams_for_unsegmented_text() {
        let tokens = tokenize("意思決定", TokenizerMode::CharBigrams);
        assert_eq!(tokens, vec!["意思", "思決", "決定"]);
    }

    #[test]
    fn fewer_distinct_terms_gives_shorter_list() {
        let clusters = vec![vec!["one two".to_string()]];
        let words = class_tfidf_top_words(&clusters, 10, TokenizerMode::Words);
        assert_eq!(words[0].len(), 2);
    }
}
