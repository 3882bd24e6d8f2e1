//! End-to-end pipeline run over the planted corpus with mock providers.

use std::collections::BTreeMap;
use std::sync::Arc;

use topiclens::corpus::slice_corpus;
use topiclens::embedding::HashEmbedder;
use topiclens::fixtures::{planted_corpus, PlantedConfig};
use topiclens::llm::{LlmClient, LlmClientOptions, MockChatProvider};
use topiclens::pipeline::{PipelineConfig, PipelineRunner, Stage};

fn runner_config(seed: u64) -> PipelineConfig {
    PipelineConfig {
        min_cluster_size: 50,
        seed,
        ..Default::default()
    }
}

/// Purity of recovered topics against the planted (theme, polarity) cells.
fn purity(
    topics: &[topiclens::pipeline::Topic],
    cells: &BTreeMap<String, (usize, bool)>,
) -> f64 {
    let mut matched = 0usize;
    let mut total = 0usize;
    for topic in topics {
        let mut cell_counts: BTreeMap<(usize, bool), usize> = BTreeMap::new();
        for id in &topic.member_passage_ids {
            if let Some(cell) = cells.get(id) {
                *cell_counts.entry(*cell).or_insert(0) += 1;
            }
        }
        let best = cell_counts.values().max().copied().unwrap_or(0);
        matched += best;
        total += topic.member_passage_ids.len();
    }
    if total == 0 {
        0.0
    } else {
        matched as f64 / total as f64
    }
}

#[test]
fn planted_corpus_recovers_four_cells() {
    let corpus = planted_corpus(&PlantedConfig {
        seed: 7,
        ..Default::default()
    });
    let sliced = slice_corpus(&corpus.passages);
    let slice = sliced.slices.values().find(|s| !s.passages.is_empty()).unwrap();
    assert_eq!(slice.passages.len(), 400);

    let chat = LlmClient::new(
        Arc::new(MockChatProvider::new()),
        LlmClientOptions {
            backoff_base_ms: 0,
            ..Default::default()
        },
    );
    let embedder = HashEmbedder::new(64);
    let mut runner = PipelineRunner::new(slice, &chat, &embedder, None, runner_config(7));

    let named = runner.build_initial_topics().unwrap();
    assert_eq!(named.stage, Stage::Named);
    assert_eq!(named.topics.len(), 2, "two planted themes");
    for t in &named.topics {
        assert!(!t.name.is_empty());
        assert_eq!(t.top_words.len(), 10);
        assert!(t.representative_ids.len() <= 30);
    }

    let reassigned = runner.refine_assignments(&named, None).unwrap();
    assert_eq!(reassigned.stage, Stage::Reassigned);
    let assigned_total: usize = reassigned
        .topics
        .iter()
        .map(|t| t.member_passage_ids.len())
        .sum();
    assert!(assigned_total >= 300, "most passages stay assigned, got {}", assigned_total);

    let split = runner.split_by_polarity(&reassigned).unwrap();
    assert_eq!(split.stage, Stage::Split);
    assert_eq!(split.topics.len(), 4, "each theme splits into two stances");
    let p = purity(&split.topics, &corpus.cell_of_passage);
    assert!(p >= 0.95, "purity {}", p);
    // No retired parent id appears in any member set, and parents are gone.
    for t in &split.topics {
        assert!(t.parent_id.is_some());
    }

    let integrated = runner.integrate_topics(&split, 2).unwrap();
    assert_eq!(integrated.stage, Stage::Integrated);
    assert_eq!(integrated.topics.len(), 2);
    // Same-theme children merged: each integrated topic holds one theme.
    for topic in &integrated.topics {
        let themes: std::collections::BTreeSet<usize> = topic
            .member_passage_ids
            .iter()
            .filter_map(|id| corpus.cell_of_passage.get(id).map(|(theme, _)| *theme))
            .collect();
        assert_eq!(themes.len(), 1, "merged topic mixes themes");
    }
}

#[test]
fn identical_runs_give_identical_hashes() {
    let corpus = planted_corpus(&PlantedConfig {
        per_cell: 60,
        seed: 3,
        ..Default::default()
    });
    let sliced = slice_corpus(&corpus.passages);
    let slice = sliced.slices.values().find(|s| !s.passages.is_empty()).unwrap();
    let embedder = HashEmbedder::new(64);

    let run = || {
        let chat = LlmClient::new(
            Arc::new(MockChatProvider::new()),
            LlmClientOptions {
                backoff_base_ms: 0,
                ..Default::default()
            },
        );
        let mut runner = PipelineRunner::new(
            slice,
            &chat,
            &embedder,
            None,
            PipelineConfig {
                min_cluster_size: 30,
                seed: 3,
                ..Default::default()
            },
        );
        let named = runner.build_initial_topics().unwrap();
        let reassigned = runner.refine_assignments(&named, None).unwrap();
        let split = runner.split_by_polarity(&reassigned).unwrap();
        split.provenance.clone()
    };
    assert_eq!(run(), run());
}
