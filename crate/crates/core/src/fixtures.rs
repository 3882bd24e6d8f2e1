//! Deterministic synthetic data: a planted-structure corpus (themes x
//! polarities) wired to the mock providers' conventions, a mixed-tag
//! passage set for slicing tests, and panels with planted outcome effects.

use crate::corpus::{Characteristic, Document, LeaderPassage, LeaderType, PanelRow, SliceKey};
use crate::llm::{NEGATIVE_MARKERS, POSITIVE_MARKERS};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::{BTreeMap, BTreeSet};

const THEME_VOCABULARIES: [[&str; 10]; 2] = [
    [
        "approval", "workflow", "decision", "meeting", "escalation", "deadline", "process",
        "review", "handover", "signoff",
    ],
    [
        "mentoring", "career", "training", "feedback", "growth", "coaching", "promotion",
        "guidance", "development", "onboarding",
    ],
];

#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub per_cell: usize,
    pub n_firms: usize,
    pub years: Vec<i32>,
    pub theme_tokens_per_passage: usize,
    pub polarity_tokens_per_passage: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            per_cell: 100,
            n_firms: 20,
            years: vec![2020, 2021],
            theme_tokens_per_passage: 7,
            polarity_tokens_per_passage: 2,
            seed: 0,
        }
    }
}

/// A corpus with 2 themes x 2 polarities of planted vocabulary. Documents
/// carry the mock extractor's `@top/behavior:` markers, so running the full
/// extraction + modeling pipeline offline recovers the four cells.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub documents: Vec<Document>,
    /// Ground-truth passages, ids matching what extraction will produce.
    pub passages: Vec<LeaderPassage>,
    /// passage id -> (theme index, is_positive)
    pub cell_of_passage: BTreeMap<String, (usize, bool)>,
    pub slice_counts: BTreeMap<SliceKey, usize>,
}

fn sample_tokens(vocab: &[&str], n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut pool: Vec<&str> = vocab.to_vec();
    let take = n.min(pool.len());
    for i in 0..take {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool[..take].iter().map(|t| t.to_string()).collect()
}

pub fn planted_corpus(cfg: &PlantedConfig) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut documents = Vec::new();
    let mut passages = Vec::new();
    let mut cell_of_passage = BTreeMap::new();

    let mut doc_index = 0usize;
    for theme in 0..2 {
        for positive in [true, false] {
            for _ in 0..cfg.per_cell {
                let mut tokens = sample_tokens(
                    &THEME_VOCABULARIES[theme],
                    cfg.theme_tokens_per_passage,
                    &mut rng,
                );
                let markers = if positive {
                    POSITIVE_MARKERS
                } else {
                    NEGATIVE_MARKERS
                };
                tokens.extend(sample_tokens(
                    markers,
                    cfg.polarity_tokens_per_passage,
                    &mut rng,
                ));
                for i in 0..tokens.len() {
                    let j = rng.random_range(i..tokens.len());
                    tokens.swap(i, j);
                }
                let passage_text = format!("the manager {}", tokens.join(" "));

                let doc_id = format!("d{:05}", doc_index);
                let firm_id = format!("f{:03}", doc_index % cfg.n_firms);
                let year = cfg.years[(doc_index / cfg.n_firms) % cfg.years.len()];
                let morale_rating = if positive {
                    4 + (doc_index % 2) as u8
                } else {
                    1 + (doc_index % 2) as u8
                };
                documents.push(Document {
                    doc_id: doc_id.clone(),
                    text: format!(
                        "general remarks about the office\n@top/behavior: {}",
                        passage_text
                    ),
                    firm_id,
                    year,
                    morale_rating: Some(morale_rating),
                    metadata: BTreeMap::from([(
                        "category".to_string(),
                        "leadership".to_string(),
                    )]),
                });
                let passage_id = format!("{}#0", doc_id);
                passages.push(LeaderPassage {
                    passage_id: passage_id.clone(),
                    source_doc_id: doc_id,
                    text: passage_text,
                    leader_type: LeaderType::Top,
                    characteristic: Characteristic::Behavior,
                    flags: BTreeSet::new(),
                });
                cell_of_passage.insert(passage_id, (theme, positive));
                doc_index += 1;
            }
        }
    }

    let mut slice_counts: BTreeMap<SliceKey, usize> =
        SliceKey::all().into_iter().map(|k| (k, 0)).collect();
    *slice_counts
        .get_mut(&SliceKey {
            leader_type: LeaderType::Top,
            characteristic: Characteristic::Behavior,
        })
        .unwrap() = passages.len();

    PlantedCorpus {
        documents,
        passages,
        cell_of_passage,
        slice_counts,
    }
}

/// 60 passages spread over every (leader type, characteristic) combination,
/// for exercising the slice partition against a brute-force count.
pub fn mixed_passage_fixture(seed: u64) -> Vec<LeaderPassage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leader_types = [LeaderType::Top, LeaderType::NonTop, LeaderType::Unknown];
    let characteristics = [
        Characteristic::Behavior,
        Characteristic::Attitude,
        Characteristic::Ability,
        Characteristic::Other,
    ];
    (0..60)
        .map(|i| {
            let lt = leader_types[rng.random_range(0..leader_types.len())];
            let ch = characteristics[rng.random_range(0..characteristics.len())];
            LeaderPassage {
                passage_id: format!("m{:03}", i),
                source_doc_id: format!("src{:03}", i),
                text: format!("passage number {}", i),
                leader_type: lt,
                characteristic: ch,
                flags: BTreeSet::new(),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PlantedEffect {
    /// (theme index, is_positive) of the cell that carries the effect.
    pub target_cell: (usize, bool),
    pub beta_roa: f64,
    pub beta_morale: f64,
    pub noise_sd: f64,
}

/// A panel aligned with a planted corpus: the outcome moves with the
/// firm-year frequency of the target cell, plus Gaussian noise.
pub fn planted_panel(corpus: &PlantedCorpus, effect: &PlantedEffect, seed: u64) -> Vec<PanelRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut totals: BTreeMap<(String, i32), (usize, usize)> = BTreeMap::new();
    for doc in &corpus.documents {
        let key = (doc.firm_id.clone(), doc.year);
        let entry = totals.entry(key).or_insert((0, 0));
        entry.0 += 1;
        let passage_id = format!("{}#0", doc.doc_id);
        if corpus.cell_of_passage.get(&passage_id) == Some(&effect.target_cell) {
            entry.1 += 1;
        }
    }
    totals
        .into_iter()
        .enumerate()
        .map(|(i, ((firm_id, year), (total, in_target)))| {
            let f = in_target as f64 / total as f64;
            let e1: f64 = normal.sample(&mut rng);
            let e2: f64 = normal.sample(&mut rng);
            let industry = if i % 2 == 0 { "services" } else { "manufacturing" };
            PanelRow {
                firm_id,
                year,
                industry: industry.to_string(),
                roa: 0.05 + effect.beta_roa * f + effect.noise_sd * e1,
                morale: 3.0 + effect.beta_morale * f + effect.noise_sd * e2,
                employees: 50 + (i as u64 % 200) * 3,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::slice_corpus;

    #[test]
    fn planted_corpus_counts() {
        let cfg = PlantedConfig {
            per_cell: 10,
            ..Default::default()
        };
        let corpus = planted_corpus(&cfg);
        assert_eq!(corpus.documents.len(), 40);
        assert_eq!(corpus.passages.len(), 40);
        let positives = corpus
            .cell_of_passage
            .values()
            .filter(|(_, pos)| *pos)
            .count();
        assert_eq!(positives, 20);
    }

    #[test]
    fn planted_corpus_is_deterministic() {
        let cfg = PlantedConfig {
            per_cell: 5,
            seed: 9,
            ..Default::default()
        };
        let a = planted_corpus(&cfg);
        let b = planted_corpus(&cfg);
        assert_eq!(a.documents, b.documents);
    }

    #[test]
    fn mixed_fixture_matches_brute_force_slice_counts() {
        let passages = mixed_passage_fixture(3);
        let set = slice_corpus(&passages);
        // Brute-force tally.
        for (key, slice) in &set.slices {
            let expected = passages
                .iter()
                .filter(|p| {
                    p.leader_type == key.leader_type && p.characteristic == key.characteristic
                })
                .count();
            assert_eq!(slice.passages.len(), expected);
        }
        let excluded_expected = passages
            .iter()
            .filter(|p| !p.in_analysis_scope())
            .count();
        assert_eq!(set.excluded.len(), excluded_expected);
        assert_eq!(set.total_sliced() + set.excluded.len(), passages.len());
    }

    #[test]
    fn planted_panel_covers_all_firm_years() {
        let cfg = PlantedConfig {
            per_cell: 10,
            n_firms: 4,
            years: vec![2020],
            ..Default::default()
        };
        let corpus = planted_corpus(&cfg);
        let panel = planted_panel(
            &corpus,
            &PlantedEffect {
                target_cell: (0, true),
                beta_roa: 1.0,
                beta_morale: 2.0,
                noise_sd: 0.0,
            },
            1,
        );
        assert_eq!(panel.len(), 4);
        for row in &panel {
            assert!(row.employees >= 1);
        }
    }
}
