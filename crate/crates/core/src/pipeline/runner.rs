//! Stage orchestration for one corpus slice.
//!
//! A runner owns the slice plus provider handles and walks the state through
//! named -> reassigned -> split -> integrated. Every step is deterministic
//! given the seed and a warm cache: member sets are ordered, per-topic RNGs
//! are derived from (seed, topic id), and all LLM traffic is cacheable.

use super::distance::{integration_distance, topic_representation, IntegrationDistance};
use super::tfidf::{class_tfidf_top_words, TokenizerMode};
use super::{state_hash, PipelineError, Stage, Topic, TopicModelState};
use crate::clustering::{density_cluster_with, mmr_select, ward_cluster};
use crate::corpus::CorpusSlice;
use crate::embedding::{
    embed_with_ids, fit_pca_chunked, transform, EmbeddingCache, EmbeddingMatrix,
    EmbeddingProvider, PcaModel,
};
use crate::llm::{JudgeRubric, LlmClient, LlmError, RubricId};
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub min_cluster_size: usize,
    /// Defaults to `min_cluster_size` when absent.
    pub min_samples: Option<usize>,
    pub variance_target: f64,
    pub max_dim: Option<usize>,
    pub pca_chunk: usize,
    pub embed_batch_size: usize,
    pub mmr_lambda: f64,
    pub n_representatives: usize,
    pub n_top_words: usize,
    pub split_sample_size: usize,
    pub rename_sample_size: usize,
    pub tau_quantile: f64,
    pub representation_weights: (f64, f64, f64),
    pub tokenizer_mode: TokenizerMode,
    pub seed: u64,
    /// Per-batch granularity of the reassignment progress checkpoint.
    pub refine_batch: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_cluster_size: 100,
            min_samples: None,
            variance_target: 0.90,
            max_dim: Some(450),
            pca_chunk: 1024,
            embed_batch_size: 64,
            mmr_lambda: 0.5,
            n_representatives: 30,
            n_top_words: 10,
            split_sample_size: 50,
            rename_sample_size: 30,
            tau_quantile: 0.01,
            representation_weights: (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
            tokenizer_mode: TokenizerMode::Words,
            seed: 0,
            refine_batch: 64,
        }
    }
}

/// Deterministic partial Fisher-Yates sample of `n` items.
fn sample_without_replacement<T: Clone>(items: &[T], n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let take = n.min(items.len());
    let mut pool: Vec<T> = items.to_vec();
    for i in 0..take {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(take);
    pool
}

const SPLIT_SAMPLE_SALT: u64 = 0x53504C49;

fn topic_rng(seed: u64, topic_id: i64, salt: u64) -> ChaCha8Rng {
    let mixed = seed
        ^ (topic_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ salt.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    ChaCha8Rng::seed_from_u64(mixed)
}

pub struct PipelineRunner<'a> {
    slice: &'a CorpusSlice,
    chat: &'a LlmClient,
    embedder: &'a dyn EmbeddingProvider,
    embed_cache: Option<&'a EmbeddingCache>,
    cfg: PipelineConfig,
    embeddings: Option<EmbeddingMatrix>,
    pca: Option<PcaModel>,
    reduced: Option<Array2<f64>>,
    row_of_id: BTreeMap<String, usize>,
    text_of_id: BTreeMap<String, String>,
}

impl<'a> PipelineRunner<'a> {
    pub fn new(
        slice: &'a CorpusSlice,
        chat: &'a LlmClient,
        embedder: &'a dyn EmbeddingProvider,
        embed_cache: Option<&'a EmbeddingCache>,
        cfg: PipelineConfig,
    ) -> PipelineRunner<'a> {
        let text_of_id = slice
            .passages
            .iter()
            .map(|p| (p.passage_id.clone(), p.text.clone()))
            .collect();
        PipelineRunner {
            slice,
            chat,
            embedder,
            embed_cache,
            cfg,
            embeddings: None,
            pca: None,
            reduced: None,
            row_of_id: BTreeMap::new(),
            text_of_id,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn pca_model(&self) -> Option<&PcaModel> {
        self.pca.as_ref()
    }

    fn corpus_metadata(&self) -> String {
        format!(
            "Employee review passages describing leaders (slice: {})",
            self.slice.key
        )
    }

    fn doc_metadata(&self) -> String {
        format!("Leader-related passage from slice {}", self.slice.key)
    }

    fn config_snapshot(&self) -> serde_json::Value {
        serde_json::json!({
            "slice": self.slice.key.to_string(),
            "pipeline": serde_json::to_value(&self.cfg).expect("config serializes"),
            "chat_provider": self.chat.provider_id(),
            "embedding_provider": self.embedder.provider_id(),
        })
    }

    fn ensure_embeddings(&mut self) -> Result<(), PipelineError> {
        if self.reduced.is_some() {
            return Ok(());
        }
        let texts: Vec<String> = self.slice.passages.iter().map(|p| p.text.clone()).collect();
        let ids: Vec<String> = self
            .slice
            .passages
            .iter()
            .map(|p| p.passage_id.clone())
            .collect();
        let embeddings = embed_with_ids(
            &texts,
            &ids,
            self.embedder,
            self.cfg.embed_batch_size,
            self.embed_cache,
        )?;
        let pca = fit_pca_chunked(
            &embeddings,
            self.cfg.variance_target,
            self.cfg.max_dim,
            self.cfg.pca_chunk,
        )?;
        let reduced = transform(&pca, &embeddings.vectors)?;
        self.row_of_id = ids
            .iter()
            .enumerate()
            .map(|(row, id)| (id.clone(), row))
            .collect();
        self.embeddings = Some(embeddings);
        self.pca = Some(pca);
        self.reduced = Some(reduced);
        Ok(())
    }

    fn reduced_rows_for(&self, member_ids: &BTreeSet<String>) -> (Vec<String>, Vec<Vec<f64>>) {
        let reduced = self.reduced.as_ref().expect("embeddings prepared");
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for id in member_ids {
            if let Some(&row) = self.row_of_id.get(id) {
                ids.push(id.clone());
                rows.push(reduced.row(row).to_vec());
            }
        }
        (ids, rows)
    }

    /// Embeds an arbitrary text (topic name or description) into the
    /// reduced space of this slice's PCA model.
    fn embed_text_reduced(&self, text: &str) -> Result<Vec<f64>, PipelineError> {
        let pca = self.pca.as_ref().expect("embeddings prepared");
        let m = embed_with_ids(
            &[text.to_string()],
            &["aux".to_string()],
            self.embedder,
            self.cfg.embed_batch_size,
            self.embed_cache,
        )?;
        Ok(pca.transform_row(&m.row(0))?)
    }

    fn mmr_representatives(
        &self,
        member_ids: &BTreeSet<String>,
        lambda: f64,
        k: usize,
    ) -> Vec<String> {
        let (ids, rows) = self.reduced_rows_for(member_ids);
        if ids.is_empty() {
            return Vec::new();
        }
        let d = rows[0].len();
        let centroid: Vec<f64> = (0..d)
            .map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / rows.len() as f64)
            .collect();
        let m = Array2::from_shape_vec(
            (rows.len(), d),
            rows.iter().flatten().copied().collect(),
        )
        .expect("consistent row widths");
        let picked = mmr_select(&m, &centroid, lambda, k.min(ids.len()));
        picked.into_iter().map(|i| ids[i].clone()).collect()
    }

    fn texts_of(&self, ids: &[String]) -> Vec<String> {
        ids.iter()
            .filter_map(|id| self.text_of_id.get(id).cloned())
            .collect()
    }

    /// Stage 1+2: embed, reduce, density-cluster, extract top words, pick
    /// representatives, and name each topic. Produces a `named` state.
    pub fn build_initial_topics(&mut self) -> Result<TopicModelState, PipelineError> {
        self.ensure_embeddings()?;
        let reduced = self.reduced.as_ref().expect("prepared");
        let min_samples = self.cfg.min_samples.unwrap_or(self.cfg.min_cluster_size);
        let labeling = density_cluster_with(reduced, self.cfg.min_cluster_size, min_samples)?;

        let passages = &self.slice.passages;
        let mut cluster_texts: Vec<Vec<String>> = vec![Vec::new(); labeling.k];
        let mut cluster_members: Vec<BTreeSet<String>> = vec![BTreeSet::new(); labeling.k];
        let mut unassigned = BTreeSet::new();
        for (i, passage) in passages.iter().enumerate() {
            let label = labeling.labels[i];
            if label >= 0 {
                cluster_texts[label as usize].push(passage.text.clone());
                cluster_members[label as usize].insert(passage.passage_id.clone());
            } else {
                unassigned.insert(passage.passage_id.clone());
            }
        }

        let top_words =
            class_tfidf_top_words(&cluster_texts, self.cfg.n_top_words, self.cfg.tokenizer_mode);
        let corpus_meta = self.corpus_metadata();
        let mut topics = Vec::with_capacity(labeling.k);
        for cluster in 0..labeling.k {
            let representative_ids = self.mmr_representatives(
                &cluster_members[cluster],
                self.cfg.mmr_lambda,
                self.cfg.n_representatives,
            );
            let rep_texts = self.texts_of(&representative_ids);
            let (name, description) =
                self.chat
                    .name_topic(&top_words[cluster], &rep_texts, &corpus_meta)?;
            topics.push(Topic {
                topic_id: cluster as i64,
                name,
                description,
                member_passage_ids: cluster_members[cluster].clone(),
                top_words: top_words[cluster].clone(),
                representative_ids,
                parent_id: None,
                stage: Stage::Named,
            });
        }

        let mut state = TopicModelState {
            slice_key: self.slice.key.to_string(),
            stage: Stage::Named,
            topics,
            unassigned_ids: unassigned,
            config_snapshot: self.config_snapshot(),
            provenance: BTreeMap::new(),
            stage_warnings: Vec::new(),
        };
        let hash = state_hash(&state);
        state.provenance.insert(Stage::Named.name().to_string(), hash);
        Ok(state)
    }

    /// Stage 3: every passage (outliers included) is re-evaluated against
    /// the full topic list; member sets are replaced by the soft LLM
    /// assignment. Progress is checkpointed per batch when a path is given.
    pub fn refine_assignments(
        &mut self,
        state: &TopicModelState,
        partial_path: Option<&Path>,
    ) -> Result<TopicModelState, PipelineError> {
        state.expect_stage(Stage::Named)?;
        self.ensure_embeddings()?;

        let topic_defs: Vec<(i64, String, String)> = state
            .topics
            .iter()
            .map(|t| (t.topic_id, t.name.clone(), t.description.clone()))
            .collect();
        let doc_meta = self.doc_metadata();

        let mut done: BTreeMap<String, Vec<i64>> = match partial_path {
            Some(path) if path.exists() => {
                let bytes =
                    std::fs::read(path).map_err(|e| PipelineError::CorruptCheckpoint {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                serde_json::from_slice(&bytes).map_err(|e| PipelineError::CorruptCheckpoint {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?
            }
            _ => BTreeMap::new(),
        };

        let mut processed_since_flush = 0usize;
        for passage in &self.slice.passages {
            if done.contains_key(&passage.passage_id) {
                continue;
            }
            let assigned = self
                .chat
                .assign_topics(&passage.text, &topic_defs, &doc_meta)?;
            let ids: Vec<i64> = assigned.into_iter().map(|(id, _)| id).collect();
            done.insert(passage.passage_id.clone(), ids);
            processed_since_flush += 1;
            if let Some(path) = partial_path {
                if processed_since_flush >= self.cfg.refine_batch {
                    let bytes = serde_json::to_vec(&done).expect("progress serializes");
                    crate::store::atomic_write(path, &bytes)?;
                    processed_since_flush = 0;
                }
            }
        }

        let mut members: BTreeMap<i64, BTreeSet<String>> =
            topic_defs.iter().map(|(id, _, _)| (*id, BTreeSet::new())).collect();
        let mut unassigned = BTreeSet::new();
        for passage in &self.slice.passages {
            let ids = done.get(&passage.passage_id).cloned().unwrap_or_default();
            let real: Vec<i64> = ids.iter().copied().filter(|&id| id >= 0).collect();
            if real.is_empty() {
                unassigned.insert(passage.passage_id.clone());
            } else {
                for id in real {
                    if let Some(set) = members.get_mut(&id) {
                        set.insert(passage.passage_id.clone());
                    }
                }
            }
        }

        let topics: Vec<Topic> = state
            .topics
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.member_passage_ids = members.remove(&t.topic_id).unwrap_or_default();
                t.stage = Stage::Reassigned;
                t
            })
            .collect();

        let mut next = TopicModelState {
            slice_key: state.slice_key.clone(),
            stage: Stage::Reassigned,
            topics,
            unassigned_ids: unassigned,
            config_snapshot: state.config_snapshot.clone(),
            provenance: state.provenance.clone(),
            stage_warnings: Vec::new(),
        };
        let hash = state_hash(&next);
        next.provenance
            .insert(Stage::Reassigned.name().to_string(), hash);
        if let Some(path) = partial_path {
            let _ = std::fs::remove_file(path);
        }
        Ok(next)
    }

    /// Stage 4: sample member documents per topic, ask whether stances
    /// oppose, split into children when they do, and route members into
    /// exactly one child or neither. Parents of split topics retire.
    pub fn split_by_polarity(
        &mut self,
        state: &TopicModelState,
    ) -> Result<TopicModelState, PipelineError> {
        state.expect_stage(Stage::Reassigned)?;
        self.ensure_embeddings()?;

        let corpus_meta = self.corpus_metadata();
        let doc_meta = self.doc_metadata();
        let mut next_id = state.topics.iter().map(|t| t.topic_id).max().unwrap_or(-1) + 1;
        let mut out_topics: Vec<Topic> = Vec::new();
        let mut unassigned = state.unassigned_ids.clone();
        let mut warnings = Vec::new();

        for topic in &state.topics {
            if topic.member_passage_ids.is_empty() {
                let mut t = topic.clone();
                t.stage = Stage::Split;
                out_topics.push(t);
                continue;
            }
            let member_ids: Vec<String> = topic.member_passage_ids.iter().cloned().collect();
            let mut rng = topic_rng(self.cfg.seed, topic.topic_id, SPLIT_SAMPLE_SALT);
            let sampled_ids =
                sample_without_replacement(&member_ids, self.cfg.split_sample_size, &mut rng);
            let sampled_texts = self.texts_of(&sampled_ids);

            let outcome = match self.chat.polarity_split(
                &topic.name,
                &topic.description,
                &sampled_texts,
                &corpus_meta,
            ) {
                Ok(outcome) => outcome,
                Err(LlmError::InconsistentResponse(msg)) => {
                    warnings.push(format!(
                        "topic {} kept unsplit: {}",
                        topic.topic_id, msg
                    ));
                    let mut t = topic.clone();
                    t.stage = Stage::Split;
                    out_topics.push(t);
                    continue;
                }
                Err(e) => return Err(e.into()),
            };

            if !outcome.contain_opposing_stance {
                let mut t = topic.clone();
                t.stage = Stage::Split;
                out_topics.push(t);
                continue;
            }

            // Children get fresh ids; the parent retires.
            let child_defs: Vec<(i64, String, String)> = outcome
                .child_topics
                .iter()
                .map(|c| {
                    let id = next_id;
                    next_id += 1;
                    (
                        id,
                        c.child_topic_name.clone(),
                        c.child_topic_short_description.clone(),
                    )
                })
                .collect();
            let parent_label = format!("{} ({})", topic.name, topic.description);
            let mut child_members: BTreeMap<i64, BTreeSet<String>> =
                child_defs.iter().map(|(id, _, _)| (*id, BTreeSet::new())).collect();
            for member_id in &member_ids {
                let text = self.text_of_id.get(member_id).cloned().unwrap_or_default();
                let routed = self
                    .chat
                    .child_assign(&parent_label, &child_defs, &text, &doc_meta)?;
                if routed >= 0 {
                    child_members
                        .get_mut(&routed)
                        .expect("child ids fixed above")
                        .insert(member_id.clone());
                } else {
                    unassigned.insert(member_id.clone());
                }
            }

            let sibling_texts: Vec<Vec<String>> = child_defs
                .iter()
                .map(|(id, _, _)| {
                    child_members[id]
                        .iter()
                        .filter_map(|m| self.text_of_id.get(m).cloned())
                        .collect()
                })
                .collect();
            let sibling_words = class_tfidf_top_words(
                &sibling_texts,
                self.cfg.n_top_words,
                self.cfg.tokenizer_mode,
            );
            for (idx, (id, name, description)) in child_defs.iter().enumerate() {
                let members = child_members.remove(id).expect("child ids fixed above");
                let representative_ids = self.mmr_representatives(
                    &members,
                    self.cfg.mmr_lambda,
                    self.cfg.n_representatives,
                );
                out_topics.push(Topic {
                    topic_id: *id,
                    name: name.clone(),
                    description: description.clone(),
                    member_passage_ids: members,
                    top_words: sibling_words[idx].clone(),
                    representative_ids,
                    parent_id: Some(topic.topic_id),
                    stage: Stage::Split,
                });
            }
        }

        out_topics.sort_by_key(|t| t.topic_id);
        let mut next = TopicModelState {
            slice_key: state.slice_key.clone(),
            stage: Stage::Split,
            topics: out_topics,
            unassigned_ids: unassigned,
            config_snapshot: state.config_snapshot.clone(),
            provenance: state.provenance.clone(),
            stage_warnings: warnings,
        };
        let hash = state_hash(&next);
        next.provenance.insert(Stage::Split.name().to_string(), hash);
        Ok(next)
    }

    fn representations(
        &mut self,
        state: &TopicModelState,
    ) -> Result<Vec<Vec<f64>>, PipelineError> {
        self.ensure_embeddings()?;
        let mut reps = Vec::with_capacity(state.topics.len());
        for topic in &state.topics {
            let (_, member_rows) = self.reduced_rows_for(&topic.member_passage_ids);
            if member_rows.is_empty() {
                return Err(PipelineError::EmptyTopic(topic.topic_id));
            }
            let name_vec = self.embed_text_reduced(&topic.name)?;
            let desc_vec = self.embed_text_reduced(&topic.description)?;
            reps.push(topic_representation(
                &name_vec,
                &desc_vec,
                &member_rows,
                self.cfg.representation_weights,
            )?);
        }
        Ok(reps)
    }

    /// Pairwise semantic + stance-adjusted distances for the current topics.
    pub fn compute_integration_distance(
        &mut self,
        state: &TopicModelState,
    ) -> Result<IntegrationDistance, PipelineError> {
        state.expect_stage(Stage::Split)?;
        let reps = self.representations(state)?;
        let rubric = JudgeRubric::standard(RubricId::StanceSimilarity);
        let topics = &state.topics;
        let chat = self.chat;
        integration_distance(&reps, self.cfg.tau_quantile, |i, j| {
            let inputs = BTreeMap::from([
                ("topic_name_1".to_string(), topics[i].name.clone()),
                (
                    "topic_short_description_1".to_string(),
                    topics[i].description.clone(),
                ),
                ("topic_name_2".to_string(), topics[j].name.clone()),
                (
                    "topic_short_description_2".to_string(),
                    topics[j].description.clone(),
                ),
            ]);
            let score = chat.judge(&rubric, &inputs)?;
            Ok(score.normalized)
        })
    }

    /// Stage 5: Ward-merge topics over the stance-adjusted distances, union
    /// member sets, and rename merged topics from diversity-first (lambda=0)
    /// representatives. Singleton groups pass through unchanged.
    pub fn integrate_topics(
        &mut self,
        state: &TopicModelState,
        n_clusters: usize,
    ) -> Result<TopicModelState, PipelineError> {
        state.expect_stage(Stage::Split)?;
        let k = state.topics.len();
        let mut topics: Vec<Topic>;
        if n_clusters == k {
            topics = state.topics.clone();
            for t in &mut topics {
                t.stage = Stage::Integrated;
            }
        } else {
            let dist = self.compute_integration_distance(state)?;
            let shifted = dist.shifted_for_linkage();
            let labels = ward_cluster(&shifted, n_clusters)?;

            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (idx, &g) in labels.iter().enumerate() {
                groups.entry(g).or_default().push(idx);
            }

            // Recompute top words over merged member texts, one class per group.
            let group_texts: Vec<Vec<String>> = groups
                .values()
                .map(|idxs| {
                    let mut texts = Vec::new();
                    for &i in idxs {
                        for id in &state.topics[i].member_passage_ids {
                            if let Some(t) = self.text_of_id.get(id) {
                                texts.push(t.clone());
                            }
                        }
                    }
                    texts
                })
                .collect();
            let group_words = class_tfidf_top_words(
                &group_texts,
                self.cfg.n_top_words,
                self.cfg.tokenizer_mode,
            );

            let corpus_meta = self.corpus_metadata();
            topics = Vec::with_capacity(groups.len());
            for (group_pos, idxs) in groups.values().enumerate() {
                if idxs.len() == 1 {
                    let mut t = state.topics[idxs[0]].clone();
                    t.stage = Stage::Integrated;
                    topics.push(t);
                    continue;
                }
                let merged_id = idxs
                    .iter()
                    .map(|&i| state.topics[i].topic_id)
                    .min()
                    .expect("non-empty group");
                let mut members = BTreeSet::new();
                for &i in idxs {
                    members.extend(state.topics[i].member_passage_ids.iter().cloned());
                }
                let representative_ids =
                    self.mmr_representatives(&members, 0.0, self.cfg.rename_sample_size);
                let rep_texts = self.texts_of(&representative_ids);
                let (name, description) =
                    self.chat
                        .name_topic(&group_words[group_pos], &rep_texts, &corpus_meta)?;
                topics.push(Topic {
                    topic_id: merged_id,
                    name,
                    description,
                    member_passage_ids: members,
                    top_words: group_words[group_pos].clone(),
                    representative_ids,
                    parent_id: None,
                    stage: Stage::Integrated,
                });
            }
            topics.sort_by_key(|t| t.topic_id);
        }

        let mut next = TopicModelState {
            slice_key: state.slice_key.clone(),
            stage: Stage::Integrated,
            topics,
            unassigned_ids: state.unassigned_ids.clone(),
            config_snapshot: state.config_snapshot.clone(),
            provenance: state.provenance.clone(),
            stage_warnings: Vec::new(),
        };
        let hash = state_hash(&next);
        next.provenance
            .insert(format!("integrated_T{}", n_clusters), hash);
        Ok(next)
    }
}
