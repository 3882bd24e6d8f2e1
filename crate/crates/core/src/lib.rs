//! Corpus-to-insight toolkit for short review documents: builds
//! interpretable, specific, stance-consistent topics through an LLM-assisted
//! five-stage pipeline, scores them with judge-based and co-occurrence
//! metrics, and quantifies their explanatory power for firm-year outcomes.
//!
//! Modules map onto the pipeline:
//! - [`corpus`]: documents, leader passages, the six analysis slices, panel data
//! - [`embedding`]: embedding providers, disk cache, incremental PCA
//! - [`clustering`]: density clustering, Ward linkage, MMR selection
//! - [`llm`]: provider abstraction, prompt contracts, rubric judge, offline mock
//! - [`pipeline`]: the five stages with checkpointed, resumable state
//! - [`metrics`]: NPMI, BoW diversity, four judge metrics, ICC(2,2)
//! - [`outcomes`]: frequency aggregation, elastic net, per-topic OLS, filtering
//! - [`config`]: declarative run configuration
//! - [`fixtures`]: deterministic synthetic corpora and panels for tests/demos

pub mod clustering;
pub mod config;
pub mod corpus;
pub mod embedding;
pub mod fixtures;
pub mod llm;
pub mod metrics;
pub mod numeric;
pub mod outcomes;
pub mod pipeline;
pub mod store;
