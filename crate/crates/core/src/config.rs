//! Declarative run configuration (TOML). Every knob carries the documented
//! default; the seed is mandatory. The loaded snapshot is stored immutably
//! in the run manifest.

use crate::corpus::CorpusFormat;
use crate::embedding::{EmbeddingProvider, HashEmbedder, OpenAiCompatEmbedder};
use crate::llm::{
    ChatProvider, LlmClientOptions, MockChatProvider, OpenAiCompatChatProvider, PromptLanguage,
};
use crate::outcomes::ElasticNetConfig;
use crate::pipeline::{PipelineConfig, TokenizerMode};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("provider credentials missing: {0}")]
    MissingCredentials(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    /// Real providers when credentials are configured, mock otherwise.
    Auto,
    Mock,
    OpenaiCompat,
}

impl Default for ProviderMode {
    fn default() -> Self {
        ProviderMode::Auto
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderSettings {
    pub mode: ProviderMode,
    pub chat_endpoint: String,
    pub chat_model: String,
    pub embedding_endpoint: String,
    pub embedding_model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub language: PromptLanguage,
    pub mock_embedding_dim: usize,
    pub transport_attempts: u32,
    pub backoff_base_ms: u64,
}

impl Default for ProviderSettings {
    fn default() -> Self {
        ProviderSettings {
            mode: ProviderMode::Auto,
            chat_endpoint: "https://api.openai.com/v1".to_string(),
            chat_model: String::new(),
            embedding_endpoint: "https://api.openai.com/v1".to_string(),
            embedding_model: String::new(),
            api_key_env: "TOPICLENS_API_KEY".to_string(),
            language: PromptLanguage::English,
            mock_embedding_dim: 64,
            transport_attempts: 5,
            backoff_base_ms: 250,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    pub min_cluster_size: usize,
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
    pub representation_weights: [f64; 3],
    pub tokenizer: TokenizerMode,
    pub refine_batch: usize,
    /// Integration cluster counts; empty derives the Tmin/Tmid/Tmax grid.
    pub n_clusters: Vec<usize>,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        let d = PipelineConfig::default();
        PipelineSettings {
            min_cluster_size: d.min_cluster_size,
            min_samples: d.min_samples,
            variance_target: d.variance_target,
            max_dim: d.max_dim,
            pca_chunk: d.pca_chunk,
            embed_batch_size: d.embed_batch_size,
            mmr_lambda: d.mmr_lambda,
            n_representatives: d.n_representatives,
            n_top_words: d.n_top_words,
            split_sample_size: d.split_sample_size,
            rename_sample_size: d.rename_sample_size,
            tau_quantile: d.tau_quantile,
            representation_weights: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            tokenizer: TokenizerMode::Words,
            refine_batch: d.refine_batch,
            n_clusters: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSettings {
    pub alignment_sample_size: usize,
}

impl Default for MetricSettings {
    fn default() -> Self {
        MetricSettings {
            alignment_sample_size: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OutcomeSettings {
    pub thresholds: Vec<usize>,
    pub report_threshold: usize,
    pub cv_folds: usize,
    pub l1_ratios: Vec<f64>,
    pub n_alphas: usize,
    pub min_posts: usize,
    /// Use CV-predicted RSS instead of in-sample RSS for partial R^2.
    pub cv_predicted_r2: bool,
}

impl Default for OutcomeSettings {
    fn default() -> Self {
        OutcomeSettings {
            thresholds: vec![5, 10, 15],
            report_threshold: 10,
            cv_folds: 5,
            l1_ratios: vec![0.5],
            n_alphas: 20,
            min_posts: 100,
            cv_predicted_r2: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Mandatory; every stochastic step derives from it.
    pub seed: u64,
    pub corpus_path: PathBuf,
    #[serde(default = "default_corpus_format")]
    pub corpus_format: String,
    #[serde(default)]
    pub panel_path: Option<PathBuf>,
    #[serde(default)]
    pub run_dir: Option<PathBuf>,
    #[serde(default)]
    pub provider: ProviderSettings,
    #[serde(default)]
    pub pipeline: PipelineSettings,
    #[serde(default)]
    pub metrics: MetricSettings,
    #[serde(default)]
    pub outcomes: OutcomeSettings,
}

fn default_corpus_format() -> String {
    "jsonl".to_string()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.corpus_format != "jsonl" && self.corpus_format != "csv" {
            return Err(ConfigError::Invalid(format!(
                "corpus_format must be 'jsonl' or 'csv', got '{}'",
                self.corpus_format
            )));
        }
        let p = &self.pipeline;
        if !(p.variance_target > 0.0 && p.variance_target <= 1.0) {
            return Err(ConfigError::Invalid(
                "pipeline.variance_target must be in (0, 1]".to_string(),
            ));
        }
        if !(p.tau_quantile > 0.0 && p.tau_quantile < 1.0) {
            return Err(ConfigError::Invalid(
                "pipeline.tau_quantile must be in (0, 1)".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&p.mmr_lambda) {
            return Err(ConfigError::Invalid(
                "pipeline.mmr_lambda must be in [0, 1]".to_string(),
            ));
        }
        let w = p.representation_weights;
        if w.iter().any(|&x| x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(ConfigError::Invalid(
                "pipeline.representation_weights must be non-negative and sum to 1".to_string(),
            ));
        }
        if self.outcomes.cv_folds < 2 {
            return Err(ConfigError::Invalid(
                "outcomes.cv_folds must be at least 2".to_string(),
            ));
        }
        if self.outcomes.thresholds.is_empty() {
            return Err(ConfigError::Invalid(
                "outcomes.thresholds must not be empty".to_string(),
            ));
        }
        Ok(())
    }

    pub fn corpus_format_enum(&self) -> CorpusFormat {
        if self.corpus_format == "csv" {
            CorpusFormat::Csv
        } else {
            CorpusFormat::Jsonl
        }
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        let p = &self.pipeline;
        PipelineConfig {
            min_cluster_size: p.min_cluster_size,
            min_samples: p.min_samples,
            variance_target: p.variance_target,
            max_dim: p.max_dim,
            pca_chunk: p.pca_chunk,
            embed_batch_size: p.embed_batch_size,
            mmr_lambda: p.mmr_lambda,
            n_representatives: p.n_representatives,
            n_top_words: p.n_top_words,
            split_sample_size: p.split_sample_size,
            rename_sample_size: p.rename_sample_size,
            tau_quantile: p.tau_quantile,
            representation_weights: (
                p.representation_weights[0],
                p.representation_weights[1],
                p.representation_weights[2],
            ),
            tokenizer_mode: p.tokenizer,
            seed: self.seed,
            refine_batch: p.refine_batch,
        }
    }

    pub fn elastic_net_config(&self) -> ElasticNetConfig {
        ElasticNetConfig {
            l1_ratios: self.outcomes.l1_ratios.clone(),
            alphas: None,
            n_alphas: self.outcomes.n_alphas,
            cv_folds: self.outcomes.cv_folds,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn api_key(&self) -> Option<String> {
        std::env::var(&self.provider.api_key_env)
            .ok()
            .filter(|k| !k.is_empty())
    }

    fn effective_mode(&self) -> ProviderMode {
        match self.provider.mode {
            ProviderMode::Auto => {
                if self.api_key().is_some()
                    && !self.provider.chat_model.is_empty()
                    && !self.provider.embedding_model.is_empty()
                {
                    ProviderMode::OpenaiCompat
                } else {
                    ProviderMode::Mock
                }
            }
            other => other,
        }
    }

    pub fn build_chat_provider(&self) -> Result<Arc<dyn ChatProvider>, ConfigError> {
        match self.effective_mode() {
            ProviderMode::Mock => Ok(Arc::new(MockChatProvider::new())),
            _ => {
                let key = self.api_key().ok_or_else(|| {
                    ConfigError::MissingCredentials(format!(
                        "environment variable {} is not set",
                        self.provider.api_key_env
                    ))
                })?;
                let provider = OpenAiCompatChatProvider::new(
                    &self.provider.chat_endpoint,
                    &self.provider.chat_model,
                    &key,
                )
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                Ok(Arc::new(provider))
            }
        }
    }

    pub fn build_embedding_provider(&self) -> Result<Arc<dyn EmbeddingProvider>, ConfigError> {
        match self.effective_mode() {
            ProviderMode::Mock => Ok(Arc::new(HashEmbedder::new(self.provider.mock_embedding_dim))),
            _ => {
                let key = self.api_key().ok_or_else(|| {
                    ConfigError::MissingCredentials(format!(
                        "environment variable {} is not set",
                        self.provider.api_key_env
                    ))
                })?;
                let provider = OpenAiCompatEmbedder::new(
                    &self.provider.embedding_endpoint,
                    &self.provider.embedding_model,
                    &key,
                )
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                Ok(Arc::new(provider))
            }
        }
    }

    pub fn llm_client_options(&self, cache_dir: Option<PathBuf>) -> LlmClientOptions {
        LlmClientOptions {
            cache_dir,
            language: self.provider.language,
            transport_attempts: self.provider.transport_attempts,
            backoff_base_ms: self.provider.backoff_base_ms,
            ..Default::default()
        }
    }

    /// The immutable snapshot stored in the run manifest. The run directory
    /// is deliberately excluded so checkpoints stay byte-identical across
    /// differently named runs.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("run_dir");
        }
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let cfg: RunConfig = toml::from_str(
            "seed = 7\ncorpus_path = \"corpus.jsonl\"\n",
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.pipeline.min_cluster_size, 100);
        assert_eq!(cfg.pipeline.variance_target, 0.90);
        assert_eq!(cfg.pipeline.max_dim, Some(450));
        assert_eq!(cfg.pipeline.tau_quantile, 0.01);
        assert_eq!(cfg.pipeline.mmr_lambda, 0.5);
        assert_eq!(cfg.outcomes.thresholds, vec![5, 10, 15]);
        assert_eq!(cfg.outcomes.min_posts, 100);
        assert_eq!(cfg.metrics.alignment_sample_size, 30);
    }

    #[test]
    fn missing_seed_is_rejected() {
        let err = toml::from_str::<RunConfig>("corpus_path = \"c.jsonl\"\n").unwrap_err();
        assert!(err.to_string().contains("seed"));
    }

    #[test]
    fn invalid_knobs_rejected() {
        let mut cfg: RunConfig =
            toml::from_str("seed = 1\ncorpus_path = \"c.jsonl\"\n").unwrap();
        cfg.pipeline.tau_quantile = 1.5;
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
        cfg.pipeline.tau_quantile = 0.01;
        cfg.pipeline.representation_weights = [0.5, 0.6, 0.2];
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn auto_mode_without_credentials_is_mock() {
        let cfg: RunConfig =
            toml::from_str("seed = 1\ncorpus_path = \"c.jsonl\"\n[provider]\napi_key_env = \"TOPICLENS_TEST_KEY_UNSET\"\n").unwrap();
        assert_eq!(cfg.effective_mode(), ProviderMode::Mock);
        let chat = cfg.build_chat_provider().unwrap();
        assert_eq!(chat.provider_id(), "mock-chat-v1");
    }

    #[test]
    fn snapshot_excludes_run_dir() {
        let mut cfg: RunConfig =
            toml::from_str("seed = 1\ncorpus_path = \"c.jsonl\"\n").unwrap();
        cfg.run_dir = Some(PathBuf::from("/tmp/somewhere"));
        let snap = cfg.snapshot();
        assert!(snap.get("run_dir").is_none());
        assert_eq!(snap["seed"], 1);
    }
}
