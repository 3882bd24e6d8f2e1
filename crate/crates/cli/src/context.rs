//! Shared command setup: configuration loading with CLI overrides, provider
//! construction, run-directory plumbing, and error-to-exit-code mapping.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use topiclens::config::{ConfigError, ProviderMode, RunConfig};
use topiclens::corpus::CorpusError;
use topiclens::embedding::{EmbeddingCache, EmbeddingError, EmbeddingProvider};
use topiclens::llm::{LlmClient, LlmError};
use topiclens::metrics::MetricsError;
use topiclens::outcomes::OutcomeError;
use topiclens::pipeline::{ManifestInfo, PipelineError, RunDir, RunLock};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_PROVIDER: u8 = 3;
pub const EXIT_DATA: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            exit_code: EXIT_CONFIG,
        }
    }

    pub fn data(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            exit_code: EXIT_DATA,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError {
            message: e.to_string(),
            exit_code: EXIT_CONFIG,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        let exit_code = match &e {
            CorpusError::Llm(inner) => llm_exit_code(inner),
            _ => EXIT_DATA,
        };
        CliError {
            message: e.to_string(),
            exit_code,
        }
    }
}

fn llm_exit_code(e: &LlmError) -> u8 {
    match e {
        LlmError::Transport { .. }
        | LlmError::SchemaViolation { .. }
        | LlmError::NotConfigured(_)
        | LlmError::InconsistentResponse(_) => EXIT_PROVIDER,
        _ => EXIT_DATA,
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        CliError {
            message: e.to_string(),
            exit_code: llm_exit_code(&e),
        }
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        let exit_code = match &e {
            EmbeddingError::Transport(_) | EmbeddingError::NotConfigured(_) => EXIT_PROVIDER,
            _ => EXIT_DATA,
        };
        CliError {
            message: e.to_string(),
            exit_code,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let exit_code = match &e {
            PipelineError::Llm(inner) => llm_exit_code(inner),
            PipelineError::Embedding(EmbeddingError::Transport(_))
            | PipelineError::Embedding(EmbeddingError::NotConfigured(_)) => EXIT_PROVIDER,
            PipelineError::Locked(_) => EXIT_CONFIG,
            _ => EXIT_DATA,
        };
        CliError {
            message: e.to_string(),
            exit_code,
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        let exit_code = match &e {
            MetricsError::Provider(inner) => llm_exit_code(inner),
            _ => EXIT_DATA,
        };
        CliError {
            message: e.to_string(),
            exit_code,
        }
    }
}

impl From<OutcomeError> for CliError {
    fn from(e: OutcomeError) -> Self {
        CliError {
            message: e.to_string(),
            exit_code: EXIT_DATA,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub run_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub force_mock: bool,
}

/// Everything a command needs: validated config, run directory (locked),
/// and lazily buildable providers.
pub struct CommandContext {
    pub config: RunConfig,
    pub run_dir: RunDir,
    _lock: RunLock,
}

impl CommandContext {
    pub fn prepare(config_path: &Path, overrides: &Overrides) -> Result<CommandContext, CliError> {
        if !config_path.exists() {
            return Err(CliError::config(format!(
                "config file {} does not exist",
                config_path.display()
            )));
        }
        let mut config = RunConfig::load(config_path)?;
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if overrides.force_mock {
            config.provider.mode = ProviderMode::Mock;
        }
        let run_dir_path = overrides
            .run_dir
            .clone()
            .or_else(|| config.run_dir.clone())
            .ok_or_else(|| {
                CliError::config("no run directory: set run_dir in the config or pass --run-dir")
            })?;
        if !config.corpus_path.exists() {
            return Err(CliError::config(format!(
                "corpus path {} does not exist",
                config.corpus_path.display()
            )));
        }
        let lock = RunLock::acquire(&run_dir_path).map_err(CliError::from)?;
        let run_dir = RunDir::new(&run_dir_path);

        // A reused run directory must have been produced by the same config.
        let manifest = ManifestInfo::new(
            config.seed,
            config.snapshot(),
            &config.build_chat_provider()?.provider_id(),
            &config.build_embedding_provider()?.provider_id(),
            config.provider.language,
        );
        match run_dir.read_manifest().map_err(CliError::from)? {
            Some(existing) => {
                if existing.config_hash != manifest.config_hash {
                    return Err(CliError::config(format!(
                        "run directory {} was created with a different configuration \
                         (manifest hash {} != current {})",
                        run_dir_path.display(),
                        existing.config_hash,
                        manifest.config_hash
                    )));
                }
            }
            None => run_dir.write_manifest(&manifest).map_err(CliError::from)?,
        }

        Ok(CommandContext {
            config,
            run_dir,
            _lock: lock,
        })
    }

    pub fn chat_client(&self) -> Result<LlmClient, CliError> {
        let provider = self.config.build_chat_provider()?;
        let options = self
            .config
            .llm_client_options(Some(self.run_dir.prompt_cache_dir()));
        Ok(LlmClient::new(provider, options))
    }

    pub fn embedding_provider(&self) -> Result<Arc<dyn EmbeddingProvider>, CliError> {
        Ok(self.config.build_embedding_provider()?)
    }

    pub fn embedding_cache(&self) -> EmbeddingCache {
        EmbeddingCache::new(&self.run_dir.embedding_cache_dir())
    }
}
