//! Embedding backends: the deterministic offline hash embedder and an
//! OpenAI-compatible HTTP provider.

use super::EmbeddingError;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

/// A text-embedding backend. Implementations must be safe for concurrent
/// use and must return one row per input text, all of the same width.
pub trait EmbeddingProvider: Send + Sync {
    fn provider_id(&self) -> String;
    /// Native output dimension, when known up front.
    fn dimension_hint(&self) -> Option<usize>;
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbeddingError>;
}

/// Offline embedder: each token maps to a fixed pseudo-random unit vector
/// seeded by a 64-bit hash of the token, and a text embeds as the normalized
/// mean of its token vectors (falling back to a whole-text hash vector when
/// no tokens survive). Texts sharing vocabulary land near each other, which
/// is what lets fixture corpora exercise the clustering stages offline.
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> HashEmbedder {
        assert!(dim >= 2, "embedding dimension must be at least 2");
        HashEmbedder { dim }
    }

    fn seed_for(text: &str) -> u64 {
        let digest = Sha256::digest(text.as_bytes());
        u64::from_le_bytes(digest[0..8].try_into().unwrap())
    }

    fn unit_vector(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        } else {
            v[0] = 1.0;
        }
        v
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let tokens: Vec<String> = text
            .to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(|t| t.to_string())
            .collect();
        if tokens.is_empty() {
            return self.unit_vector(Self::seed_for(text));
        }
        let mut acc = vec![0.0; self.dim];
        for token in &tokens {
            let tv = self.unit_vector(Self::seed_for(token));
            for (a, t) in acc.iter_mut().zip(&tv) {
                *a += t;
            }
        }
        let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for x in &mut acc {
                *x /= norm;
            }
        } else {
            // Token vectors cancelled out; fall back to the text hash.
            return self.unit_vector(Self::seed_for(text));
        }
        acc
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn provider_id(&self) -> String {
        format!("hash-embedder-v1-d{}", self.dim)
    }

    fn dimension_hint(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// OpenAI-compatible `/embeddings` endpoint client.
pub struct OpenAiCompatEmbedder {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    api_key: String,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

impl OpenAiCompatEmbedder {
    pub fn new(endpoint: &str, model: &str, api_key: &str) -> Result<Self, EmbeddingError> {
        if api_key.is_empty() {
            return Err(EmbeddingError::NotConfigured(
                "embedding provider requires an API key".to_string(),
            ));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(120))
            .build()
            .map_err(|e| EmbeddingError::NotConfigured(e.to_string()))?;
        Ok(OpenAiCompatEmbedder {
            client,
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key: api_key.to_string(),
        })
    }
}

impl EmbeddingProvider for OpenAiCompatEmbedder {
    fn provider_id(&self) -> String {
        format!("openai-compat:{}", self.model)
    }

    fn dimension_hint(&self) -> Option<usize> {
        None
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        let body = serde_json::json!({ "model": self.model, "input": texts });
        let response = self
            .client
            .post(format!("{}/embeddings", self.endpoint))
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        if !response.status().is_success() {
            return Err(EmbeddingError::Transport(format!(
                "HTTP {}",
                response.status()
            )));
        }
        let parsed: EmbeddingResponse = response
            .json()
            .map_err(|e| EmbeddingError::Transport(format!("malformed embedding envelope: {}", e)))?;
        if parsed.data.len() != texts.len() {
            return Err(EmbeddingError::Transport(format!(
                "requested {} embeddings, received {}",
                texts.len(),
                parsed.data.len()
            )));
        }
        Ok(parsed.data.into_iter().map(|d| d.embedding).collect())
    }
}
