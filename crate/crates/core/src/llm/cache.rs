//! Disk cache for provider responses, keyed by (model id, prompt hash).
//!
//! One JSON file per entry holding the request prompt, the raw response, the
//! parsed response, and a timestamp. Writes go through atomic replacement so
//! concurrent readers never see partial entries.

use super::LlmError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model_id: String,
    pub prompt: String,
    pub raw_response: String,
    pub parsed: serde_json::Value,
    pub created_unix: u64,
}

#[derive(Debug, Clone)]
pub struct PromptCache {
    dir: PathBuf,
}

pub fn prompt_hash(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hex::encode(hasher.finalize())
}

fn sanitize(model_id: &str) -> String {
    model_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

impl PromptCache {
    pub fn new(dir: &Path) -> PromptCache {
        PromptCache {
            dir: dir.to_path_buf(),
        }
    }

    fn entry_path(&self, model_id: &str, prompt: &str) -> PathBuf {
        self.dir
            .join(sanitize(model_id))
            .join(format!("{}.json", prompt_hash(prompt)))
    }

    pub fn get(&self, model_id: &str, prompt: &str) -> Result<Option<CacheEntry>, LlmError> {
        let path = self.entry_path(model_id, prompt);
        if !path.exists() {
            return Ok(None);
        }
        let bytes = fs::read(&path).map_err(|e| LlmError::CacheCorruption {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let entry: CacheEntry =
            serde_json::from_slice(&bytes).map_err(|e| LlmError::CacheCorruption {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        Ok(Some(entry))
    }

    pub fn put(
        &self,
        model_id: &str,
        prompt: &str,
        raw_response: &str,
        parsed: &serde_json::Value,
    ) -> Result<(), LlmError> {
        let entry = CacheEntry {
            model_id: model_id.to_string(),
            prompt: prompt.to_string(),
            raw_response: raw_response.to_string(),
            parsed: parsed.clone(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let path = self.entry_path(model_id, prompt);
        let bytes = serde_json::to_vec_pretty(&entry).expect("cache entry serializes");
        crate::store::atomic_write(&path, &bytes).map_err(|e| LlmError::CacheCorruption {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_then_get_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let cache = PromptCache::new(dir.path());
        let parsed = serde_json::json!({"score": 7});
        cache.put("mock-model", "a prompt", "{\"score\": 7}", &parsed).unwrap();
        let entry = cache.get("mock-model", "a prompt").unwrap().unwrap();
        assert_eq!(entry.parsed, parsed);
        assert!(cache.get("mock-model", "other prompt").unwrap().is_none());
    }

    #[test]
    fn corrupt_entry_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let cache = PromptCache::new(dir.path());
        let path = dir.path().join(sanitize("m")).join(format!("{}.json", prompt_hash("p")));
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, b"not json").unwrap();
        assert!(matches!(
            cache.get("m", "p"),
            Err(LlmError::CacheCorruption { .. })
        ));
    }
}
