//! Run-directory layout: versioned stage checkpoints, the run manifest,
//! content hashing, and the per-run lock file.
//!
//! Layout under a run directory:
//!
//! ```text
//! run.lock                      held while a command runs
//! manifest.json                 config snapshot, seed, provider ids, template hashes
//! passages.jsonl                extraction output
//! extraction_summary.json       per-slice counts and exclusions
//! slices/<slice>/stage_named.json
//! slices/<slice>/stage_reassigned.json
//! slices/<slice>/stage_split.json
//! slices/<slice>/stage_integrated_T<n>.json
//! slices/<slice>/refine_partial.json   transient per-batch progress
//! reports/...                  metric and outcome tables
//! ```

use super::{PipelineError, Stage, TopicModelState};
use crate::llm::{PromptLanguage, PromptTemplate, TemplateId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Content hash of a state: sha256 over its canonical JSON with the
/// provenance map blanked, so the hash covers content only.
pub fn state_hash(state: &TopicModelState) -> String {
    let mut clone = state.clone();
    clone.provenance = Default::default();
    let bytes = serde_json::to_vec(&clone).expect("state serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestInfo {
    pub format_version: u32,
    pub seed: u64,
    pub config_snapshot: serde_json::Value,
    pub config_hash: String,
    pub chat_provider_id: String,
    pub embedding_provider_id: String,
    pub prompt_template_hashes: std::collections::BTreeMap<String, String>,
}

impl ManifestInfo {
    pub fn new(
        seed: u64,
        config_snapshot: serde_json::Value,
        chat_provider_id: &str,
        embedding_provider_id: &str,
        language: PromptLanguage,
    ) -> ManifestInfo {
        let config_bytes = serde_json::to_vec(&config_snapshot).expect("config serializes");
        let mut prompt_template_hashes = std::collections::BTreeMap::new();
        for id in TemplateId::all() {
            let template = PromptTemplate::get(id, language);
            prompt_template_hashes.insert(
                id.name().to_string(),
                hex::encode(Sha256::digest(template.body.as_bytes())),
            );
        }
        ManifestInfo {
            format_version: 1,
            seed,
            config_hash: hex::encode(Sha256::digest(&config_bytes)),
            config_snapshot,
            chat_provider_id: chat_provider_id.to_string(),
            embedding_provider_id: embedding_provider_id.to_string(),
            prompt_template_hashes,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

fn sanitize(key: &str) -> String {
    key.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

impl RunDir {
    pub fn new(root: &Path) -> RunDir {
        RunDir {
            root: root.to_path_buf(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn passages_path(&self) -> PathBuf {
        self.root.join("passages.jsonl")
    }

    pub fn extraction_summary_path(&self) -> PathBuf {
        self.root.join("extraction_summary.json")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn prompt_cache_dir(&self) -> PathBuf {
        self.root.join("cache").join("prompts")
    }

    pub fn embedding_cache_dir(&self) -> PathBuf {
        self.root.join("cache").join("embeddings")
    }

    fn slice_dir(&self, slice_key: &str) -> PathBuf {
        self.root.join("slices").join(sanitize(slice_key))
    }

    pub fn stage_path(&self, slice_key: &str, stage: Stage) -> PathBuf {
        self.slice_dir(slice_key)
            .join(format!("stage_{}.json", stage.name()))
    }

    pub fn integrated_path(&self, slice_key: &str, n_clusters: usize) -> PathBuf {
        self.slice_dir(slice_key)
            .join(format!("stage_integrated_T{}.json", n_clusters))
    }

    pub fn refine_partial_path(&self, slice_key: &str) -> PathBuf {
        self.slice_dir(slice_key).join("refine_partial.json")
    }

    pub fn write_manifest(&self, manifest: &ManifestInfo) -> Result<(), PipelineError> {
        let bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        crate::store::atomic_write(&self.manifest_path(), &bytes)?;
        Ok(())
    }

    pub fn read_manifest(&self) -> Result<Option<ManifestInfo>, PipelineError> {
        let path = self.manifest_path();
        if !path.exists() {
            return Ok(None);
        }
        let bytes = fs::read(&path).map_err(|e| PipelineError::CorruptCheckpoint {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let manifest =
            serde_json::from_slice(&bytes).map_err(|e| PipelineError::CorruptCheckpoint {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        Ok(Some(manifest))
    }

    pub fn write_state(&self, state: &TopicModelState, path: &Path) -> Result<(), PipelineError> {
        let bytes = serde_json::to_vec_pretty(state).expect("state serializes");
        crate::store::atomic_write(path, &bytes)?;
        Ok(())
    }

    pub fn read_state(&self, path: &Path) -> Result<Option<TopicModelState>, PipelineError> {
        if !path.exists() {
            return Ok(None);
        }
        let bytes = fs::read(path).map_err(|e| PipelineError::CorruptCheckpoint {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let state =
            serde_json::from_slice(&bytes).map_err(|e| PipelineError::CorruptCheckpoint {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        Ok(Some(state))
    }
}

/// Exclusive lock: one command per run directory at a time. The file holds
/// the owner pid and disappears on drop.
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(run_dir: &Path) -> Result<RunLock, PipelineError> {
        fs::create_dir_all(run_dir).map_err(|e| PipelineError::CorruptCheckpoint {
            path: run_dir.display().to_string(),
            message: e.to_string(),
        })?;
        let path = run_dir.join("run.lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                use std::io::Write;
                let _ = writeln!(f, "{}", std::process::id());
                Ok(RunLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(PipelineError::Locked(path.display().to_string()))
            }
            Err(e) => Err(PipelineError::CorruptCheckpoint {
                path: path.display().to_string(),
                message: e.to_string(),
            }),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn tiny_state() -> TopicModelState {
        TopicModelState {
            slice_key: "top:behavior".to_string(),
            stage: Stage::Named,
            topics: vec![],
            unassigned_ids: BTreeSet::new(),
            config_snapshot: serde_json::json!({"seed": 1}),
            provenance: BTreeMap::new(),
            stage_warnings: vec![],
        }
    }

    #[test]
    fn hash_ignores_provenance_but_not_content() {
        let mut a = tiny_state();
        let mut b = tiny_state();
        b.provenance.insert("named".to_string(), "abc".to_string());
        assert_eq!(state_hash(&a), state_hash(&b));
        a.unassigned_ids.insert("p1".to_string());
        assert_ne!(state_hash(&a), state_hash(&b));
    }

    #[test]
    fn state_roundtrips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::new(dir.path());
        let state = tiny_state();
        let path = run.stage_path("top:behavior", Stage::Named);
        run.write_state(&state, &path).unwrap();
        let back = run.read_state(&path).unwrap().unwrap();
        assert_eq!(state, back);
    }

    #[test]
    fn lock_is_exclusive_and_released_on_drop() {
        let dir = tempfile::tempdir().unwrap();
        let lock = RunLock::acquire(dir.path()).unwrap();
        assert!(matches!(
            RunLock::acquire(dir.path()),
            Err(PipelineError::Locked(_))
        ));
        drop(lock);
        RunLock::acquire(dir.path()).unwrap();
    }
}
