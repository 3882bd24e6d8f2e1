//! Disk cache for embeddings: one binary little-endian float32 row store per
//! provider plus a JSON sidecar index mapping text hashes to rows.

use super::{EmbeddingError, EmbeddingProvider};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

#[derive(Debug, Default, Serialize, Deserialize)]
struct SidecarIndex {
    dim: usize,
    rows: BTreeMap<String, u64>,
}

pub struct EmbeddingCache {
    dir: PathBuf,
    // Guards the append-then-reindex sequence; single-writer by contract.
    write_lock: Mutex<()>,
}

fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn sanitize(provider_id: &str) -> String {
    provider_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

impl EmbeddingCache {
    pub fn new(dir: &Path) -> EmbeddingCache {
        EmbeddingCache {
            dir: dir.to_path_buf(),
            write_lock: Mutex::new(()),
        }
    }

    fn paths(&self, provider_id: &str) -> (PathBuf, PathBuf) {
        let base = self.dir.join(sanitize(provider_id));
        (base.join("vectors.bin"), base.join("index.json"))
    }

    fn load_index(&self, index_path: &Path) -> Result<SidecarIndex, EmbeddingError> {
        if !index_path.exists() {
            return Ok(SidecarIndex::default());
        }
        let bytes = fs::read(index_path).map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| EmbeddingError::Transport(format!("corrupt embedding index: {}", e)))
    }

    pub fn get(
        &self,
        provider: &dyn EmbeddingProvider,
        text: &str,
    ) -> Result<Option<Vec<f64>>, EmbeddingError> {
        let (vec_path, index_path) = self.paths(&provider.provider_id());
        let index = self.load_index(&index_path)?;
        let Some(&row) = index.rows.get(&text_hash(text)) else {
            return Ok(None);
        };
        let mut file =
            fs::File::open(&vec_path).map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        let row_bytes = index.dim * 4;
        let mut buf = vec![0u8; row_bytes];
        use std::io::Seek;
        file.seek(std::io::SeekFrom::Start(row * row_bytes as u64))
            .map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        file.read_exact(&mut buf)
            .map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        let mut out = Vec::with_capacity(index.dim);
        for chunk in buf.chunks_exact(4) {
            out.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
        }
        Ok(Some(out))
    }

    pub fn put(
        &self,
        provider: &dyn EmbeddingProvider,
        text: &str,
        vector: &[f64],
    ) -> Result<(), EmbeddingError> {
        let _guard = self.write_lock.lock().expect("cache lock poisoned");
        let (vec_path, index_path) = self.paths(&provider.provider_id());
        let mut index = self.load_index(&index_path)?;
        if index.rows.is_empty() {
            index.dim = vector.len();
        } else if index.dim != vector.len() {
            return Err(EmbeddingError::DimensionMismatch {
                expected: index.dim,
                got: vector.len(),
                index: 0,
            });
        }
        let key = text_hash(text);
        if index.rows.contains_key(&key) {
            return Ok(());
        }
        fs::create_dir_all(vec_path.parent().unwrap())
            .map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&vec_path)
            .map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        let mut bytes = Vec::with_capacity(vector.len() * 4);
        for &v in vector {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        file.write_all(&bytes)
            .map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        file.sync_all()
            .map_err(|e| EmbeddingError::Transport(e.to_string()))?;
        let row = index.rows.len() as u64;
        index.rows.insert(key, row);
        let index_bytes = serde_json::to_vec_pretty(&index).expect("index serializes");
        crate::store::atomic_write(&index_path, &index_bytes)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::HashEmbedder;
    use super::*;

    #[test]
    fn cache_roundtrip_preserves_f32_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::new(dir.path());
        let provider = HashEmbedder::new(8);
        let v: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37) as f32 as f64).collect();
        cache.put(&provider, "some text", &v).unwrap();
        let back = cache.get(&provider, "some text").unwrap().unwrap();
        assert_eq!(v, back);
        assert!(cache.get(&provider, "other").unwrap().is_none());
    }
}
