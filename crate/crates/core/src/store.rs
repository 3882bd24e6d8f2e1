//! On-disk containers: atomic file replacement, a binary matrix format with
//! a shape header, and the (id,label) CSV used for cluster labelings.

use ndarray::Array2;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad container magic in {0}")]
    BadMagic(String),
    #[error("unsupported container version {0}")]
    BadVersion(u32),
    #[error("truncated container {0}")]
    Truncated(String),
}

fn io_err(path: &Path, source: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `bytes` to `path` via a temporary sibling file and rename, so
/// readers never observe a half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    let tmp = parent.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| "file".to_string())
    ));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

const MAT_MAGIC: &[u8; 8] = b"TLMATRX\0";
const MAT_VERSION: u32 = 1;

/// Serializes a dense row-major f64 matrix with a shape header.
pub fn write_matrix_f64(path: &Path, m: &Array2<f64>) -> Result<(), StoreError> {
    let mut buf = Vec::with_capacity(24 + m.len() * 8);
    buf.extend_from_slice(MAT_MAGIC);
    buf.extend_from_slice(&MAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for v in m.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    atomic_write(path, &buf)
}

pub fn read_matrix_f64(path: &Path) -> Result<Array2<f64>, StoreError> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(|e| io_err(path, e))?
        .read_to_end(&mut bytes)
        .map_err(|e| io_err(path, e))?;
    let name = path.display().to_string();
    if bytes.len() < 28 || &bytes[0..8] != MAT_MAGIC {
        return Err(StoreError::BadMagic(name));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != MAT_VERSION {
        return Err(StoreError::BadVersion(version));
    }
    let rows = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[20..28].try_into().unwrap()) as usize;
    let need = 28 + rows * cols * 8;
    if bytes.len() < need {
        return Err(StoreError::Truncated(name));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows * cols {
        let off = 28 + i * 8;
        data.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("shape checked above"))
}

/// Writes a labeling as `id,label` CSV with a header row.
pub fn write_labels_csv(path: &Path, rows: &[(String, i64)]) -> Result<(), StoreError> {
    let mut out = String::from("id,label\n");
    for (id, label) in rows {
        out.push_str(&format!("{},{}\n", id, label));
    }
    atomic_write(path, out.as_bytes())
}
