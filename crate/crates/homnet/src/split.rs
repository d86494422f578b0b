//! Prepared-split container.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! bytes 0-7    magic "HOMSPLIT"
//! bytes 8-11   format version (u32, currently 1)
//! bytes 12-15  n_features (u32)
//! bytes 16-19  n_train (u32)
//! bytes 20-23  n_test (u32)
//! bytes 24-31  split seed (u64)
//! then         n_train labels (u8 each, 0 or 1)
//! then         n_train · n_features features (f32 LE each)
//! then         n_test labels, n_test · n_features features
//! ```
//!
//! A JSON manifest sidecar at `<path>.manifest.json` records the task
//! descriptor. Feature vectors are stored at f32 precision; training reads
//! them back as f64.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::dataio::{DatasetSplit, LabeledExample, TaskDescriptor};
use crate::statevec::FeatureVector;

pub const MAGIC: &[u8; 8] = b"HOMSPLIT";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("bad split container magic")]
    BadMagic,
    #[error("unsupported split container version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated container: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("malformed container: {0}")]
    Malformed(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("manifest error: {0}")]
    Manifest(#[from] serde_json::Error),
}

/// Manifest sidecar contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitManifest {
    pub schema_version: u32,
    pub dataset: String,
    pub class_a: u8,
    pub class_b: u8,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
}

impl SplitManifest {
    pub fn for_split(split: &DatasetSplit) -> Self {
        Self {
            schema_version: VERSION,
            dataset: split.task.dataset.clone(),
            class_a: split.task.class_a,
            class_b: split.task.class_b,
            seed: split.seed,
            n_train: split.train.len(),
            n_test: split.test.len(),
            n_features: split
                .train
                .first()
                .or(split.test.first())
                .map_or(0, |e| e.features.len()),
        }
    }
}

/// Serializes a split to container bytes.
pub fn encode_split(split: &DatasetSplit) -> Result<Vec<u8>, SplitError> {
    let n_features = split
        .train
        .first()
        .or(split.test.first())
        .map_or(0, |e| e.features.len());
    let total = 32
        + (split.train.len() + split.test.len()) * (1 + 4 * n_features);
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n_features as u32).to_le_bytes());
    out.extend_from_slice(&(split.train.len() as u32).to_le_bytes());
    out.extend_from_slice(&(split.test.len() as u32).to_le_bytes());
    out.extend_from_slice(&split.seed.to_le_bytes());
    for part in [&split.train, &split.test] {
        for ex in part.iter() {
            out.push(ex.label);
        }
        for ex in part.iter() {
            if ex.features.len() != n_features {
                return Err(SplitError::Malformed(format!(
                    "inconsistent feature length {} vs {n_features}",
                    ex.features.len()
                )));
            }
            for &v in ex.features.as_slice() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    Ok(out)
}

fn read_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

fn read_part(
    bytes: &[u8],
    offset: &mut usize,
    count: usize,
    n_features: usize,
) -> Result<Vec<LabeledExample>, SplitError> {
    let labels = &bytes[*offset..*offset + count];
    *offset += count;
    let mut part = Vec::with_capacity(count);
    for (i, &label) in labels.iter().enumerate() {
        if label > 1 {
            return Err(SplitError::Malformed(format!(
                "label {label} at example {i} is not binary"
            )));
        }
        let mut amps = Vec::with_capacity(n_features);
        for j in 0..n_features {
            let at = *offset + 4 * (i * n_features + j);
            let v = f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
            if !v.is_finite() {
                return Err(SplitError::Malformed(format!(
                    "non-finite feature at example {i}"
                )));
            }
            amps.push(v as f64);
        }
        part.push(LabeledExample {
            features: FeatureVector::from_vec(amps)
                .map_err(|e| SplitError::Malformed(e.to_string()))?,
            label,
        });
    }
    *offset += 4 * count * n_features;
    Ok(part)
}

/// Parses container bytes. The task descriptor lives in the manifest
/// sidecar; callers going through [`load_split`] get it filled in.
pub fn decode_split(bytes: &[u8], task: TaskDescriptor) -> Result<DatasetSplit, SplitError> {
    if bytes.len() < 32 {
        return Err(SplitError::Truncated {
            expected: 32,
            got: bytes.len(),
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(SplitError::BadMagic);
    }
    let version = read_u32(bytes, 8);
    if version != VERSION {
        return Err(SplitError::UnsupportedVersion(version));
    }
    let n_features = read_u32(bytes, 12) as usize;
    let n_train = read_u32(bytes, 16) as usize;
    let n_test = read_u32(bytes, 20) as usize;
    let seed = u64::from_le_bytes(bytes[24..32].try_into().unwrap());

    let per_example = 1usize
        .checked_add(n_features.checked_mul(4).ok_or(SplitError::Malformed(
            "feature count overflow".into(),
        ))?)
        .ok_or(SplitError::Malformed("size overflow".into()))?;
    let expected = n_train
        .checked_add(n_test)
        .and_then(|n| n.checked_mul(per_example))
        .and_then(|n| n.checked_add(32))
        .ok_or(SplitError::Malformed("size overflow".into()))?;
    if bytes.len() != expected {
        return Err(SplitError::Truncated {
            expected,
            got: bytes.len(),
        });
    }

    let mut offset = 32;
    let train = read_part(bytes, &mut offset, n_train, n_features)?;
    let test = read_part(bytes, &mut offset, n_test, n_features)?;
    Ok(DatasetSplit {
        train,
        test,
        seed,
        task,
    })
}

/// Path of the manifest sidecar for a container path.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SplitError + '_ {
    move |source| SplitError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes the container and its manifest sidecar.
pub fn save_split(path: &Path, split: &DatasetSplit) -> Result<(), SplitError> {
    std::fs::write(path, encode_split(split)?).map_err(io_err(path))?;
    let manifest = SplitManifest::for_split(split);
    let sidecar = manifest_path(path);
    std::fs::write(&sidecar, serde_json::to_string_pretty(&manifest)?).map_err(io_err(&sidecar))?;
    Ok(())
}

/// Reads the container and its manifest sidecar.
pub fn load_split(path: &Path) -> Result<DatasetSplit, SplitError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    let sidecar = manifest_path(path);
    let manifest: SplitManifest =
        serde_json::from_slice(&std::fs::read(&sidecar).map_err(io_err(&sidecar))?)?;
    let split = decode_split(
        &bytes,
        TaskDescriptor {
            dataset: manifest.dataset.clone(),
            class_a: manifest.class_a,
            class_b: manifest.class_b,
        },
    )?;
    if split.train.len() != manifest.n_train || split.test.len() != manifest.n_test {
        return Err(SplitError::Malformed(
            "manifest does not match container contents".into(),
        ));
    }
    Ok(split)
}
