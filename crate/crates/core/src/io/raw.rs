//! Raw-matrix fallback format: `<name>.f32` holds little-endian 32-bit
//! floats in channel-major order; `<name>.json` describes them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Recording, SubjectMeta};

pub const ENCODING_F32LE: &str = "f32le-channel-major";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDescriptor {
    pub channels: Vec<String>,
    pub fs: f64,
    pub samples: usize,
    pub encoding: String,
    #[serde(default)]
    pub meta: SubjectMeta,
}

impl RawDescriptor {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// Sidecar path for a `.f32` file: same stem, `.json` extension.
pub fn sidecar_path(data_path: &Path) -> PathBuf {
    data_path.with_extension("json")
}

pub fn decode_f32le(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect()
}

pub fn encode_f32le<'a>(values: impl IntoIterator<Item = &'a f64>) -> Vec<u8> {
    values
        .into_iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect()
}

pub fn read_raw_matrix(path: &Path, desc: &RawDescriptor) -> Result<Recording> {
    let bytes = fs::read(path)?;
    raw_matrix_from_bytes(&bytes, desc)
}

pub fn raw_matrix_from_bytes(bytes: &[u8], desc: &RawDescriptor) -> Result<Recording> {
    let accepted = ["f32le", "float32le", ENCODING_F32LE];
    if !accepted.contains(&desc.encoding.as_str()) {
        return Err(Error::Unsupported(format!("value encoding {:?}", desc.encoding)));
    }
    let c = desc.channels.len();
    let expected = c
        .checked_mul(desc.samples)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::parse(0, "descriptor size overflow"))?;
    if bytes.len() != expected {
        return Err(Error::parse(
            bytes.len().min(expected) as u64,
            format!(
                "file holds {} bytes, descriptor declares {c}×{}×4 = {expected}",
                bytes.len(),
                desc.samples
            ),
        ));
    }
    let values = decode_f32le(bytes);
    let data = if desc.samples == 0 {
        vec![Vec::new(); c]
    } else {
        values
            .chunks_exact(desc.samples)
            .map(|row| row.iter().map(|&v| v as f64).collect())
            .collect()
    };
    Recording::new(desc.channels.clone(), desc.fs, data, desc.meta.clone())
}

/// Writes `rec` as `<path>` plus its JSON sidecar. Samples are stored as f32.
pub fn write_raw_matrix(path: &Path, rec: &Recording) -> Result<RawDescriptor> {
    let desc = RawDescriptor {
        channels: rec.channels().to_vec(),
        fs: rec.fs(),
        samples: rec.n_samples(),
        encoding: ENCODING_F32LE.into(),
        meta: rec.meta.clone(),
    };
    let bytes = encode_f32le(rec.data().iter().flatten());
    crate::util::write_atomic(path, &bytes)?;
    crate::util::write_atomic(&sidecar_path(path), &serde_json::to_vec_pretty(&desc)?)?;
    Ok(desc)
}
