//! Checkpoint format: a flat little-endian f32 blob plus a JSON manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::align::loss::LossNormalization;
use crate::align::model::{AlignModel, EncoderParams, ModelConfig, ProjectionHead, FROZEN, TRAINABLE};
use crate::align::optim::AdamState;
use crate::align::train::AlignHyper;
use crate::error::{Error, Result};
use crate::util::{sha256_hex, write_atomic};

pub const MANIFEST_FILE: &str = "checkpoint.json";
pub const BLOB_FILE: &str = "weights.f32";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: AlignModel,
    pub hyper: AlignHyper,
    pub loss_curve: Vec<f64>,
    pub optimizer: Option<AdamState>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Offset in f32 elements.
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub config: ModelConfig,
    pub channels: Vec<String>,
    pub hyper: AlignHyper,
    pub loss_norm: LossNormalization,
    pub tensors: Vec<TensorEntry>,
    pub blob_sha256: String,
    pub vis_embed_sha256: String,
    pub loss_curve: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<AdamState>,
}

fn all_tensors(model: &AlignModel) -> Vec<(&'static str, &[f64])> {
    let mut out: Vec<(&'static str, &[f64])> = TRAINABLE.iter().copied().zip(model.trainable()).collect();
    out.push((FROZEN[0], &model.enc.vis_w));
    out.push((FROZEN[1], &model.enc.vis_b));
    out
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<(Vec<u8>, Vec<u8>)> {
        let shapes = self.model.shapes();
        let mut blob = Vec::new();
        let mut tensors = Vec::new();
        let mut offset = 0;
        for ((name, data), shape) in all_tensors(&self.model).into_iter().zip(shapes) {
            if data.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("tensor {name} holds non-finite values")));
            }
            blob.extend(data.iter().flat_map(|&v| (v as f32).to_le_bytes()));
            tensors.push(TensorEntry { name: name.into(), shape, offset, len: data.len() });
            offset += data.len();
        }
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            config: self.model.config,
            channels: self.model.enc.channels.clone(),
            hyper: self.hyper,
            loss_norm: self.model.loss_norm,
            tensors,
            blob_sha256: sha256_hex(&blob),
            vis_embed_sha256: self.model.enc.vis_embed_hash(),
            loss_curve: self.loss_curve.clone(),
            optimizer: self.optimizer.clone(),
        };
        Ok((serde_json::to_vec_pretty(&manifest)?, blob))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let (manifest, blob) = self.to_bytes()?;
        write_atomic(&dir.join(BLOB_FILE), &blob)?;
        write_atomic(&dir.join(MANIFEST_FILE), &manifest)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = std::fs::read(dir.join(MANIFEST_FILE))?;
        let blob = std::fs::read(dir.join(BLOB_FILE))?;
        Self::from_bytes(&manifest, &blob)
    }

    pub fn from_bytes(manifest: &[u8], blob: &[u8]) -> Result<Self> {
        let m: Manifest = serde_json::from_slice(manifest)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!("checkpoint format {}", m.format_version)));
        }
        if sha256_hex(blob) != m.blob_sha256 {
            return Err(Error::Integrity("checkpoint blob hash mismatch".into()));
        }
        let floats: Vec<f64> = blob
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        let mut model = AlignModel {
            config: m.config,
            enc: EncoderParams {
                channels: m.channels.clone(),
                patch_len: m.config.patch_len,
                d1: m.config.d1,
                eeg_w: vec![0.0; m.channels.len() * m.config.d1 * m.config.patch_len],
                eeg_b: vec![0.0; m.config.d1],
                vis_downsample: m.config.vis_downsample,
                image_h: m.config.image_h,
                image_w: m.config.image_w,
                d2: m.config.d2,
                vis_w: vec![],
                vis_b: vec![],
            },
            head_eeg: ProjectionHead::zeros(m.config.d1, m.config.hidden, m.config.d),
            head_vis: ProjectionHead::zeros(m.config.d2, m.config.hidden, m.config.d),
            log_tau: 0.0,
            logit_bias: 0.0,
            loss_norm: m.loss_norm,
        };
        let expected = model.shapes();
        let names: Vec<&str> = TRAINABLE.iter().chain(FROZEN.iter()).copied().collect();
        if m.tensors.len() != names.len() {
            return Err(Error::Parse { offset: 0, msg: "unexpected tensor count".into() });
        }
        let mut values = Vec::new();
        for ((entry, name), shape) in m.tensors.iter().zip(&names).zip(&expected) {
            if entry.name != *name || &entry.shape != shape || entry.len != shape.iter().product::<usize>() {
                return Err(Error::Shape(format!("tensor {} does not match the configuration", entry.name)));
            }
            let end = entry.offset.checked_add(entry.len).filter(|&e| e <= floats.len());
            let Some(end) = end else {
                return Err(Error::Parse { offset: entry.offset as u64 * 4, msg: format!("tensor {} overruns blob", entry.name) });
            };
            values.push(floats[entry.offset..end].to_vec());
        }
        let mut it = values.into_iter();
        {
            let mut targets = model.trainable_mut();
            for t in targets.iter_mut() {
                let v = it.next().expect("tensor count checked");
                t.copy_from_slice(&v);
            }
        }
        model.enc.vis_w = it.next().expect("tensor count checked");
        model.enc.vis_b = it.next().expect("tensor count checked");
        if model.enc.vis_embed_hash() != m.vis_embed_sha256 {
            return Err(Error::Integrity("frozen image embedding hash mismatch".into()));
        }
        Ok(Self {
            model,
            hyper: m.hyper,
            loss_curve: m.loss_curve,
            optimizer: m.optimizer,
        })
    }

    pub fn manifest_path(dir: &Path) -> PathBuf {
        dir.join(MANIFEST_FILE)
    }
}
