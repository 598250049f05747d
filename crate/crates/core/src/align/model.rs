//! Toy dual-stream encoders, projection heads and the analytic
//! forward/backward pass of the pairwise sigmoid objective.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::align::loss::{dot, pairwise_logits, sigmoid_align_loss, LossNormalization, Square};
use crate::error::{Error, Result};
use crate::signal::Segment;
use crate::util::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub patch_len: usize,
    pub d1: usize,
    pub d2: usize,
    pub hidden: usize,
    /// Shared embedding dimension.
    pub d: usize,
    pub vis_downsample: usize,
    pub image_h: usize,
    pub image_w: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            patch_len: 200,
            d1: 128,
            d2: 128,
            hidden: 256,
            d: 256,
            vis_downsample: 8,
            image_h: 224,
            image_w: 224,
        }
    }
}

impl ModelConfig {
    pub fn vis_input_dim(&self) -> usize {
        (self.image_h / self.vis_downsample) * (self.image_w / self.vis_downsample)
    }

    fn validate(&self) -> Result<()> {
        let dims = [self.patch_len, self.d1, self.d2, self.hidden, self.d, self.vis_downsample];
        if dims.iter().any(|&v| v == 0) {
            return Err(Error::Config("model dimensions must be positive".into()));
        }
        if self.image_h % self.vis_downsample != 0 || self.image_w % self.vis_downsample != 0 {
            return Err(Error::Config(format!(
                "image {}x{} not divisible by downsample {}",
                self.image_h, self.image_w, self.vis_downsample
            )));
        }
        Ok(())
    }
}

/// Encoder weights. The EEG patch embedding is channel-specific over a
/// fixed channel vocabulary; the image embedding is frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub channels: Vec<String>,
    pub patch_len: usize,
    pub d1: usize,
    /// `[channel][out][k]`, length `channels · d1 · patch_len`.
    pub eeg_w: Vec<f64>,
    pub eeg_b: Vec<f64>,
    pub vis_downsample: usize,
    pub image_h: usize,
    pub image_w: usize,
    pub d2: usize,
    /// `[out][pixel]` over the pooled grayscale image.
    pub vis_w: Vec<f64>,
    pub vis_b: Vec<f64>,
}

/// Per-channel mean patch, the sufficient statistic of a linear patch
/// embedding followed by mean pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct EegInput {
    /// `(vocabulary index, mean patch)` for each present channel.
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl EncoderParams {
    pub fn vis_input_dim(&self) -> usize {
        (self.image_h / self.vis_downsample) * (self.image_w / self.vis_downsample)
    }

    fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    pub fn eeg_input(&self, seg: &Segment) -> Result<EegInput> {
        let t = seg.n_samples();
        let l = self.patch_len;
        if t == 0 || t % l != 0 {
            return Err(Error::Shape(format!("{t} samples not divisible by patch length {l}")));
        }
        let n_patches = t / l;
        let mut rows = Vec::new();
        for (name, row) in seg.channels.iter().zip(&seg.data) {
            let Some(ci) = self.channel_index(name) else { continue };
            let mut mean = vec![0.0; l];
            for p in 0..n_patches {
                for (m, x) in mean.iter_mut().zip(&row[p * l..(p + 1) * l]) {
                    *m += x;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n_patches as f64);
            rows.push((ci, mean));
        }
        if rows.is_empty() {
            return Err(Error::Shape("segment shares no channels with the encoder vocabulary".into()));
        }
        Ok(EegInput { rows })
    }

    pub fn encode_eeg_input(&self, input: &EegInput) -> Vec<f64> {
        let (l, d1) = (self.patch_len, self.d1);
        let mut h = vec![0.0; d1];
        for (ci, mean) in &input.rows {
            let base = ci * d1 * l;
            for (o, ho) in h.iter_mut().enumerate() {
                *ho += dot(&self.eeg_w[base + o * l..base + (o + 1) * l], mean);
            }
        }
        let c = input.rows.len() as f64;
        h.iter_mut().zip(&self.eeg_b).for_each(|(v, b)| *v = *v / c + b);
        h
    }

    /// Grayscale, average-pool by `vis_downsample`, flatten.
    pub fn pool_image(&self, rgb: &[u8], h: usize, w: usize) -> Result<Vec<f64>> {
        if h != self.image_h || w != self.image_w || rgb.len() != h * w * 3 {
            return Err(Error::Shape(format!(
                "image {h}x{w} ({} bytes), expected {}x{}x3",
                rgb.len(),
                self.image_h,
                self.image_w
            )));
        }
        let k = self.vis_downsample;
        let (ph, pw) = (h / k, w / k);
        let mut pooled = vec![0.0; ph * pw];
        for r in 0..h {
            for c in 0..w {
                let i = (r * w + c) * 3;
                let g = (0.299 * rgb[i] as f64 + 0.587 * rgb[i + 1] as f64 + 0.114 * rgb[i + 2] as f64) / 255.0;
                pooled[(r / k) * pw + c / k] += g;
            }
        }
        let area = (k * k) as f64;
        pooled.iter_mut().for_each(|v| *v /= area);
        Ok(pooled)
    }

    pub fn encode_pooled_image(&self, pooled: &[f64]) -> Vec<f64> {
        let p = pooled.len();
        (0..self.d2)
            .map(|o| dot(&self.vis_w[o * p..(o + 1) * p], pooled) + self.vis_b[o])
            .collect()
    }

    /// Hash of the frozen weights in their stored f32 form.
    pub fn vis_embed_hash(&self) -> String {
        let bytes: Vec<u8> = self.vis_w.iter().chain(&self.vis_b).flat_map(|&v| (v as f32).to_le_bytes()).collect();
        sha256_hex(&bytes)
    }
}

/// Temporal stream: per-channel non-overlapping patches, linear patch
/// embedding, mean over all patch tokens.
pub fn encode_eeg(seg: &Segment, p: &EncoderParams) -> Result<Vec<f64>> {
    Ok(p.encode_eeg_input(&p.eeg_input(seg)?))
}

/// Spatial stream over an RGB `h × w` image.
pub fn encode_topo(rgb: &[u8], h: usize, w: usize, p: &EncoderParams) -> Result<Vec<f64>> {
    Ok(p.encode_pooled_image(&p.pool_image(rgb, h, w)?))
}

pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

pub fn gelu_grad(x: f64) -> f64 {
    let cdf = 0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2));
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    cdf + x * pdf
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionHead {
    pub in_dim: usize,
    pub hidden: usize,
    pub out_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

pub struct HeadCache {
    input: Vec<f64>,
    pre: Vec<f64>,
    act: Vec<f64>,
}

impl ProjectionHead {
    pub fn zeros(in_dim: usize, hidden: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            hidden,
            out_dim,
            w1: vec![0.0; hidden * in_dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; out_dim * hidden],
            b2: vec![0.0; out_dim],
        }
    }

    fn init(in_dim: usize, hidden: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let mut head = Self::zeros(in_dim, hidden, out_dim);
        fill_normal(&mut head.w1, (1.0 / in_dim as f64).sqrt(), rng);
        fill_normal(&mut head.w2, (1.0 / hidden as f64).sqrt(), rng);
        head
    }

    pub fn forward(&self, h: &[f64]) -> Result<(Vec<f64>, HeadCache)> {
        if h.len() != self.in_dim {
            return Err(Error::Shape(format!("head expects {} inputs, got {}", self.in_dim, h.len())));
        }
        let pre: Vec<f64> = (0..self.hidden)
            .map(|j| dot(&self.w1[j * self.in_dim..(j + 1) * self.in_dim], h) + self.b1[j])
            .collect();
        let act: Vec<f64> = pre.iter().map(|&u| gelu(u)).collect();
        let z = (0..self.out_dim)
            .map(|o| dot(&self.w2[o * self.hidden..(o + 1) * self.hidden], &act) + self.b2[o])
            .collect();
        Ok((z, HeadCache { input: h.to_vec(), pre, act }))
    }

    /// Accumulates parameter gradients into `g` (w1, b1, w2, b2) and
    /// returns dL/dh.
    fn backward(&self, cache: &HeadCache, dz: &[f64], g: &mut [Vec<f64>]) -> Vec<f64> {
        let (n_in, n_h) = (self.in_dim, self.hidden);
        let mut da = vec![0.0; n_h];
        for (o, &dzo) in dz.iter().enumerate() {
            g[3][o] += dzo;
            let row = &self.w2[o * n_h..(o + 1) * n_h];
            for j in 0..n_h {
                g[2][o * n_h + j] += dzo * cache.act[j];
                da[j] += dzo * row[j];
            }
        }
        let mut dh = vec![0.0; n_in];
        for j in 0..n_h {
            let du = da[j] * gelu_grad(cache.pre[j]);
            g[1][j] += du;
            let row = &self.w1[j * n_in..(j + 1) * n_in];
            for k in 0..n_in {
                g[0][j * n_in + k] += du * cache.input[k];
                dh[k] += du * row[k];
            }
        }
        dh
    }
}

/// Applies `z = W2·GELU(W1·h + b1) + b2`.
pub fn project(h: &[f64], head: &ProjectionHead) -> Result<Vec<f64>> {
    head.forward(h).map(|(z, _)| z)
}

/// Unit-norm copy of `z`.
pub fn l2_normalize(z: &[f64]) -> Result<Vec<f64>> {
    let n = dot(z, z).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Norm(format!("cannot normalize a vector of norm {n}")));
    }
    Ok(z.iter().map(|v| v / n).collect())
}

fn fill_normal(v: &mut [f64], std: f64, rng: &mut impl Rng) {
    let dist = Normal::new(0.0, std).expect("finite std");
    v.iter_mut().for_each(|x| *x = dist.sample(rng));
}

pub const TRAINABLE: [&str; 12] = [
    "eeg_embed.weight",
    "eeg_embed.bias",
    "head_eeg.w1",
    "head_eeg.b1",
    "head_eeg.w2",
    "head_eeg.b2",
    "head_vis.w1",
    "head_vis.b1",
    "head_vis.w2",
    "head_vis.b2",
    "log_tau",
    "logit_bias",
];
pub const FROZEN: [&str; 2] = ["vis_embed.weight", "vis_embed.bias"];

/// Gradients in `TRAINABLE` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl Gradients {
    pub fn zeros_like(model: &AlignModel) -> Self {
        Self(model.trainable().iter().map(|t| vec![0.0; t.len()]).collect())
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, f: f64) {
        self.0.iter_mut().flatten().for_each(|x| *x *= f);
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        TRAINABLE.iter().position(|n| *n == name).map(|i| self.0[i].as_slice())
    }
}

/// One aligned pair with the frozen image embedding precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignPair {
    pub eeg: EegInput,
    pub h_vis: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignModel {
    pub config: ModelConfig,
    pub enc: EncoderParams,
    pub head_eeg: ProjectionHead,
    pub head_vis: ProjectionHead,
    pub log_tau: f64,
    pub logit_bias: f64,
    pub loss_norm: LossNormalization,
}

pub const INIT_LOG_TAU: f64 = std::f64::consts::LN_10;
pub const INIT_LOGIT_BIAS: f64 = -10.0;

impl AlignModel {
    pub fn init(config: ModelConfig, channels: Vec<String>, seed: u64) -> Result<Self> {
        config.validate()?;
        if channels.is_empty() {
            return Err(Error::Config("empty channel vocabulary".into()));
        }
        let mut rng = crate::util::rng(seed);
        let n_vis = config.vis_input_dim();
        let mut eeg_w = vec![0.0; channels.len() * config.d1 * config.patch_len];
        fill_normal(&mut eeg_w, (1.0 / config.patch_len as f64).sqrt(), &mut rng);
        let mut vis_w = vec![0.0; config.d2 * n_vis];
        fill_normal(&mut vis_w, (1.0 / n_vis as f64).sqrt(), &mut rng);
        let enc = EncoderParams {
            channels,
            patch_len: config.patch_len,
            d1: config.d1,
            eeg_w,
            eeg_b: vec![0.0; config.d1],
            vis_downsample: config.vis_downsample,
            image_h: config.image_h,
            image_w: config.image_w,
            d2: config.d2,
            vis_w,
            vis_b: vec![0.0; config.d2],
        };
        let head_eeg = ProjectionHead::init(config.d1, config.hidden, config.d, &mut rng);
        let head_vis = ProjectionHead::init(config.d2, config.hidden, config.d, &mut rng);
        Ok(Self {
            config,
            enc,
            head_eeg,
            head_vis,
            log_tau: INIT_LOG_TAU,
            logit_bias: INIT_LOGIT_BIAS,
            loss_norm: LossNormalization::PerPair,
        })
    }

    pub fn tau(&self) -> f64 {
        self.log_tau.exp()
    }

    pub fn trainable(&self) -> Vec<&[f64]> {
        vec![
            &self.enc.eeg_w,
            &self.enc.eeg_b,
            &self.head_eeg.w1,
            &self.head_eeg.b1,
            &self.head_eeg.w2,
            &self.head_eeg.b2,
            &self.head_vis.w1,
            &self.head_vis.b1,
            &self.head_vis.w2,
            &self.head_vis.b2,
            std::slice::from_ref(&self.log_tau),
            std::slice::from_ref(&self.logit_bias),
        ]
    }

    pub fn trainable_mut(&mut self) -> Vec<&mut [f64]> {
        let Self { enc, head_eeg, head_vis, log_tau, logit_bias, .. } = self;
        vec![
            &mut enc.eeg_w,
            &mut enc.eeg_b,
            &mut head_eeg.w1,
            &mut head_eeg.b1,
            &mut head_eeg.w2,
            &mut head_eeg.b2,
            &mut head_vis.w1,
            &mut head_vis.b1,
            &mut head_vis.w2,
            &mut head_vis.b2,
            std::slice::from_mut(log_tau),
            std::slice::from_mut(logit_bias),
        ]
    }

    /// Shapes in `TRAINABLE` order followed by `FROZEN` order.
    pub fn shapes(&self) -> Vec<Vec<usize>> {
        let c = &self.config;
        let v = self.enc.channels.len();
        vec![
            vec![v, c.d1, c.patch_len],
            vec![c.d1],
            vec![c.hidden, c.d1],
            vec![c.hidden],
            vec![c.d, c.hidden],
            vec![c.d],
            vec![c.hidden, c.d2],
            vec![c.hidden],
            vec![c.d, c.hidden],
            vec![c.d],
            vec![1],
            vec![1],
            vec![c.d2, c.vis_input_dim()],
            vec![c.d2],
        ]
    }

    /// Precomputes the EEG sufficient statistics and the frozen image
    /// embedding for one aligned pair.
    pub fn prepare_pair(&self, seg: &Segment, rgb: &[u8], h: usize, w: usize) -> Result<AlignPair> {
        Ok(AlignPair {
            eeg: self.enc.eeg_input(seg)?,
            h_vis: encode_topo(rgb, h, w, &self.enc)?,
        })
    }

    pub fn embed_eeg_input(&self, input: &EegInput) -> Result<Vec<f64>> {
        l2_normalize(&project(&self.enc.encode_eeg_input(input), &self.head_eeg)?)
    }

    pub fn embed_eeg(&self, seg: &Segment) -> Result<Vec<f64>> {
        self.embed_eeg_input(&self.enc.eeg_input(seg)?)
    }

    pub fn embed_vis(&self, h_vis: &[f64]) -> Result<Vec<f64>> {
        l2_normalize(&project(h_vis, &self.head_vis)?)
    }

    pub fn logits(&self, batch: &[AlignPair]) -> Result<Square> {
        let ze = batch.iter().map(|p| self.embed_eeg_input(&p.eeg)).collect::<Result<Vec<_>>>()?;
        let zv = batch.iter().map(|p| self.embed_vis(&p.h_vis)).collect::<Result<Vec<_>>>()?;
        pairwise_logits(&ze, &zv, self.tau(), self.logit_bias)
    }

    pub fn batch_loss(&self, batch: &[AlignPair]) -> Result<f64> {
        Ok(sigmoid_align_loss(&self.logits(batch)?, self.loss_norm).0)
    }

    /// Loss and analytic gradients for every trainable tensor.
    pub fn forward_backward(&self, batch: &[AlignPair]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::Shape("empty batch".into()));
        }
        let mut e_side = Vec::with_capacity(batch.len());
        let mut v_side = Vec::with_capacity(batch.len());
        for p in batch {
            let he = self.enc.encode_eeg_input(&p.eeg);
            let (z, cache) = self.head_eeg.forward(&he)?;
            let zh = l2_normalize(&z)?;
            e_side.push((z, zh, cache));
            let (z, cache) = self.head_vis.forward(&p.h_vis)?;
            let zh = l2_normalize(&z)?;
            v_side.push((z, zh, cache));
        }
        let ze: Vec<Vec<f64>> = e_side.iter().map(|s| s.1.clone()).collect();
        let zv: Vec<Vec<f64>> = v_side.iter().map(|s| s.1.clone()).collect();
        let tau = self.tau();
        let s = pairwise_logits(&ze, &zv, tau, self.logit_bias)?;
        let (loss, gs) = sigmoid_align_loss(&s, self.loss_norm);

        let mut grads = Gradients::zeros_like(self);
        let n = batch.len();
        let d = self.config.d;
        let mut dlog_tau = 0.0;
        let mut db = 0.0;
        for i in 0..n {
            for j in 0..n {
                let g = gs.get(i, j);
                db += g;
                dlog_tau += g * tau * dot(&ze[i], &zv[j]);
            }
        }
        grads.0[10][0] = dlog_tau;
        grads.0[11][0] = db;

        for i in 0..n {
            let mut dzh_e = vec![0.0; d];
            let mut dzh_v = vec![0.0; d];
            for j in 0..n {
                let ge = tau * gs.get(i, j);
                let gv = tau * gs.get(j, i);
                for k in 0..d {
                    dzh_e[k] += ge * zv[j][k];
                    dzh_v[k] += gv * ze[j][k];
                }
            }
            let dz_e = normalize_backward(&e_side[i].0, &e_side[i].1, &dzh_e);
            let dz_v = normalize_backward(&v_side[i].0, &v_side[i].1, &dzh_v);
            let dh_e = self.head_eeg.backward(&e_side[i].2, &dz_e, &mut grads.0[2..6]);
            self.head_vis.backward(&v_side[i].2, &dz_v, &mut grads.0[6..10]);
            self.eeg_embed_backward(&batch[i].eeg, &dh_e, &mut grads.0[0..2]);
        }
        Ok((loss, grads))
    }

    fn eeg_embed_backward(&self, input: &EegInput, dh: &[f64], g: &mut [Vec<f64>]) {
        let (l, d1) = (self.enc.patch_len, self.enc.d1);
        let inv_c = 1.0 / input.rows.len() as f64;
        for (o, &dho) in dh.iter().enumerate() {
            g[1][o] += dho;
        }
        for (ci, mean) in &input.rows {
            let base = ci * d1 * l;
            for (o, &dho) in dh.iter().enumerate() {
                let s = dho * inv_c;
                for (gw, m) in g[0][base + o * l..base + (o + 1) * l].iter_mut().zip(mean) {
                    *gw += s * m;
                }
            }
        }
    }
}

/// Jacobian of `z ↦ z/‖z‖` applied to the upstream gradient.
fn normalize_backward(z: &[f64], zh: &[f64], dzh: &[f64]) -> Vec<f64> {
    let norm = dot(z, z).sqrt();
    let proj = dot(zh, dzh);
    zh.iter().zip(dzh).map(|(u, g)| (g - u * proj) / norm).collect()
}
