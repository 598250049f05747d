//! Unified preprocessing chain (band-pass → notch → resample) and
//! non-overlapping segmentation.

pub mod fir;
pub mod resample;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Recording, SubjectMeta};

pub use fir::{design_bandpass_fir, design_notch, filtfilt, FilterKernel, FilterKind};
pub use resample::{rational_ratio, resample};

pub const TARGET_FS: f64 = 200.0;
pub const SEGMENT_SECONDS: f64 = 10.0;
pub const SEGMENT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub band_low: f64,
    pub band_high: f64,
    /// Tap counts are given for a 200 Hz design and scaled with the input rate.
    pub bandpass_taps_at_200: usize,
    pub notch_taps_at_200: usize,
    pub notch_bandwidth: f64,
    pub target_fs: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            band_low: 0.1,
            band_high: 75.0,
            bandpass_taps_at_200: 8191,
            notch_taps_at_200: 513,
            notch_bandwidth: 2.0,
            target_fs: TARGET_FS,
        }
    }
}

/// Odd tap count equivalent to `taps_at_200` at rate `fs`.
pub fn scaled_taps(taps_at_200: usize, fs: f64) -> usize {
    let n = (taps_at_200 as f64 * fs / 200.0).round().max(3.0) as usize;
    n | 1
}

impl PreprocessConfig {
    pub fn bandpass(&self, fs: f64) -> Result<FilterKernel> {
        design_bandpass_fir(
            self.band_low,
            self.band_high,
            fs,
            scaled_taps(self.bandpass_taps_at_200, fs),
        )
    }

    pub fn notch(&self, line_freq: f64, fs: f64) -> Result<FilterKernel> {
        design_notch(
            line_freq,
            fs,
            self.notch_bandwidth,
            scaled_taps(self.notch_taps_at_200, fs),
        )
    }

    /// Minimum number of input samples a recording at `fs` needs to pass
    /// through the chain.
    pub fn min_samples(&self, fs: f64) -> usize {
        3 * scaled_taps(self.bandpass_taps_at_200, fs) + 1
    }
}

pub fn preprocess(rec: &Recording, line_freq: f64) -> Result<Recording> {
    preprocess_with(rec, line_freq, &PreprocessConfig::default())
}

/// Band-pass, notch at the line frequency, then resample to the target rate.
/// The line frequency must lie below the input Nyquist rate.
pub fn preprocess_with(rec: &Recording, line_freq: f64, cfg: &PreprocessConfig) -> Result<Recording> {
    let fs = rec.fs();
    if fs <= 2.0 * line_freq {
        return Err(Error::Design(format!(
            "input rate {fs} Hz cannot carry a {line_freq} Hz notch (need fs > 2×line frequency)"
        )));
    }
    let bp = cfg.bandpass(fs)?;
    let notch = cfg.notch(line_freq, fs)?;
    let data = rec
        .data()
        .par_iter()
        .map(|ch| {
            let x = filtfilt(ch, &bp)?;
            let x = filtfilt(&x, &notch)?;
            resample(&x, fs, cfg.target_fs)
        })
        .collect::<Result<Vec<_>>>()?;
    rec.with_data(cfg.target_fs, data)
}

/// One non-overlapping window of a preprocessed recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub data: Vec<Vec<f64>>,
    pub channels: Vec<String>,
    pub t_index: usize,
    /// Subject metadata with events restricted to this window.
    pub meta: SubjectMeta,
}

impl Segment {
    pub fn new(
        data: Vec<Vec<f64>>,
        channels: Vec<String>,
        t_index: usize,
        meta: SubjectMeta,
    ) -> Result<Self> {
        if data.len() != channels.len() {
            return Err(Error::Shape(format!(
                "{} rows for {} channels",
                data.len(),
                channels.len()
            )));
        }
        let t = data.first().map_or(0, Vec::len);
        if data.iter().any(|r| r.len() != t) {
            return Err(Error::Shape("ragged segment".into()));
        }
        if data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite sample in segment".into()));
        }
        Ok(Self {
            data,
            channels,
            t_index,
            meta,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }
}

/// Splits a 200 Hz recording into consecutive windows of `dur_s` seconds,
/// dropping the trailing remainder.
pub fn segment(rec: &Recording, dur_s: f64) -> Result<Vec<Segment>> {
    if (rec.fs() - TARGET_FS).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "segmentation expects {TARGET_FS} Hz input, got {} Hz",
            rec.fs()
        )));
    }
    let win = (dur_s * rec.fs()).round() as usize;
    if win == 0 {
        return Err(Error::Config(format!("segment duration {dur_s} s is empty")));
    }
    let count = rec.n_samples() / win;
    (0..count)
        .map(|k| {
            let data = rec
                .data()
                .iter()
                .map(|row| row[k * win..(k + 1) * win].to_vec())
                .collect();
            let start = k as f64 * dur_s;
            Segment::new(
                data,
                rec.channels().to_vec(),
                k,
                rec.meta.restricted_to(start, start + dur_s),
            )
        })
        .collect()
}
