//! Synthetic recordings and aligned segment/topomap pairs for tests,
//! demos and the desk-scale alignment run.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::io::{EventLabel, Recording, Sex, SubjectMeta};
use crate::signal::{Segment, SEGMENT_SAMPLES, TARGET_FS};
use crate::topomap::ElectrodeLayout;

/// The 19 electrodes of the 10-20 system, legacy temporal naming.
pub const MONTAGE_1020: [&str; 19] = [
    "FP1", "FP2", "F7", "F3", "FZ", "F4", "F8", "T3", "C3", "CZ", "C4", "T4", "T5", "P3", "PZ", "P4",
    "T6", "O1", "O2",
];

pub fn montage_1020() -> Vec<String> {
    MONTAGE_1020.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone)]
pub struct SynthRecordingConfig {
    pub channels: Vec<String>,
    pub fs: f64,
    pub seconds: f64,
    pub line_freq: f64,
    pub seed: u64,
    pub meta: SubjectMeta,
}

impl Default for SynthRecordingConfig {
    fn default() -> Self {
        Self {
            channels: montage_1020(),
            fs: 256.0,
            seconds: 200.0,
            line_freq: 50.0,
            seed: 0,
            meta: SubjectMeta {
                subject_id: "S001".into(),
                age: Some(34),
                sex: Some(Sex::Female),
                condition: None,
                task: Some("a resting state".into()),
                dataset: "synthetic".into(),
                event_labels: vec![EventLabel { onset: 40.0, duration: 5.0, label: "eyes closed".into() }],
            },
        }
    }
}

/// Band-limited rhythms with slowly drifting amplitudes, a spatial
/// alpha gradient, mains interference and white noise.
pub fn synthetic_recording(cfg: &SynthRecordingConfig) -> Result<Recording> {
    let mut rng = crate::util::rng(cfg.seed);
    let layout = ElectrodeLayout::standard();
    let n = (cfg.seconds * cfg.fs).round() as usize;
    let rhythms = [(2.0, 6.0), (6.0, 3.0), (10.0, 4.0), (20.0, 1.5), (40.0, 0.6), (60.0, 0.2)];
    let data = cfg
        .channels
        .iter()
        .map(|name| {
            let (x, y) = layout.position(name).unwrap_or((0.0, 0.0));
            let gains: Vec<f64> = rhythms
                .iter()
                .map(|(f, a)| {
                    let spatial = if *f == 10.0 { 1.0 - 0.6 * y } else { 1.0 + 0.3 * x };
                    a * spatial * rng.gen_range(0.7..1.3)
                })
                .collect();
            let phases: Vec<f64> = rhythms.iter().map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            let drift = rng.gen_range(0.01..0.05);
            (0..n)
                .map(|i| {
                    let t = i as f64 / cfg.fs;
                    let env = 1.0 + 0.3 * (std::f64::consts::TAU * drift * t).sin();
                    let mut v = 0.0;
                    for ((f, _), (g, ph)) in rhythms.iter().zip(gains.iter().zip(&phases)) {
                        v += env * g * (std::f64::consts::TAU * f * t + ph).sin();
                    }
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    v + 0.5 * noise + 3.0 * (std::f64::consts::TAU * cfg.line_freq * t).sin()
                })
                .collect()
        })
        .collect();
    Recording::new(cfg.channels.clone(), cfg.fs, data, cfg.meta.clone())
}

/// Mixture of 2–3 signed Gaussian blobs over the head, evaluated at each
/// channel position.
pub fn spatial_pattern(channels: &[String], rng: &mut impl Rng) -> Vec<f64> {
    let layout = ElectrodeLayout::standard();
    let blobs: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(2..=3))
        .map(|_| {
            let r = rng.gen_range(0.0f64..0.9).sqrt();
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp = rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (r * a.cos(), r * a.sin(), rng.gen_range(0.3..0.6), amp)
        })
        .collect();
    channels
        .iter()
        .map(|name| {
            let (x, y) = layout.position(name).unwrap_or((0.0, 0.0));
            blobs
                .iter()
                .map(|(cx, cy, w, amp)| amp * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * w * w)).exp())
                .sum::<f64>()
        })
        .collect()
}

/// A 200 Hz segment `x_c(t) = s_c·cos(2π·10·(t − 1000)/200) + noise`, so
/// the median sample carries the spatial pattern.
pub fn pattern_segment(
    channels: &[String],
    pattern: &[f64],
    amplitude: f64,
    noise: f64,
    t_index: usize,
    rng: &mut impl Rng,
) -> Result<Segment> {
    let mid = SEGMENT_SAMPLES as f64 / 2.0;
    let data = pattern
        .iter()
        .map(|s| {
            (0..SEGMENT_SAMPLES)
                .map(|i| {
                    let phase = std::f64::consts::TAU * 10.0 * (i as f64 - mid) / TARGET_FS;
                    let n: f64 = StandardNormal.sample(rng);
                    amplitude * s * phase.cos() + noise * n
                })
                .collect()
        })
        .collect();
    let meta = SubjectMeta {
        subject_id: format!("P{t_index:04}"),
        dataset: "synthetic-align".into(),
        ..Default::default()
    };
    Segment::new(data, channels.to_vec(), t_index, meta)
}

/// `n` independent pattern segments over the 10-20 montage.
pub fn alignment_segments(n: usize, seed: u64) -> Result<Vec<Segment>> {
    let mut rng = crate::util::rng(seed);
    let channels = montage_1020();
    (0..n)
        .map(|i| {
            let pattern = spatial_pattern(&channels, &mut rng);
            pattern_segment(&channels, &pattern, 20.0, 0.5, i, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_sample_is_the_pattern() {
        let mut rng = crate::util::rng(1);
        let ch = montage_1020();
        let p = spatial_pattern(&ch, &mut rng);
        let seg = pattern_segment(&ch, &p, 1.0, 0.0, 0, &mut rng).unwrap();
        for (row, s) in seg.data.iter().zip(&p) {
            assert!((row[1000] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn recording_is_deterministic() {
        let cfg = SynthRecordingConfig { seconds: 2.0, ..Default::default() };
        assert_eq!(synthetic_recording(&cfg).unwrap(), synthetic_recording(&cfg).unwrap());
    }
}
