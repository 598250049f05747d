//! Welch PSD and canonical band powers.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical EEG bands; intervals are half-open `[lo, hi)` Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Delta,
    Theta,
    Alpha,
    Beta,
    Gamma,
    HighGamma,
}

impl Band {
    pub const ALL: [Band; 6] = [
        Band::Delta,
        Band::Theta,
        Band::Alpha,
        Band::Beta,
        Band::Gamma,
        Band::HighGamma,
    ];

    pub fn range(self) -> (f64, f64) {
        match self {
            Band::Delta => (0.0, 4.0),
            Band::Theta => (4.0, 8.0),
            Band::Alpha => (8.0, 12.0),
            Band::Beta => (12.0, 30.0),
            Band::Gamma => (30.0, 50.0),
            Band::HighGamma => (50.0, 75.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Delta => "delta",
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Beta => "beta",
            Band::Gamma => "gamma",
            Band::HighGamma => "high-gamma",
        }
    }

    /// `"0--4 Hz"` style range label.
    pub fn range_label(self) -> String {
        let (lo, hi) = self.range();
        format!("{lo}--{hi} Hz")
    }

    pub fn from_name(name: &str) -> Option<Band> {
        Band::ALL.into_iter().find(|b| b.name() == name)
    }
}

/// Power per band in μV².
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BandPowers {
    pub delta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub high_gamma: f64,
}

impl BandPowers {
    pub fn get(&self, band: Band) -> f64 {
        match band {
            Band::Delta => self.delta,
            Band::Theta => self.theta,
            Band::Alpha => self.alpha,
            Band::Beta => self.beta,
            Band::Gamma => self.gamma,
            Band::HighGamma => self.high_gamma,
        }
    }

    pub fn set(&mut self, band: Band, value: f64) {
        match band {
            Band::Delta => self.delta = value,
            Band::Theta => self.theta = value,
            Band::Alpha => self.alpha = value,
            Band::Beta => self.beta = value,
            Band::Gamma => self.gamma = value,
            Band::HighGamma => self.high_gamma = value,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Band) -> f64) -> Self {
        let mut bp = BandPowers::default();
        for b in Band::ALL {
            bp.set(b, f(b));
        }
        bp
    }

    pub fn total(&self) -> f64 {
        Band::ALL.iter().map(|&b| self.get(b)).sum()
    }

    /// Band with the largest power; earlier bands win ties.
    pub fn dominant(&self) -> Band {
        Band::ALL
            .into_iter()
            .fold(Band::Delta, |best, b| if self.get(b) > self.get(best) { b } else { best })
    }

    pub fn mean(items: &[BandPowers]) -> BandPowers {
        let n = items.len().max(1) as f64;
        BandPowers::from_fn(|b| items.iter().map(|bp| bp.get(b)).sum::<f64>() / n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub density: Vec<f64>,
}

/// Welch estimate with a periodic Hann window; one-sided density in μV²/Hz.
pub fn welch_psd(x: &[f64], fs: f64, win: usize, overlap: usize) -> Result<Psd> {
    if win == 0 || win > x.len() {
        return Err(Error::Length(format!(
            "window of {win} samples exceeds signal of {} samples",
            x.len()
        )));
    }
    if overlap >= win {
        return Err(Error::Config(format!("overlap {overlap} must be below window {win}")));
    }
    let window: Vec<f64> = (0..win)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / win as f64).cos())
        .collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let step = win - overlap;
    let n_bins = win / 2 + 1;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(win);
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); win];
    let mut count = 0usize;
    let mut start = 0;
    while start + win <= x.len() {
        for (b, (&v, &w)) in buf.iter_mut().zip(x[start..start + win].iter().zip(&window)) {
            *b = Complex::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf[..n_bins]) {
            *a += c.norm_sqr();
        }
        count += 1;
        start += step;
    }

    let scale = 1.0 / (fs * win_power * count as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || (win % 2 == 0 && k == win / 2) { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    let freqs = (0..n_bins).map(|k| k as f64 * fs / win as f64).collect();
    Ok(Psd { freqs, density })
}

/// Integral of the piecewise-linear interpolant of `density` over
/// `[lo, hi)` (trapezoid rule with interpolated endpoints).
pub fn integrate(freqs: &[f64], density: &[f64], lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..freqs.len().saturating_sub(1) {
        let (f0, f1) = (freqs[i], freqs[i + 1]);
        let a = f0.max(lo);
        let b = f1.min(hi);
        if b <= a || f1 <= f0 {
            continue;
        }
        let at = |f: f64| density[i] + (density[i + 1] - density[i]) * (f - f0) / (f1 - f0);
        total += 0.5 * (at(a) + at(b)) * (b - a);
    }
    total
}

pub fn band_powers(psd: &Psd) -> BandPowers {
    BandPowers::from_fn(|b| {
        let (lo, hi) = b.range();
        integrate(&psd.freqs, &psd.density, lo, hi)
    })
}

/// Band powers of the channel-averaged PSD.
pub fn band_powers_stack(psds: &[Psd]) -> BandPowers {
    let Some(first) = psds.first() else {
        return BandPowers::default();
    };
    let n = psds.len() as f64;
    let mean: Vec<f64> = (0..first.density.len())
        .map(|k| psds.iter().map(|p| p.density[k]).sum::<f64>() / n)
        .collect();
    band_powers(&Psd {
        freqs: first.freqs.clone(),
        density: mean,
    })
}
