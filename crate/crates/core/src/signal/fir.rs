//! Windowed-sinc FIR design and zero-phase application.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Bandpass,
    Notch,
    Lowpass,
}

/// Linear-phase FIR kernel: odd length, symmetric taps.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterKernel {
    pub taps: Vec<f64>,
    pub fs: f64,
    pub kind: FilterKind,
}

impl FilterKernel {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// |H(f)| evaluated directly from the taps.
    pub fn magnitude_at(&self, freq: f64) -> f64 {
        let w = 2.0 * PI * freq / self.fs;
        let (re, im) = self
            .taps
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (n, &h)| {
                let (s, c) = (w * n as f64).sin_cos();
                (re + h * c, im - h * s)
            });
        re.hypot(im)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,tap\n");
        for (i, t) in self.taps.iter().enumerate() {
            out.push_str(&format!("{i},{t:.17e}\n"));
        }
        out
    }
}

fn hamming(n: usize, len: usize) -> f64 {
    0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Hamming-windowed ideal low-pass with cutoff `fc` (−6 dB point).
pub(crate) fn lowpass_taps(fc: f64, fs: f64, taps: usize) -> Vec<f64> {
    let m = (taps - 1) as f64 / 2.0;
    let nyq_frac = 2.0 * fc / fs;
    (0..taps)
        .map(|n| nyq_frac * sinc(nyq_frac * (n as f64 - m)) * hamming(n, taps))
        .collect()
}

fn check_taps(taps: usize) -> Result<()> {
    if taps < 3 || taps % 2 == 0 {
        return Err(Error::Design(format!("tap count {taps} must be odd and at least 3")));
    }
    Ok(())
}

pub fn design_bandpass_fir(low: f64, high: f64, fs: f64, taps: usize) -> Result<FilterKernel> {
    check_taps(taps)?;
    if !(fs > 0.0 && low > 0.0 && low < high && high < fs / 2.0) {
        return Err(Error::Design(format!(
            "band edges {low}–{high} Hz invalid for fs={fs} Hz (need 0 < low < high < fs/2)"
        )));
    }
    let hi = lowpass_taps(high, fs, taps);
    let lo = lowpass_taps(low, fs, taps);
    Ok(FilterKernel {
        taps: hi.iter().zip(&lo).map(|(h, l)| h - l).collect(),
        fs,
        kind: FilterKind::Bandpass,
    })
}

/// Band-stop kernel removing `freq ± bandwidth/2`.
pub fn design_notch(freq: f64, fs: f64, bandwidth: f64, taps: usize) -> Result<FilterKernel> {
    check_taps(taps)?;
    let half = bandwidth / 2.0;
    if !(fs > 0.0 && bandwidth > 0.0 && freq - half > 0.0 && freq + half < fs / 2.0) {
        return Err(Error::Design(format!(
            "notch at {freq} Hz (bandwidth {bandwidth} Hz) invalid for fs={fs} Hz"
        )));
    }
    let hi = lowpass_taps(freq + half, fs, taps);
    let lo = lowpass_taps(freq - half, fs, taps);
    let center = (taps - 1) / 2;
    let taps = hi
        .iter()
        .zip(&lo)
        .enumerate()
        .map(|(n, (h, l))| if n == center { 1.0 } else { 0.0 } - (h - l))
        .collect();
    Ok(FilterKernel {
        taps,
        fs,
        kind: FilterKind::Notch,
    })
}

/// Full linear convolution via FFT; length `a.len() + b.len() - 1`.
pub(crate) fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let pad = |x: &[f64]| {
        let mut v: Vec<Complex<f64>> = x.iter().map(|&r| Complex::new(r, 0.0)).collect();
        v.resize(n, Complex::new(0.0, 0.0));
        v
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / n as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Causal FIR filtering (first `x.len()` samples of the full convolution).
fn lfilter(taps: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = fft_convolve(x, taps);
    y.truncate(x.len());
    y
}

/// Forward-backward filtering with reflect padding of `taps - 1` samples on
/// each side. Output has the input's length and zero net phase.
pub fn filtfilt(x: &[f64], kernel: &FilterKernel) -> Result<Vec<f64>> {
    let taps = kernel.len();
    if x.len() <= 3 * taps {
        return Err(Error::Length(format!(
            "signal of {} samples too short for a {taps}-tap zero-phase filter (need > {})",
            x.len(),
            3 * taps
        )));
    }
    let pad = taps - 1;
    let n = x.len();
    let mut padded = Vec::with_capacity(n + 2 * pad);
    padded.extend((1..=pad).rev().map(|i| x[i]));
    padded.extend_from_slice(x);
    padded.extend((1..=pad).map(|i| x[n - 1 - i]));

    let mut y = lfilter(&kernel.taps, &padded);
    y.reverse();
    let mut y = lfilter(&kernel.taps, &y);
    y.reverse();
    Ok(y[pad..pad + n].to_vec())
}
