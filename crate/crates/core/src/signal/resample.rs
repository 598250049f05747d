//! Rational polyphase resampling.

use crate::error::{Error, Result};
use crate::signal::fir::lowpass_taps;

const MAX_DENOMINATOR: u64 = 1000;
/// Anti-alias kernel half-length, in multiples of max(L, M) up-rate samples.
const HALF_WIDTH_FACTOR: usize = 32;

/// Smallest `(up, down)` with `up / down == fs_out / fs_in` and
/// `down <= 1000`.
pub fn rational_ratio(fs_in: f64, fs_out: f64) -> Result<(usize, usize)> {
    if !(fs_in > 0.0 && fs_out > 0.0 && fs_in.is_finite() && fs_out.is_finite()) {
        return Err(Error::Config(format!(
            "sampling rates must be positive (got {fs_in} → {fs_out})"
        )));
    }
    let ratio = fs_out / fs_in;
    for down in 1..=MAX_DENOMINATOR {
        let up = (ratio * down as f64).round();
        if up >= 1.0 && ((up / down as f64) - ratio).abs() <= 1e-9 * ratio {
            return Ok((up as usize, down as usize));
        }
    }
    Err(Error::Unsupported(format!(
        "resampling ratio {fs_out}/{fs_in} has no rational form with denominator ≤ {MAX_DENOMINATOR}"
    )))
}

/// Output length `round(len × fs_out / fs_in)`.
pub fn resampled_len(len: usize, up: usize, down: usize) -> usize {
    ((len as u128 * up as u128 * 2 + down as u128) / (2 * down as u128)) as usize
}

/// Upsample by L, low-pass at min(fs_in, fs_out)/2, downsample by M. The
/// anti-alias kernel is centered so the output is not delayed.
pub fn resample(x: &[f64], fs_in: f64, fs_out: f64) -> Result<Vec<f64>> {
    let (up, down) = rational_ratio(fs_in, fs_out)?;
    if up == down {
        return Ok(x.to_vec());
    }
    let out_len = resampled_len(x.len(), up, down);
    let up_fs = fs_in * up as f64;
    let cutoff = fs_in.min(fs_out) / 2.0;
    let half = HALF_WIDTH_FACTOR * up.max(down);
    let taps: Vec<f64> = lowpass_taps(cutoff, up_fs, 2 * half + 1)
        .into_iter()
        .map(|h| h * up as f64)
        .collect();

    let n_in = x.len() as i64;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        // Up-rate position of output sample n, shifted by the kernel center.
        let base = (n * down + half) as i64;
        let mut k = (base % up as i64) as usize;
        let mut acc = 0.0;
        while k < taps.len() {
            let j = (base - k as i64) / up as i64;
            if j >= 0 && j < n_in {
                acc += taps[k] * x[j as usize];
            }
            k += up;
        }
        out.push(acc);
    }
    Ok(out)
}
