//! Structured quantitative scaffold: band powers, energy tiers and the
//! rendered template.

pub mod spectral;
pub mod template;
pub mod tiers;

use crate::error::{Error, Result};
use crate::signal::Segment;
use crate::topomap::ElectrodeLayout;

pub use spectral::{band_powers, band_powers_stack, integrate, welch_psd, Band, BandPowers, Psd};
pub use template::{build_template, event_sentence, FeatureTemplate, TEMPLATE_VERSION};
pub use tiers::{channel_energies, kmeans_1d, kmeans_tiers, Clustering, PeakChannel, TierAssignment, TierLevel};

/// Welch window and overlap (2 s Hann windows, 50 % overlap at 200 Hz).
pub const WELCH_WINDOW: usize = 400;
pub const WELCH_OVERLAP: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFeatures {
    pub band_powers: BandPowers,
    pub energies: Vec<(String, f64)>,
    pub tiers: TierAssignment,
    /// Set when the tiers come from the degenerate-input fallback.
    pub degenerate_tiers: bool,
}

/// Band powers (averaged over montage channels), channel energies and
/// tiers for one segment. Channels outside the electrode layout are skipped.
pub fn segment_features(seg: &Segment, fs: f64, seed: u64) -> Result<SegmentFeatures> {
    let layout = ElectrodeLayout::standard();
    let rows: Vec<(&String, &Vec<f64>)> = seg
        .channels
        .iter()
        .zip(&seg.data)
        .filter(|(name, _)| layout.contains(name))
        .collect();
    if rows.is_empty() {
        return Err(Error::Montage("segment has no montage channels".into()));
    }
    let psds = rows
        .iter()
        .map(|(_, row)| welch_psd(row, fs, WELCH_WINDOW, WELCH_OVERLAP))
        .collect::<Result<Vec<_>>>()?;
    let band_powers = band_powers_stack(&psds);
    let energies: Vec<(String, f64)> = channel_energies(seg)
        .into_iter()
        .filter(|(name, _)| layout.contains(name))
        .collect();
    let (tiers, degenerate_tiers) = match kmeans_tiers(&energies, 3, seed) {
        Ok(t) => (t, false),
        Err(Error::Degenerate { fallback, .. }) => (*fallback, true),
        Err(e) => return Err(e),
    };
    Ok(SegmentFeatures {
        band_powers,
        energies,
        tiers,
        degenerate_tiers,
    })
}
