//! History-conditioned trend labels per frequency band.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Band, BandPowers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    SignificantIncrease,
    NoticeableIncrease,
    Stable,
    ModerateDecrease,
    SignificantDecrease,
    ConsistentlyLow,
}

impl Trend {
    pub const ALL: [Trend; 6] = [
        Trend::SignificantIncrease,
        Trend::NoticeableIncrease,
        Trend::Stable,
        Trend::ModerateDecrease,
        Trend::SignificantDecrease,
        Trend::ConsistentlyLow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Trend::SignificantIncrease => "significant_increase",
            Trend::NoticeableIncrease => "noticeable_increase",
            Trend::Stable => "stable",
            Trend::ModerateDecrease => "moderate_decrease",
            Trend::SignificantDecrease => "significant_decrease",
            Trend::ConsistentlyLow => "consistently_low",
        }
    }

    /// Direction recorded in `band_trend` facts.
    pub fn direction(self) -> &'static str {
        match self {
            Trend::SignificantIncrease | Trend::NoticeableIncrease => "increase",
            Trend::Stable => "stable",
            Trend::ModerateDecrease | Trend::SignificantDecrease => "decrease",
            Trend::ConsistentlyLow => "low",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrendConfig {
    /// `|r|` below this is stable.
    pub stable_below: f64,
    /// `|r|` at or above this is significant.
    pub significant_from: f64,
    /// Current power below this (μV²) is consistently low.
    pub low_floor: f64,
    pub eps: f64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            stable_below: 0.2,
            significant_from: 0.5,
            low_floor: 0.5,
            eps: 1e-12,
        }
    }
}

/// One label per band, in `Band::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendLabel(pub [Trend; 6]);

impl TrendLabel {
    pub fn get(&self, band: Band) -> Trend {
        self.0[band_index(band)]
    }

    pub fn set(&mut self, band: Band, t: Trend) {
        self.0[band_index(band)] = t;
    }
}

pub(crate) fn band_index(band: Band) -> usize {
    Band::ALL.iter().position(|&b| b == band).expect("band listed in ALL")
}

pub fn relative_change(history_mean: f64, current: f64, eps: f64) -> f64 {
    (current - history_mean) / history_mean.max(eps)
}

pub fn classify(history_mean: f64, current: f64, cfg: &TrendConfig) -> Trend {
    if current < cfg.low_floor {
        return Trend::ConsistentlyLow;
    }
    let r = relative_change(history_mean, current, cfg.eps);
    if r.abs() < cfg.stable_below {
        Trend::Stable
    } else if r.abs() < cfg.significant_from {
        if r > 0.0 {
            Trend::NoticeableIncrease
        } else {
            Trend::ModerateDecrease
        }
    } else if r > 0.0 {
        Trend::SignificantIncrease
    } else {
        Trend::SignificantDecrease
    }
}

pub fn infer_trends(history: &[BandPowers], current: &BandPowers) -> Result<TrendLabel> {
    infer_trends_with(history, current, &TrendConfig::default())
}

pub fn infer_trends_with(history: &[BandPowers], current: &BandPowers, cfg: &TrendConfig) -> Result<TrendLabel> {
    if history.is_empty() {
        return Err(Error::Config("trend inference needs at least one history segment".into()));
    }
    let mean = BandPowers::mean(history);
    let mut label = TrendLabel([Trend::Stable; 6]);
    for b in Band::ALL {
        label.set(b, classify(mean.get(b), current.get(b), cfg));
    }
    Ok(label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_table() {
        let c = TrendConfig::default();
        assert_eq!(classify(10.0, 5.0, &c), Trend::SignificantDecrease);
        assert_eq!(classify(10.0, 10.0, &c), Trend::Stable);
        assert_eq!(classify(10.0, 11.9, &c), Trend::Stable);
        assert_eq!(classify(10.0, 12.0, &c), Trend::NoticeableIncrease);
        assert_eq!(classify(10.0, 7.0, &c), Trend::ModerateDecrease);
        assert_eq!(classify(10.0, 15.0, &c), Trend::SignificantIncrease);
        assert_eq!(classify(0.08, 0.081, &c), Trend::ConsistentlyLow);
    }

    #[test]
    fn empty_history_rejected() {
        assert!(infer_trends(&[], &BandPowers::default()).is_err());
    }
}
