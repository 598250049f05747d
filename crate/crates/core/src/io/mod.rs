//! Recording ingestion: EDF, the raw `.f32` + JSON sidecar format, and
//! channel-name harmonization onto the 10-20/10-10 nomenclature.

pub mod edf;
pub mod montage;
pub mod raw;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use edf::{parse_edf, write_edf, EdfSignalSpec};
pub use montage::{normalize_channel_name, normalize_channel_names};
pub use raw::{read_raw_matrix, write_raw_matrix, RawDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
    Other,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
            Sex::Other => "other",
        }
    }
}

/// One annotated interval. Onset and duration are in seconds from the
/// start of the recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLabel {
    pub onset: f64,
    pub duration: f64,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SubjectMeta {
    pub subject_id: String,
    #[serde(default)]
    pub age: Option<u32>,
    #[serde(default)]
    pub sex: Option<Sex>,
    #[serde(default)]
    pub condition: Option<String>,
    #[serde(default)]
    pub task: Option<String>,
    #[serde(default)]
    pub dataset: String,
    #[serde(default)]
    pub event_labels: Vec<EventLabel>,
}

impl SubjectMeta {
    pub fn validate(&self) -> Result<()> {
        for ev in &self.event_labels {
            if !(ev.onset.is_finite() && ev.onset >= 0.0) {
                return Err(Error::Invalid(format!("event onset {} is negative", ev.onset)));
            }
            if !(ev.duration.is_finite() && ev.duration >= 0.0) {
                return Err(Error::Invalid(format!(
                    "event duration {} is negative",
                    ev.duration
                )));
            }
        }
        Ok(())
    }

    /// Copy of the metadata keeping only the events that overlap
    /// `[start, end)` seconds.
    pub fn restricted_to(&self, start: f64, end: f64) -> SubjectMeta {
        let mut meta = self.clone();
        meta.event_labels.retain(|ev| {
            let ev_end = ev.onset + ev.duration;
            ev.onset < end && (ev_end > start || (ev.duration == 0.0 && ev.onset >= start))
        });
        meta
    }
}

/// A multichannel recording in microvolts, one row per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    channels: Vec<String>,
    fs: f64,
    data: Vec<Vec<f64>>,
    pub meta: SubjectMeta,
    /// Channels that are not part of the electrode layout (EKG, EMG,
    /// unknown labels). They are carried along so callers can exclude them.
    pub flagged: Vec<String>,
}

impl Recording {
    pub fn new(
        channels: Vec<String>,
        fs: f64,
        data: Vec<Vec<f64>>,
        meta: SubjectMeta,
    ) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::Invalid(format!("sampling rate {fs} must be positive")));
        }
        if channels.len() != data.len() {
            return Err(Error::Invalid(format!(
                "{} channel names for {} data rows",
                channels.len(),
                data.len()
            )));
        }
        if let Some(first) = data.first() {
            if data.iter().any(|row| row.len() != first.len()) {
                return Err(Error::Invalid("ragged channel rows".into()));
            }
        }
        if data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite sample".into()));
        }
        let mut seen = HashSet::new();
        for name in &channels {
            if !seen.insert(name.as_str()) {
                return Err(Error::Montage(format!("duplicate channel name {name}")));
            }
        }
        meta.validate()?;
        Ok(Self {
            channels,
            fs,
            data,
            meta,
            flagged: Vec::new(),
        })
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn data(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.fs
    }

    pub fn is_flagged(&self, name: &str) -> bool {
        self.flagged.iter().any(|f| f == name)
    }

    pub fn into_parts(self) -> (Vec<String>, f64, Vec<Vec<f64>>, SubjectMeta, Vec<String>) {
        (self.channels, self.fs, self.data, self.meta, self.flagged)
    }

    /// Rebuilds a recording with new samples and rate, keeping the channel
    /// list, metadata and flags.
    pub fn with_data(&self, fs: f64, data: Vec<Vec<f64>>) -> Result<Self> {
        let mut rec = Recording::new(self.channels.clone(), fs, data, self.meta.clone())?;
        rec.flagged = self.flagged.clone();
        Ok(rec)
    }
}
