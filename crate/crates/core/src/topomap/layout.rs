use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STANDARD_LAYOUT_JSON: &str = include_str!("../../assets/layout_1010.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Electrode {
    pub name: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LayoutFile {
    version: String,
    projection: String,
    electrodes: Vec<Electrode>,
}

/// Electrode positions in the unit head disk: x to the right ear, y to the
/// nose, vertex at the origin.
#[derive(Debug, Clone)]
pub struct ElectrodeLayout {
    pub version: String,
    electrodes: Vec<Electrode>,
    index: HashMap<String, usize>,
}

impl ElectrodeLayout {
    /// The shipped 10-20/10-10 table (legacy T3/T4/T5/T6 naming).
    pub fn standard() -> &'static ElectrodeLayout {
        static LAYOUT: OnceLock<ElectrodeLayout> = OnceLock::new();
        LAYOUT.get_or_init(|| {
            ElectrodeLayout::from_json(STANDARD_LAYOUT_JSON).expect("bundled layout asset is valid")
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LayoutFile = serde_json::from_str(text)?;
        Self::new(file.version, file.electrodes)
    }

    pub fn new(version: impl Into<String>, electrodes: Vec<Electrode>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, e) in electrodes.iter().enumerate() {
            if e.x * e.x + e.y * e.y > 1.0 + 1e-5 {
                return Err(Error::Config(format!("electrode {} lies outside the head disk", e.name)));
            }
            if index.insert(e.name.clone(), i).is_some() {
                return Err(Error::Config(format!("electrode {} listed twice", e.name)));
            }
        }
        Ok(Self {
            version: version.into(),
            electrodes,
            index,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&LayoutFile {
            version: self.version.clone(),
            projection: "azimuthal-equidistant".into(),
            electrodes: self.electrodes.clone(),
        })?)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn position(&self, name: &str) -> Option<(f64, f64)> {
        self.index
            .get(name)
            .map(|&i| (self.electrodes[i].x, self.electrodes[i].y))
    }

    pub fn electrodes(&self) -> &[Electrode] {
        &self.electrodes
    }

    /// Layout-table rank of a channel, for ordering channel vocabularies.
    pub fn rank(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}
