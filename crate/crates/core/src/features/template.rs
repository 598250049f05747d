//! Structured three-part feature template: event & clinical labels,
//! frequency band powers, spatial energy distribution.

use serde::{Deserialize, Serialize};

use crate::features::{Band, BandPowers, TierAssignment, TierLevel};
use crate::io::SubjectMeta;

pub const TEMPLATE_VERSION: &str = "template-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTemplate {
    pub event_text: String,
    pub band_powers: BandPowers,
    pub tiers: TierAssignment,
    pub rendered: String,
}

/// Event & clinical label sentence.
///
/// `This EEG segment[ from a {age}-year-old {sex} subject][ diagnosed with
/// {condition}] is recorded[ during {task}][ and contains annotated events:
/// {labels}].`
pub fn event_sentence(meta: &SubjectMeta) -> String {
    let mut s = String::from("This EEG segment");
    let subject = match (meta.age, meta.sex) {
        (Some(age), Some(sex)) => Some(format!("a {age}-year-old {} subject", sex.as_str())),
        (Some(age), None) => Some(format!("a {age}-year-old subject")),
        (None, Some(sex)) => Some(format!("a {} subject", sex.as_str())),
        (None, None) => None,
    };
    let condition = meta.condition.as_deref().filter(|c| !c.trim().is_empty());
    match (subject, condition) {
        (Some(subj), Some(cond)) => s.push_str(&format!(" from {subj} diagnosed with {cond}")),
        (Some(subj), None) => s.push_str(&format!(" from {subj}")),
        (None, Some(cond)) => s.push_str(&format!(" from a subject diagnosed with {cond}")),
        (None, None) => {}
    }
    s.push_str(" is recorded");
    if let Some(task) = meta.task.as_deref().filter(|t| !t.trim().is_empty()) {
        s.push_str(&format!(" during {task}"));
    }
    let mut labels: Vec<&str> = Vec::new();
    for ev in &meta.event_labels {
        if !labels.contains(&ev.label.as_str()) {
            labels.push(&ev.label);
        }
    }
    if !labels.is_empty() {
        s.push_str(&format!(" and contains annotated events: {}", labels.join(", ")));
    }
    s.push('.');
    s
}

pub fn band_line(bp: &BandPowers) -> String {
    let parts: Vec<String> = Band::ALL
        .iter()
        .map(|&b| format!("{} ({}): {:.4} μV²", b.name(), b.range_label(), bp.get(b)))
        .collect();
    format!("Frequency band powers: {}.", parts.join("; "))
}

pub fn spatial_line(tiers: &TierAssignment) -> String {
    let list = |names: &[String]| {
        if names.is_empty() {
            "none".to_string()
        } else {
            names.join(", ")
        }
    };
    let mut s = format!(
        "Highest-energy channel is {} ({:.4} μV²).",
        tiers.highest.channel, tiers.highest.power
    );
    for level in TierLevel::ALL {
        let title = match level {
            TierLevel::High => "High",
            TierLevel::Medium => "Medium",
            TierLevel::Low => "Low",
        };
        s.push_str(&format!(" {title}-energy channels: {}.", list(tiers.members(level))));
    }
    s
}

/// Renders the template; the three components are newline-separated.
pub fn build_template(meta: &SubjectMeta, bp: &BandPowers, tiers: &TierAssignment) -> FeatureTemplate {
    let event_text = event_sentence(meta);
    let rendered = [event_text.clone(), band_line(bp), spatial_line(tiers)].join("\n");
    FeatureTemplate {
        event_text,
        band_powers: *bp,
        tiers: tiers.clone(),
        rendered,
    }
}
