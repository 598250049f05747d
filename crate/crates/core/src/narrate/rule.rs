//! Deterministic rule narrator built from fixed phrase banks.

use serde::{Deserialize, Serialize};

use crate::features::{Band, FeatureTemplate, TierLevel};
use crate::narrate::trends::{band_index, Trend, TrendLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NarrativeSource {
    Rule,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Narrative {
    pub text: String,
    pub source: NarrativeSource,
    pub context_n: usize,
    /// Set when an external request failed and the rule narrator stood in.
    #[serde(default)]
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lobe {
    Frontal,
    Central,
    Temporal,
    Parietal,
    Occipital,
}

impl Lobe {
    pub fn name(self) -> &'static str {
        match self {
            Lobe::Frontal => "frontal",
            Lobe::Central => "central",
            Lobe::Temporal => "temporal",
            Lobe::Parietal => "parietal",
            Lobe::Occipital => "occipital",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Midline,
}

/// Lobe from the leading letter, side from the trailing digit parity
/// (odd left, even right) or a trailing `Z`.
pub fn region_of(channel: &str) -> Option<(Lobe, Side)> {
    let lobe = match channel.chars().next()? {
        'F' => Lobe::Frontal,
        'C' => Lobe::Central,
        'P' => Lobe::Parietal,
        'O' => Lobe::Occipital,
        'T' => Lobe::Temporal,
        _ => return None,
    };
    let last = channel.chars().last()?;
    let side = match last {
        'Z' => Side::Midline,
        d if d.is_ascii_digit() => {
            if d.to_digit(10)? % 2 == 1 {
                Side::Left
            } else {
                Side::Right
            }
        }
        _ => return None,
    };
    Some((lobe, side))
}

pub fn region_phrase(channel: &str) -> Option<String> {
    region_of(channel).map(|(lobe, side)| {
        let side = match side {
            Side::Left => "left hemisphere",
            Side::Right => "right hemisphere",
            Side::Midline => "midline",
        };
        format!("{}, {side}", lobe.name())
    })
}

fn trend_phrase(t: Trend, variant: usize) -> &'static str {
    let bank: &[&str] = match t {
        Trend::SignificantIncrease => &["shows a significant increase", "rises sharply"],
        Trend::NoticeableIncrease => &["shows a noticeable increase", "increases noticeably"],
        Trend::Stable => &["remains stable", "stays relatively stable"],
        Trend::ModerateDecrease => &["shows a moderate decrease", "decreases moderately"],
        Trend::SignificantDecrease => &["presents a significant decrease", "drops markedly"],
        Trend::ConsistentlyLow => &["remains consistently low", "stays consistently low"],
    };
    bank[variant % bank.len()]
}

fn join_list(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}

/// Turns `This EEG segment X is recorded Y.` into the narrative opening.
fn event_paragraph(event_text: &str) -> String {
    let body = event_text.trim().trim_end_matches('.');
    let Some(rest) = body.strip_prefix("This EEG segment") else {
        return event_text.trim().to_string();
    };
    let Some((subject, recorded)) = rest.split_once(" is recorded") else {
        return event_text.trim().to_string();
    };
    let recorded = if recorded.is_empty() { String::new() } else { format!(" recorded{recorded}") };
    format!(
        "In this EEG segment{subject}{recorded}, the observed patterns reflect ongoing neural dynamics across frequency bands and scalp regions."
    )
}

fn band_paragraph(tpl: &FeatureTemplate, trends: &TrendLabel) -> String {
    let dominant = tpl.band_powers.dominant();
    let mut sentences = vec![format!(
        "The {} frequency band ({}) exhibits the highest power and {}.",
        dominant.name(),
        dominant.range_label(),
        trend_phrase(trends.get(dominant), 0)
    )];
    for b in Band::ALL.into_iter().filter(|&b| b != dominant) {
        let mut name = b.name().to_string();
        name[..1].make_ascii_uppercase();
        sentences.push(format!(
            "{name} activity ({}) {}.",
            b.range_label(),
            trend_phrase(trends.get(b), band_index(b))
        ));
    }
    sentences.join(" ")
}

fn spatial_paragraph(tpl: &FeatureTemplate) -> String {
    let tiers = &tpl.tiers;
    let mut lobes: Vec<Lobe> = tiers.high.iter().filter_map(|c| region_of(c).map(|r| r.0)).collect();
    lobes.sort();
    lobes.dedup();
    let peak = &tiers.highest.channel;
    let peak_region = region_phrase(peak).map(|r| format!(" ({r})")).unwrap_or_default();
    let mut s = if lobes.is_empty() {
        format!("The EEG power peaks at the {peak} channel{peak_region}, which maintains the highest energy levels.")
    } else {
        let names: Vec<String> = lobes.iter().map(|l| l.name().to_string()).collect();
        format!(
            "The EEG power is predominantly concentrated in the {} regions, with the {peak} channel{peak_region} maintaining the highest energy levels.",
            join_list(&names)
        )
    };
    for level in TierLevel::ALL {
        let members = tiers.members(level);
        if members.is_empty() {
            s.push_str(&format!(" No channels fall in the {}-energy tier.", level.name()));
        } else {
            let mut title = level.name().to_string();
            title[..1].make_ascii_uppercase();
            s.push_str(&format!(" {title}-energy channels include {}.", members.join(", ")));
        }
    }
    s
}

/// Three paragraphs: event context, spectral dynamics, spatial energy.
pub fn narrate_rule(tpl: &FeatureTemplate, trends: &TrendLabel, context_n: usize) -> Narrative {
    let text = [
        event_paragraph(&tpl.event_text),
        band_paragraph(tpl, trends),
        spatial_paragraph(tpl),
    ]
    .join("\n\n");
    Narrative {
        text,
        source: NarrativeSource::Rule,
        context_n,
        fallback: false,
    }
}
