//! Rule-based fact extraction over controlled vocabularies.
//!
//! Slots: `event_label`, `dominant_band`, `band_trend:<band>`,
//! `tier:<level>` (value is a channel), `peak_channel`, `region`.

use std::collections::BTreeSet;

use crate::features::{Band, FeatureTemplate, TierLevel};
use crate::narrate::rule::region_of;
use crate::narrate::trends::TrendLabel;
use crate::text_eval::labels::{find_phrases, Lexicon};
use crate::topomap::ElectrodeLayout;

pub const FACT_SCHEMA_VERSION: &str = "facts-v1";

pub type FactSet = BTreeSet<(String, String)>;

pub fn fact(slot: impl Into<String>, value: impl Into<String>) -> (String, String) {
    (slot.into(), value.into())
}

/// Splits at `;`, newlines, sentence-final periods and the word "while".
pub fn clauses(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let boundary = match c {
            ';' | '\n' => true,
            '.' => chars.get(i + 1).map_or(true, |n| n.is_whitespace()),
            _ => false,
        };
        if boundary {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    out.push(cur);
    out.into_iter()
        .flat_map(|c| split_word(&c, "while"))
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty())
        .collect()
}

fn split_word(text: &str, word: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut cur = Vec::new();
    for tok in text.split_whitespace() {
        if tok.trim_matches(|c: char| !c.is_alphanumeric()).eq_ignore_ascii_case(word) {
            parts.push(cur.join(" "));
            cur.clear();
        } else {
            cur.push(tok);
        }
    }
    parts.push(cur.join(" "));
    parts
}

fn words(clause: &str) -> Vec<String> {
    clause
        .split(|c: char| c.is_whitespace() || matches!(c, ',' | '(' | ')' | ':' | '"' | '!' | '?'))
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric() && c != '-').to_string())
        .filter(|w| !w.is_empty())
        .collect()
}

fn bands_in(ws: &[String]) -> Vec<Band> {
    let mut out = Vec::new();
    for w in ws {
        if let Some(b) = Band::from_name(&w.to_lowercase()) {
            if !out.contains(&b) {
                out.push(b);
            }
        }
    }
    out
}

fn channels_in(ws: &[String]) -> Vec<String> {
    let layout = ElectrodeLayout::standard();
    let mut out = Vec::new();
    for w in ws {
        let is_upper = w.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit());
        if is_upper && layout.contains(w) && !out.contains(w) {
            out.push(w.clone());
        }
    }
    out
}

fn trend_in(lower: &str, ws: &[String]) -> Option<&'static str> {
    let has = |set: &[&str]| ws.iter().any(|w| set.contains(&w.to_lowercase().as_str()));
    if lower.contains("consistently low") || lower.contains("remains low") || lower.contains("stays low") {
        return Some("low");
    }
    let inc = has(&["increase", "increases", "increased", "increasing", "rise", "rises", "rising", "elevated", "buildup", "build-up", "enhanced", "enhancement"]);
    let dec = has(&["decrease", "decreases", "decreased", "decreasing", "drop", "drops", "decline", "declines", "attenuation", "attenuated", "reduced", "reduction", "suppressed"]);
    match (inc, dec) {
        (true, false) => Some("increase"),
        (false, true) => Some("decrease"),
        _ if has(&["stable", "stably", "unchanged", "steady"]) => Some("stable"),
        _ => None,
    }
}

fn lobe_word(w: &str) -> Option<&'static str> {
    let w = w.to_lowercase();
    let table = [
        ("prefrontal", "frontal"),
        ("frontal", "frontal"),
        ("fronto", "frontal"),
        ("central", "central"),
        ("centro", "central"),
        ("parietal", "parietal"),
        ("parieto", "parietal"),
        ("occipital", "occipital"),
        ("occipito", "occipital"),
        ("temporal", "temporal"),
        ("temporo", "temporal"),
    ];
    table.iter().find(|(k, _)| *k == w).map(|(_, v)| *v)
}

fn tier_in(lower: &str) -> Option<TierLevel> {
    [
        (TierLevel::High, ["high-energy", "high energy"]),
        (TierLevel::Medium, ["medium-energy", "medium energy"]),
        (TierLevel::Low, ["low-energy", "low energy"]),
    ]
    .into_iter()
    .find(|(_, keys)| keys.iter().any(|k| lower.contains(k)))
    .map(|(l, _)| l)
}

/// First paragraph: text before the first blank line, or the first line.
pub fn first_paragraph(text: &str) -> &str {
    let t = text.trim_start();
    let end = t.find("\n\n").or_else(|| t.find('\n')).unwrap_or(t.len());
    &t[..end]
}

pub fn extract_facts(text: &str) -> FactSet {
    extract_facts_with(text, Lexicon::standard())
}

pub fn extract_facts_with(text: &str, lexicon: &Lexicon) -> FactSet {
    let mut facts = FactSet::new();
    for phrase in find_phrases(first_paragraph(text), &lexicon.all_phrases()) {
        facts.insert(fact("event_label", phrase));
    }
    for clause in clauses(text) {
        let lower = clause.to_lowercase();
        let ws = words(&clause);
        let bands = bands_in(&ws);
        if lower.contains("highest power") || lower.contains("dominant") {
            if let Some(b) = bands.first() {
                facts.insert(fact("dominant_band", b.name()));
            }
        }
        if let Some(t) = trend_in(&lower, &ws) {
            for b in &bands {
                facts.insert(fact(format!("band_trend:{}", b.name()), t));
            }
        }
        let channels = channels_in(&ws);
        if lower.contains("highest energy") || lower.contains("highest-energy") {
            if let Some(c) = channels.first() {
                facts.insert(fact("peak_channel", c.clone()));
            }
        } else if let Some(level) = tier_in(&lower) {
            for c in &channels {
                facts.insert(fact(format!("tier:{}", level.name()), c.clone()));
            }
        }
        for w in &ws {
            for part in w.split('-') {
                if let Some(l) = lobe_word(part) {
                    facts.insert(fact("region", l));
                }
            }
        }
    }
    facts
}

/// Reference facts taken directly from a template's structure (and the
/// trend labels when known).
pub fn template_facts(tpl: &FeatureTemplate, trends: Option<&TrendLabel>) -> FactSet {
    let mut facts = FactSet::new();
    for phrase in find_phrases(first_paragraph(&tpl.event_text), &Lexicon::standard().all_phrases()) {
        facts.insert(fact("event_label", phrase));
    }
    facts.insert(fact("dominant_band", tpl.band_powers.dominant().name()));
    facts.insert(fact("peak_channel", tpl.tiers.highest.channel.clone()));
    for level in TierLevel::ALL {
        for c in tpl.tiers.members(level) {
            facts.insert(fact(format!("tier:{}", level.name()), c.clone()));
        }
    }
    for c in tpl.tiers.high.iter().chain(std::iter::once(&tpl.tiers.highest.channel)) {
        if let Some((lobe, _)) = region_of(c) {
            facts.insert(fact("region", lobe.name()));
        }
    }
    if let Some(tr) = trends {
        for b in Band::ALL {
            facts.insert(fact(format!("band_trend:{}", b.name()), tr.get(b).direction()));
        }
    }
    facts
}

/// Facts whose slot satisfies `keep`.
pub fn restrict(facts: &FactSet, keep: impl Fn(&str) -> bool) -> FactSet {
    facts.iter().filter(|(s, _)| keep(s)).cloned().collect()
}

pub fn fact_f1(pred: &FactSet, reference: &FactSet) -> f64 {
    match (pred.is_empty(), reference.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let inter = pred.intersection(reference).count() as f64;
    if inter == 0.0 {
        return 0.0;
    }
    let p = inter / pred.len() as f64;
    let r = inter / reference.len() as f64;
    2.0 * p * r / (p + r)
}
