//! Five-axis adjudication: an external structured judge, and a
//! deterministic mock comparing fact sets axis by axis.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::http::{post_chat, run_bounded, EndpointConfig};
use crate::narrate::Narrative;
use crate::text_eval::facts::{extract_facts, restrict, FactSet};

pub const AXES: [&str; 5] = ["event", "localization", "dominant_band", "trend", "non_dominant"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjudicationSource {
    Mock,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjudicationScore {
    pub event: bool,
    pub localization: bool,
    pub dominant_band: bool,
    pub trend: bool,
    pub non_dominant: bool,
    pub total: u8,
    pub source: AdjudicationSource,
    /// Set when the external judge was unreachable and the mock scored.
    #[serde(default)]
    pub fallback: bool,
}

impl AdjudicationScore {
    pub fn new(axes: [bool; 5], source: AdjudicationSource) -> Self {
        Self {
            event: axes[0],
            localization: axes[1],
            dominant_band: axes[2],
            trend: axes[3],
            non_dominant: axes[4],
            total: axes.iter().filter(|&&a| a).count() as u8,
            source,
            fallback: false,
        }
    }
}

fn values(facts: &FactSet, slot: &str) -> FactSet {
    restrict(facts, |s| s == slot)
}

pub fn adjudicate_facts(pred: &FactSet, reference: &FactSet) -> AdjudicationScore {
    let same = |keep: &dyn Fn(&str) -> bool| restrict(pred, keep) == restrict(reference, keep);
    let dominant: Vec<String> = values(reference, "dominant_band").into_iter().map(|(_, v)| v).collect();
    let dom_slots: Vec<String> = dominant.iter().map(|d| format!("band_trend:{d}")).collect();
    let axes = [
        same(&|s| s == "event_label"),
        same(&|s| s == "region" || s == "peak_channel"),
        same(&|s| s == "dominant_band"),
        same(&|s| dom_slots.iter().any(|d| d == s)),
        same(&|s| s.starts_with("band_trend:") && !dom_slots.iter().any(|d| d == s)),
    ];
    AdjudicationScore::new(axes, AdjudicationSource::Mock)
}

pub fn adjudicate_mock(pred: &str, reference: &str) -> AdjudicationScore {
    adjudicate_facts(&extract_facts(pred), &extract_facts(reference))
}

const JUDGE_PROMPT: &str = "You are auditing a generated EEG narrative against a reference narrative. Answer with a JSON object holding five booleans: \"event\" (clinical event and labels identified correctly), \"localization\" (spatial energy localized to the same regions and peak channel), \"dominant_band\" (same dominant frequency band), \"trend\" (same trend for the dominant band), \"non_dominant\" (non-dominant band trends described correctly). Output only the JSON object.";

pub fn judge_request(pred: &str, reference: &str) -> String {
    format!("Reference narrative:\n{reference}\n\nGenerated narrative:\n{pred}")
}

/// Parses the judge's JSON reply, tolerating a surrounding code fence.
pub fn parse_judge_reply(text: &str) -> Result<AdjudicationScore> {
    let t = text.trim();
    let t = t
        .strip_prefix("```json")
        .or_else(|| t.strip_prefix("```"))
        .map(|s| s.trim_end().trim_end_matches("```"))
        .unwrap_or(t);
    let v: Value = serde_json::from_str(t.trim()).map_err(|e| Error::Protocol(format!("judge reply is not JSON: {e}")))?;
    let mut axes = [false; 5];
    for (slot, name) in axes.iter_mut().zip(AXES) {
        *slot = v
            .get(name)
            .and_then(Value::as_bool)
            .ok_or_else(|| Error::Protocol(format!("judge reply lacks boolean \"{name}\"")))?;
    }
    Ok(AdjudicationScore::new(axes, AdjudicationSource::External))
}

pub fn adjudicate_external(pred: &Narrative, reference: &Narrative, endpoint: &EndpointConfig) -> Result<AdjudicationScore> {
    match post_chat(endpoint, JUDGE_PROMPT, &judge_request(&pred.text, &reference.text)) {
        Ok(reply) => parse_judge_reply(&reply),
        Err(Error::Transport(msg)) => {
            log::warn!("external judge unavailable ({msg}); scoring with the mock");
            let mut s = adjudicate_mock(&pred.text, &reference.text);
            s.fallback = true;
            Ok(s)
        }
        Err(e) => Err(e),
    }
}

pub fn adjudicate_batch(pairs: &[(Narrative, Narrative)], endpoint: &EndpointConfig) -> Vec<Result<AdjudicationScore>> {
    run_bounded(pairs, endpoint.max_in_flight, |(p, r)| adjudicate_external(p, r, endpoint))
}

/// `score,count` rows for totals 0..=5.
pub fn histogram_csv(scores: &[AdjudicationScore]) -> String {
    let mut counts = [0usize; 6];
    for s in scores {
        counts[s.total as usize] += 1;
    }
    let mut out = String::from("score,count\n");
    for (k, c) in counts.iter().enumerate() {
        out.push_str(&format!("{k},{c}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text_eval::facts::fact;

    fn reference() -> FactSet {
        FactSet::from([
            fact("event_label", "seizure"),
            fact("region", "frontal"),
            fact("peak_channel", "F3"),
            fact("dominant_band", "delta"),
            fact("band_trend:delta", "increase"),
            fact("band_trend:alpha", "decrease"),
        ])
    }

    #[test]
    fn identical_scores_five() {
        assert_eq!(adjudicate_facts(&reference(), &reference()).total, 5);
    }

    #[test]
    fn missing_region_costs_localization() {
        let pred = restrict(&reference(), |s| s != "region");
        let s = adjudicate_facts(&pred, &reference());
        assert!(!s.localization);
        assert_eq!(s.total, 4);
    }

    #[test]
    fn judge_reply_parsing() {
        let s = parse_judge_reply("```json\n{\"event\":true,\"localization\":false,\"dominant_band\":true,\"trend\":true,\"non_dominant\":false}\n```").unwrap();
        assert_eq!(s.total, 3);
        assert!(matches!(parse_judge_reply("{\"event\":true}"), Err(Error::Protocol(_))));
    }
}
