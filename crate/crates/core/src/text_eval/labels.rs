//! Event-label parsing with per-dataset lexicons, and balanced accuracy.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STANDARD_LEXICON_JSON: &str = include_str!("../../assets/event_lexicon.json");

/// Phrase → label maps keyed by dataset name. Phrases are lowercase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub version: String,
    pub datasets: BTreeMap<String, BTreeMap<String, String>>,
}

impl Lexicon {
    pub fn standard() -> &'static Lexicon {
        static LEX: OnceLock<Lexicon> = OnceLock::new();
        LEX.get_or_init(|| Lexicon::from_json(STANDARD_LEXICON_JSON).expect("bundled lexicon is valid"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut lex: Lexicon = serde_json::from_str(text)?;
        for map in lex.datasets.values_mut() {
            *map = std::mem::take(map).into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect();
        }
        Ok(lex)
    }

    pub fn for_dataset(&self, dataset: &str) -> Option<&BTreeMap<String, String>> {
        self.datasets.get(dataset)
    }

    /// Every phrase across datasets, deduplicated.
    pub fn all_phrases(&self) -> Vec<String> {
        let mut v: Vec<String> = self.datasets.values().flat_map(|m| m.keys().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Non-overlapping phrase occurrences at word boundaries, scanning left to
/// right and taking the longest phrase at each position.
pub fn find_phrases(text: &str, phrases: &[String]) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut sorted: Vec<&String> = phrases.iter().filter(|p| !p.is_empty()).collect();
    sorted.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut found = Vec::new();
    let mut i = 0;
    while i < lower.len() {
        if !lower.is_char_boundary(i) {
            i += 1;
            continue;
        }
        let at_start = lower[..i].chars().next_back().map_or(true, |c| !is_word_char(c));
        let mut advanced = false;
        if at_start {
            for p in &sorted {
                if lower[i..].starts_with(p.as_str()) {
                    let end = i + p.len();
                    let at_end = lower[end..].chars().next().map_or(true, |c| !is_word_char(c));
                    if at_end {
                        found.push(p.to_string());
                        i = end;
                        advanced = true;
                        break;
                    }
                }
            }
        }
        if !advanced {
            i += 1;
        }
    }
    found
}

/// Label of the longest lexicon phrase found in the first paragraph.
pub fn parse_event_label(text: &str, lexicon: &BTreeMap<String, String>) -> Option<String> {
    let phrases: Vec<String> = lexicon.keys().cloned().collect();
    let para = crate::text_eval::facts::first_paragraph(text);
    find_phrases(para, &phrases)
        .into_iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b.cmp(a)))
        .and_then(|p| lexicon.get(&p).cloned())
}

/// Mean per-class recall over the classes present in `truth`, in percent.
/// Unparsed predictions count as wrong.
pub fn balanced_accuracy(preds: &[Option<String>], truth: &[String]) -> Result<f64> {
    if preds.len() != truth.len() {
        return Err(Error::Config(format!("{} predictions for {} labels", preds.len(), truth.len())));
    }
    if truth.is_empty() {
        return Err(Error::Config("balanced accuracy of an empty set".into()));
    }
    let mut per_class: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (p, t) in preds.iter().zip(truth) {
        let e = per_class.entry(t.as_str()).or_default();
        e.1 += 1;
        if p.as_deref() == Some(t.as_str()) {
            e.0 += 1;
        }
    }
    let sum: f64 = per_class.values().map(|(hit, n)| *hit as f64 / *n as f64).sum();
    Ok(100.0 * sum / per_class.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_example() {
        let lex = Lexicon::standard().for_dataset("Workload").unwrap();
        assert_eq!(
            parse_event_label("This EEG segment is recorded during a mental arithmetic task with cognitive load.", lex).as_deref(),
            Some("mental arithmetic")
        );
        assert_eq!(parse_event_label("anything", &BTreeMap::new()), None);
    }

    #[test]
    fn longest_match_and_boundaries() {
        let lex = Lexicon::standard().for_dataset("TUEP").unwrap();
        assert_eq!(parse_event_label("subject with no epilepsy history", lex).as_deref(), Some("no_epilepsy"));
        let lex = Lexicon::standard().for_dataset("TUAB").unwrap();
        assert_eq!(parse_event_label("an abnormal recording", lex).as_deref(), Some("abnormal"));
    }

    #[test]
    fn only_first_paragraph() {
        let lex = Lexicon::standard().for_dataset("TUSZ").unwrap();
        assert_eq!(parse_event_label("Calm recording.\n\nNo seizure here.", lex), None);
    }

    #[test]
    fn balanced_accuracy_cases() {
        let t: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        let perfect: Vec<Option<String>> = t.iter().cloned().map(Some).collect();
        assert_eq!(balanced_accuracy(&perfect, &t).unwrap(), 100.0);
        let one = vec![Some("a".to_string()); 4];
        assert_eq!(balanced_accuracy(&one, &t).unwrap(), 50.0);
        assert!(balanced_accuracy(&one[..3], &t).is_err());
    }
}
