//! Narrative evaluation: ROUGE-L, Fact-F1, event-label parsing with
//! balanced accuracy, and five-axis adjudication.

pub mod adjudicate;
pub mod facts;
pub mod labels;
pub mod rouge;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use adjudicate::{
    adjudicate_batch, adjudicate_external, adjudicate_facts, adjudicate_mock, histogram_csv, parse_judge_reply,
    AdjudicationScore, AdjudicationSource,
};
pub use facts::{extract_facts, fact, fact_f1, restrict, template_facts, FactSet, FACT_SCHEMA_VERSION};
pub use labels::{balanced_accuracy, find_phrases, parse_event_label, Lexicon};
pub use rouge::{rouge_l, tokenize};

/// One generated narrative with its reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalItem {
    pub dataset: String,
    pub prediction: String,
    pub reference: String,
    #[serde(default)]
    pub truth_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population standard deviation.
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetTextScores {
    pub dataset: String,
    pub n: usize,
    pub rouge_l: MeanStd,
    pub fact_f1: MeanStd,
    pub bertscore: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedAccuracyRow {
    pub dataset: String,
    pub n: usize,
    pub balanced_accuracy: f64,
    pub unparsed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fact_schema: String,
    pub lexicon_version: String,
    pub text_scores: Vec<DatasetTextScores>,
    pub balanced_accuracy: Vec<BalancedAccuracyRow>,
    pub adjudication: Vec<AdjudicationScore>,
}

/// Per-dataset ROUGE-L and Fact-F1, balanced accuracy where truth labels
/// and a dataset lexicon exist, and mock adjudication of every pair.
pub fn evaluate(items: &[EvalItem], lexicon: &Lexicon) -> Result<EvalReport> {
    let mut by_ds: BTreeMap<&str, Vec<&EvalItem>> = BTreeMap::new();
    for it in items {
        by_ds.entry(it.dataset.as_str()).or_default().push(it);
    }
    let mut text_scores = Vec::new();
    let mut ba_rows = Vec::new();
    for (ds, group) in &by_ds {
        let rouge: Vec<f64> = group.iter().map(|i| rouge_l(&i.prediction, &i.reference)).collect();
        let f1: Vec<f64> = group
            .iter()
            .map(|i| fact_f1(&facts::extract_facts_with(&i.prediction, lexicon), &facts::extract_facts_with(&i.reference, lexicon)))
            .collect();
        text_scores.push(DatasetTextScores {
            dataset: ds.to_string(),
            n: group.len(),
            rouge_l: MeanStd::of(&rouge),
            fact_f1: MeanStd::of(&f1),
            bertscore: "not computed".into(),
        });
        let labelled: Vec<&&EvalItem> = group.iter().filter(|i| i.truth_label.is_some()).collect();
        if let (Some(lex), false) = (lexicon.for_dataset(ds), labelled.is_empty()) {
            let preds: Vec<Option<String>> = labelled.iter().map(|i| parse_event_label(&i.prediction, lex)).collect();
            let truth: Vec<String> = labelled.iter().map(|i| i.truth_label.clone().unwrap_or_default()).collect();
            ba_rows.push(BalancedAccuracyRow {
                dataset: ds.to_string(),
                n: labelled.len(),
                balanced_accuracy: balanced_accuracy(&preds, &truth)?,
                unparsed: preds.iter().filter(|p| p.is_none()).count(),
            });
        }
    }
    let adjudication = items.iter().map(|i| adjudicate_mock(&i.prediction, &i.reference)).collect();
    Ok(EvalReport {
        fact_schema: FACT_SCHEMA_VERSION.into(),
        lexicon_version: lexicon.version.clone(),
        text_scores,
        balanced_accuracy: ba_rows,
        adjudication,
    })
}
