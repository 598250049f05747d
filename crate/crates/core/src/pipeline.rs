//! End-to-end wiring shared by the command-line tool: recordings →
//! corpus → alignment checkpoint → retrieval and text reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::align::{train_pairs, AlignHyper, AlignModel, AlignPair, Checkpoint, ModelConfig, Square};
use crate::corpus::{
    load_segment, load_topomap, split_subjects, stratified_cap, CorpusEntry, CorpusManifest, CorpusWriter, Split,
    CORPUS_VERSION,
};
use crate::error::{Error, Result};
use crate::features::{build_template, segment_features, BandPowers, FeatureTemplate, SegmentFeatures, TEMPLATE_VERSION};
use crate::http::EndpointConfig;
use crate::io::{normalize_channel_names, parse_edf, raw, Recording};
use crate::narrate::{
    infer_trends_with, narrate_rule, refine_batch, ContextMeta, Narrative, TrendConfig, TrendLabel, INSTRUCTION, INSTRUCTION_VERSION,
};
use crate::retrieval::{evaluate_by_dataset, score_histogram_csv, similarity_csv, similarity_matrix, RetrievalReport};
use crate::signal::{preprocess, segment, Segment, SEGMENT_SECONDS, TARGET_FS};
use crate::text_eval::{evaluate, histogram_csv, EvalItem, EvalReport, Lexicon, FACT_SCHEMA_VERSION};
use crate::topomap::{render_topomap, ElectrodeLayout, DEFAULT_GRID};
use crate::util::write_atomic;

pub const CONFIG_SCHEMA: &str = "pipeline-config-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub schema: String,
    pub seed: u64,
    pub line_freq: f64,
    pub context_n: usize,
    pub test_fraction: f64,
    /// Cap on training-split entries; `None` keeps everything.
    pub train_cap: Option<usize>,
    /// Label → rank for capping; lower ranks are kept first.
    pub label_priority: BTreeMap<String, u32>,
    pub grid: usize,
    pub model: ModelConfig,
    pub hyper: AlignHyper,
    pub trends: TrendConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            schema: CONFIG_SCHEMA.into(),
            seed: 0,
            line_freq: 50.0,
            context_n: 1,
            test_fraction: 0.2,
            train_cap: None,
            label_priority: BTreeMap::new(),
            grid: DEFAULT_GRID,
            model: ModelConfig { d1: 64, d2: 64, hidden: 64, d: 64, ..ModelConfig::default() },
            hyper: AlignHyper::default(),
            trends: TrendConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_slice(&std::fs::read(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!("config schema {:?}, expected {CONFIG_SCHEMA:?}", self.schema)));
        }
        if !(1..=3).contains(&self.context_n) {
            return Err(Error::Config(format!("context_n {} outside 1..=3", self.context_n)));
        }
        if self.line_freq != 50.0 && self.line_freq != 60.0 {
            return Err(Error::Config(format!("line frequency {} must be 50 or 60", self.line_freq)));
        }
        Ok(())
    }

    fn model_for_grid(&self) -> ModelConfig {
        ModelConfig { image_h: self.grid, image_w: self.grid, ..self.model }
    }
}

/// EDF by extension, otherwise a raw `.f32` matrix with a JSON sidecar.
/// Channel names are normalized either way.
pub fn load_recording(path: &Path) -> Result<Recording> {
    let is_edf = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("edf"));
    let rec = if is_edf {
        parse_edf(&std::fs::read(path)?)?
    } else {
        let desc = raw::RawDescriptor::load(&raw::sidecar_path(path))?;
        raw::read_raw_matrix(path, &desc)?
    };
    normalize_channel_names(rec)
}

/// Preprocessed 10 s segments of a recording.
pub fn recording_segments(rec: &Recording, line_freq: f64) -> Result<Vec<Segment>> {
    let clean = preprocess(rec, line_freq)?;
    segment(&clean, SEGMENT_SECONDS)
}

fn subject_key(dataset: &str, subject: &str) -> String {
    format!("{dataset}/{subject}")
}

/// Everything a narrator needs for one segment with full history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrationItem {
    pub dataset: String,
    pub subject_id: String,
    pub t_index: usize,
    pub label: Option<String>,
    pub template: FeatureTemplate,
    pub trends: TrendLabel,
    pub context: ContextMeta,
}

/// Segments of one recording paired with their narration inputs. Segments
/// with fewer than `context_n` predecessors only serve as history.
pub fn recording_items(rec: &Recording, cfg: &PipelineConfig) -> Result<Vec<(Segment, NarrationItem)>> {
    let segs = recording_segments(rec, cfg.line_freq)?;
    let features = segs
        .iter()
        .map(|seg| segment_features(seg, TARGET_FS, cfg.seed))
        .collect::<Result<Vec<SegmentFeatures>>>()?;
    let n = cfg.context_n;
    let mut out = Vec::new();
    for (t, seg) in segs.into_iter().enumerate().skip(n) {
        let cur = &features[t];
        let history: Vec<BandPowers> = features[t - n..t].iter().map(|f| f.band_powers).collect();
        let trends = infer_trends_with(&history, &cur.band_powers, &cfg.trends)?;
        let item = NarrationItem {
            dataset: rec.meta.dataset.clone(),
            subject_id: rec.meta.subject_id.clone(),
            t_index: t,
            label: seg.meta.event_labels.first().map(|e| e.label.clone()),
            template: build_template(&seg.meta, &cur.band_powers, &cur.tiers),
            trends,
            context: ContextMeta {
                context_n: n,
                history_t_indices: (t - n..t).collect(),
                current_t_index: t,
                history_band_powers: history,
                instruction: INSTRUCTION.into(),
                instruction_version: INSTRUCTION_VERSION.into(),
            },
        };
        out.push((seg, item));
    }
    Ok(out)
}

/// Rule narratives, or external refinement when an endpoint is given.
pub fn narrate_items(items: &[NarrationItem], endpoint: Option<&EndpointConfig>) -> Result<Vec<Narrative>> {
    match endpoint {
        None => Ok(items
            .iter()
            .map(|i| narrate_rule(&i.template, &i.trends, i.context.context_n))
            .collect()),
        Some(ep) => {
            let batch: Vec<_> = items
                .iter()
                .map(|i| (i.template.clone(), i.trends, i.context.clone()))
                .collect();
            refine_batch(&batch, ep).into_iter().collect()
        }
    }
}

/// Builds a corpus under `root` from recordings.
pub fn build_corpus(recordings: &[Recording], root: &Path, cfg: &PipelineConfig) -> Result<Vec<CorpusEntry>> {
    cfg.validate()?;
    let layout = ElectrodeLayout::standard();
    let keys: Vec<String> = recordings
        .iter()
        .map(|r| subject_key(&r.meta.dataset, &r.meta.subject_id))
        .collect();
    let splits = split_subjects(&keys, cfg.test_fraction, cfg.seed)?;
    let mut writer = CorpusWriter::create(root)?;
    let mut renderer = None;
    for (rec, key) in recordings.iter().zip(&keys) {
        for (seg, item) in recording_items(rec, cfg)? {
            let narrative = narrate_rule(&item.template, &item.trends, cfg.context_n);
            let topo = render_topomap(&seg, layout, cfg.grid, cfg.grid)?;
            renderer.get_or_insert_with(|| topo.meta.clone());
            let segment_ref = writer.write_segment(&item.dataset, &item.subject_id, &seg)?;
            let topomap_ref = writer.write_topomap(&item.dataset, &item.subject_id, item.t_index, &topo.to_png()?, topo.meta.clone())?;
            writer.push(CorpusEntry {
                dataset: item.dataset,
                subject_id: item.subject_id,
                t_index: item.t_index,
                segment_ref,
                topomap_ref,
                history_t_indices: item.context.history_t_indices,
                template: item.template,
                narrative,
                split: splits[key],
                label: item.label,
            });
        }
    }
    if let Some(cap) = cfg.train_cap {
        let (train, test): (Vec<CorpusEntry>, Vec<CorpusEntry>) =
            std::mem::take(writer.entries_mut()).into_iter().partition(|e| e.split == Split::Train);
        let mut kept = stratified_cap(&train, |e| e.label.clone(), cap, &cfg.label_priority, cfg.seed)?;
        kept.extend(test);
        *writer.entries_mut() = kept;
    }
    let entries = writer.entries().to_vec();
    writer.finish(CorpusManifest {
        version: CORPUS_VERSION.into(),
        n_entries: entries.len(),
        seed: cfg.seed,
        line_freq: cfg.line_freq,
        context_n: cfg.context_n,
        test_fraction: cfg.test_fraction,
        renderer,
        template_version: TEMPLATE_VERSION.into(),
        lexicon_version: Lexicon::standard().version.clone(),
        fact_schema: FACT_SCHEMA_VERSION.into(),
        instruction_version: INSTRUCTION_VERSION.into(),
    })?;
    Ok(entries)
}

/// Layout-ordered channel vocabulary over the entries' montage channels.
pub fn channel_vocabulary(entries: &[CorpusEntry]) -> Vec<String> {
    let layout = ElectrodeLayout::standard();
    let mut names: Vec<String> = entries
        .iter()
        .flat_map(|e| e.segment_ref.channels.iter().cloned())
        .filter(|c| layout.contains(c))
        .collect();
    names.sort_by_key(|c| layout.rank(c));
    names.dedup();
    names
}

pub fn load_pairs(root: &Path, entries: &[CorpusEntry], model: &AlignModel) -> Result<Vec<AlignPair>> {
    entries
        .iter()
        .map(|e| {
            let seg = load_segment(root, e)?;
            let (rgb, w, h) = load_topomap(root, e)?;
            model.prepare_pair(&seg, &rgb, h, w)
        })
        .collect()
}

/// Trains on the corpus's training split.
pub fn train_from_corpus(root: &Path, entries: &[CorpusEntry], cfg: &PipelineConfig) -> Result<Checkpoint> {
    let train: Vec<CorpusEntry> = entries.iter().filter(|e| e.split == Split::Train).cloned().collect();
    if train.is_empty() {
        return Err(Error::Config("corpus has no training entries".into()));
    }
    let model = AlignModel::init(cfg.model_for_grid(), channel_vocabulary(&train), cfg.seed)?;
    let pairs = load_pairs(root, &train, &model)?;
    train_pairs(model, &pairs, &AlignHyper { seed: cfg.seed, ..cfg.hyper })
}

#[derive(Debug, Clone)]
pub struct RetrievalOutput {
    pub reports: Vec<RetrievalReport>,
    /// Overall-pool EEG × topomap similarities.
    pub similarity: Square,
}

/// Retrieval over the test split (all entries when it is empty).
pub fn eval_retrieval(root: &Path, entries: &[CorpusEntry], ck: &Checkpoint) -> Result<RetrievalOutput> {
    let test: Vec<CorpusEntry> = entries.iter().filter(|e| e.split == Split::Test).cloned().collect();
    let pool = if test.is_empty() { entries.to_vec() } else { test };
    let pairs = load_pairs(root, &pool, &ck.model)?;
    let ze = pairs.iter().map(|p| ck.model.embed_eeg_input(&p.eeg)).collect::<Result<Vec<_>>>()?;
    let zv = pairs.iter().map(|p| ck.model.embed_vis(&p.h_vis)).collect::<Result<Vec<_>>>()?;
    let datasets: Vec<String> = pool.iter().map(|e| e.dataset.clone()).collect();
    Ok(RetrievalOutput {
        reports: evaluate_by_dataset(&ze, &zv, &datasets)?,
        similarity: similarity_matrix(&ze, &zv)?,
    })
}

/// Narratives scored against their own templates.
pub fn eval_text_corpus(entries: &[CorpusEntry]) -> Result<EvalReport> {
    let items: Vec<EvalItem> = entries
        .iter()
        .map(|e| EvalItem {
            dataset: e.dataset.clone(),
            prediction: e.narrative.text.clone(),
            reference: e.template.rendered.clone(),
            truth_label: e.label.clone(),
        })
        .collect();
    evaluate(&items, Lexicon::standard())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)?;
    Ok(())
}

pub fn write_retrieval_outputs(dir: &Path, out: &RetrievalOutput) -> Result<()> {
    write_json(&dir.join("retrieval.json"), &out.reports)?;
    write_atomic(&dir.join("similarity.csv"), similarity_csv(&out.similarity).as_bytes())?;
    write_atomic(&dir.join("score_histogram.csv"), score_histogram_csv(&out.similarity, 40).as_bytes())?;
    Ok(())
}

pub fn write_text_outputs(dir: &Path, report: &EvalReport) -> Result<()> {
    write_json(&dir.join("text_eval.json"), report)?;
    write_atomic(&dir.join("adjudication_histogram.csv"), histogram_csv(&report.adjudication).as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PipelinePaths {
    pub corpus: PathBuf,
    pub checkpoint: PathBuf,
    pub reports: PathBuf,
}

impl PipelinePaths {
    pub fn under(out: &Path) -> Self {
        Self {
            corpus: out.join("corpus"),
            checkpoint: out.join("checkpoint"),
            reports: out.join("reports"),
        }
    }
}

/// Corpus, checkpoint and reports for a set of recordings.
pub fn run_pipeline(recordings: &[Recording], out: &Path, cfg: &PipelineConfig) -> Result<PipelinePaths> {
    let paths = PipelinePaths::under(out);
    let entries = build_corpus(recordings, &paths.corpus, cfg)?;
    let ck = train_from_corpus(&paths.corpus, &entries, cfg)?;
    ck.save(&paths.checkpoint)?;
    let retrieval = eval_retrieval(&paths.corpus, &entries, &ck)?;
    write_retrieval_outputs(&paths.reports, &retrieval)?;
    write_text_outputs(&paths.reports, &eval_text_corpus(&entries)?)?;
    Ok(paths)
}
