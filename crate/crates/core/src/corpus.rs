//! Corpus directory: `corpus.jsonl`, content-hashed segment and topomap
//! blobs, `manifest.json`, subject-disjoint splits and stratified capping.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureTemplate;
use crate::io::raw::{decode_f32le, encode_f32le};
use crate::narrate::Narrative;
use crate::signal::Segment;
use crate::topomap::RendererMeta;
use crate::util::{sha256_hex, write_atomic};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOCK_FILE: &str = ".lock";
pub const CORPUS_VERSION: &str = "corpus-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRef {
    /// Relative to the corpus root.
    pub path: String,
    pub sha256: String,
    pub channels: Vec<String>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopomapRef {
    pub path: String,
    pub sha256: String,
    pub renderer: RendererMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub dataset: String,
    pub subject_id: String,
    pub t_index: usize,
    pub segment_ref: SegmentRef,
    pub topomap_ref: TopomapRef,
    pub history_t_indices: Vec<usize>,
    pub template: FeatureTemplate,
    pub narrative: Narrative,
    pub split: Split,
    /// Event label used for stratification and balanced accuracy.
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub version: String,
    pub n_entries: usize,
    pub seed: u64,
    pub line_freq: f64,
    pub context_n: usize,
    pub test_fraction: f64,
    pub renderer: Option<RendererMeta>,
    pub template_version: String,
    pub lexicon_version: String,
    pub fact_schema: String,
    pub instruction_version: String,
}

fn safe_component(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn segment_path(dataset: &str, subject: &str, t_index: usize) -> String {
    format!("segments/{}/{}/{t_index}.f32", safe_component(dataset), safe_component(subject))
}

pub fn topomap_path(dataset: &str, subject: &str, t_index: usize) -> String {
    format!("topomaps/{}/{}/{t_index}.png", safe_component(dataset), safe_component(subject))
}

/// Exclusive writer over a corpus directory, held through a lock file.
pub struct CorpusWriter {
    root: PathBuf,
    lock: PathBuf,
    entries: Vec<CorpusEntry>,
}

impl CorpusWriter {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        let lock = root.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(Error::Config(format!("corpus {} is locked by another writer", root.display())));
            }
            Err(e) => return Err(e.into()),
        }
        Ok(Self { root: root.to_path_buf(), lock, entries: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_segment(&self, dataset: &str, subject: &str, seg: &Segment) -> Result<SegmentRef> {
        let rel = segment_path(dataset, subject, seg.t_index);
        let flat: Vec<f64> = seg.data.iter().flatten().copied().collect();
        let bytes = encode_f32le(&flat);
        write_atomic(&self.root.join(&rel), &bytes)?;
        Ok(SegmentRef {
            path: rel,
            sha256: sha256_hex(&bytes),
            channels: seg.channels.clone(),
            n_samples: seg.n_samples(),
        })
    }

    pub fn write_topomap(&self, dataset: &str, subject: &str, t_index: usize, png: &[u8], renderer: RendererMeta) -> Result<TopomapRef> {
        let rel = topomap_path(dataset, subject, t_index);
        write_atomic(&self.root.join(&rel), png)?;
        Ok(TopomapRef { path: rel, sha256: sha256_hex(png), renderer })
    }

    pub fn push(&mut self, entry: CorpusEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Vec<CorpusEntry> {
        &mut self.entries
    }

    /// Writes the JSONL and manifest, then releases the lock.
    pub fn finish(self, mut manifest: CorpusManifest) -> Result<()> {
        check_disjoint(&self.entries)?;
        manifest.n_entries = self.entries.len();
        write_corpus(&self.root, &self.entries)?;
        write_atomic(&self.root.join(MANIFEST_FILE), &serde_json::to_vec_pretty(&manifest)?)?;
        Ok(())
    }
}

impl Drop for CorpusWriter {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

pub fn to_jsonl(entries: &[CorpusEntry]) -> Result<String> {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_corpus(root: &Path, entries: &[CorpusEntry]) -> Result<()> {
    write_atomic(&root.join(CORPUS_FILE), to_jsonl(entries)?.as_bytes())?;
    Ok(())
}

pub fn parse_jsonl(text: &str) -> Result<Vec<CorpusEntry>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Line { line: i + 1, msg: e.to_string() }))
        .collect()
}

fn verify_blob(root: &Path, path: &str, sha: &str) -> Result<Vec<u8>> {
    let bytes = fs::read(root.join(path))?;
    if sha256_hex(&bytes) != sha {
        return Err(Error::Integrity(format!("hash mismatch for {path}")));
    }
    Ok(bytes)
}

pub fn check_disjoint(entries: &[CorpusEntry]) -> Result<()> {
    let mut split_of: BTreeMap<(&str, &str), Split> = BTreeMap::new();
    for e in entries {
        let key = (e.dataset.as_str(), e.subject_id.as_str());
        if let Some(prev) = split_of.insert(key, e.split) {
            if prev != e.split {
                return Err(Error::Integrity(format!(
                    "subject {} of {} appears in both splits",
                    e.subject_id, e.dataset
                )));
            }
        }
    }
    Ok(())
}

fn check_history(e: &CorpusEntry) -> Result<()> {
    let n = e.history_t_indices.len();
    let ok = e.t_index >= n && e.history_t_indices.iter().enumerate().all(|(k, &t)| t == e.t_index - n + k);
    if !ok {
        return Err(Error::Integrity(format!(
            "entry {}/{}/{} has non-contiguous history {:?}",
            e.dataset, e.subject_id, e.t_index, e.history_t_indices
        )));
    }
    Ok(())
}

/// Reads `corpus.jsonl`, verifying every blob hash, history contiguity and
/// subject-disjointness of the splits.
pub fn read_corpus(root: &Path) -> Result<Vec<CorpusEntry>> {
    let text = fs::read_to_string(root.join(CORPUS_FILE))?;
    let entries = parse_jsonl(&text)?;
    for e in &entries {
        verify_blob(root, &e.segment_ref.path, &e.segment_ref.sha256)?;
        verify_blob(root, &e.topomap_ref.path, &e.topomap_ref.sha256)?;
        check_history(e)?;
    }
    check_disjoint(&entries)?;
    Ok(entries)
}

pub fn read_manifest(root: &Path) -> Result<CorpusManifest> {
    Ok(serde_json::from_slice(&fs::read(root.join(MANIFEST_FILE))?)?)
}

pub fn load_segment(root: &Path, e: &CorpusEntry) -> Result<Segment> {
    let r = &e.segment_ref;
    let bytes = verify_blob(root, &r.path, &r.sha256)?;
    let flat: Vec<f64> = decode_f32le(&bytes).into_iter().map(f64::from).collect();
    if r.n_samples == 0 || flat.len() != r.channels.len() * r.n_samples {
        return Err(Error::Integrity(format!("{} holds {} values, expected {}", r.path, flat.len(), r.channels.len() * r.n_samples)));
    }
    let data = flat.chunks(r.n_samples).map(|c| c.to_vec()).collect();
    let meta = crate::io::SubjectMeta {
        subject_id: e.subject_id.clone(),
        dataset: e.dataset.clone(),
        ..Default::default()
    };
    Segment::new(data, r.channels.clone(), e.t_index, meta)
}

/// `(rgb, width, height)`.
pub fn load_topomap(root: &Path, e: &CorpusEntry) -> Result<(Vec<u8>, usize, usize)> {
    let bytes = verify_blob(root, &e.topomap_ref.path, &e.topomap_ref.sha256)?;
    crate::topomap::decode_png(&bytes)
}

/// Assigns whole subjects to splits. The number of test subjects is
/// `round(fraction · n)` clamped to `[1, n − 1]`.
pub fn split_subjects(subjects: &[String], test_fraction: f64, seed: u64) -> Result<BTreeMap<String, Split>> {
    let unique: BTreeSet<&String> = subjects.iter().collect();
    let n = unique.len();
    if n < 2 {
        return Err(Error::Config(format!("{n} subject(s); a subject-level split needs at least 2")));
    }
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(Error::Config(format!("test fraction {test_fraction} outside [0, 1]")));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<&String> = unique.into_iter().collect();
    order.shuffle(&mut crate::util::rng(seed));
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), if i < n_test { Split::Test } else { Split::Train }))
        .collect())
}

/// Keeps at most `cap` items. Labels are visited by ascending priority
/// rank (unlisted labels last, ties by name); each label is kept whole
/// while it fits, otherwise a seeded uniform subsample fills the rest.
/// Retained items keep their input order.
pub fn stratified_cap<T: Clone>(
    items: &[T],
    label: impl Fn(&T) -> Option<String>,
    cap: usize,
    priority: &BTreeMap<String, u32>,
    seed: u64,
) -> Result<Vec<T>> {
    if cap == 0 {
        return Err(Error::Config("cap must be positive".into()));
    }
    if items.len() <= cap {
        return Ok(items.to_vec());
    }
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, it) in items.iter().enumerate() {
        groups.entry(label(it).unwrap_or_default()).or_default().push(i);
    }
    let mut order: Vec<(&String, &Vec<usize>)> = groups.iter().collect();
    order.sort_by_key(|(name, _)| (priority.get(*name).copied().unwrap_or(u32::MAX), (*name).clone()));
    let mut rng = crate::util::rng(seed);
    let mut keep = Vec::new();
    let mut remaining = cap;
    for (_, idx) in order {
        if remaining == 0 {
            break;
        }
        if idx.len() <= remaining {
            keep.extend_from_slice(idx);
            remaining -= idx.len();
        } else {
            let mut pick = idx.clone();
            pick.shuffle(&mut rng);
            keep.extend_from_slice(&pick[..remaining]);
            remaining = 0;
        }
    }
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| items[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_subjects_two_test() {
        let subjects: Vec<String> = (0..10).map(|i| format!("s{i}")).collect();
        let a = split_subjects(&subjects, 0.2, 5).unwrap();
        assert_eq!(a.values().filter(|s| **s == Split::Test).count(), 2);
        assert_eq!(a, split_subjects(&subjects, 0.2, 5).unwrap());
        assert!(split_subjects(&subjects[..1], 0.2, 5).is_err());
    }

    #[test]
    fn cap_prefers_priority() {
        let items = vec!["bckg", "seiz", "bckg", "bckg"];
        let prio = BTreeMap::from([("seiz".to_string(), 0)]);
        let kept = stratified_cap(&items, |s| Some(s.to_string()), 2, &prio, 1).unwrap();
        assert_eq!(kept.len(), 2);
        assert!(kept.contains(&"seiz"));
        assert_eq!(stratified_cap(&items, |s| Some(s.to_string()), 10, &prio, 1).unwrap(), items);
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let w = CorpusWriter::create(dir.path()).unwrap();
        assert!(matches!(CorpusWriter::create(dir.path()), Err(Error::Config(_))));
        drop(w);
        assert!(CorpusWriter::create(dir.path()).is_ok());
    }
}
