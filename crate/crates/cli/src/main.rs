//! `neuronarr` command-line driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use neuronarr::align::Checkpoint;
use neuronarr::corpus::{read_corpus, CorpusEntry};
use neuronarr::features::Band;
use neuronarr::http::EndpointConfig;
use neuronarr::io::{raw, Recording};
use neuronarr::narrate::Narrative;
use neuronarr::pipeline::{self, NarrationItem, PipelineConfig};
use neuronarr::signal::preprocess;
use neuronarr::synth::{synthetic_recording, SynthRecordingConfig};
use neuronarr::text_eval::{evaluate, EvalItem, Lexicon};
use neuronarr::topomap::{render_topomap, ElectrodeLayout};
use neuronarr::util::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "neuronarr", version, about = "EEG to topomap alignment and narrative generation")]
struct Cli {
    /// Pipeline configuration (JSON); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = ["50", "60"])]
    line_freq: Option<String>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=3))]
    context_n: Option<u8>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Inputs {
    /// EDF files or raw `.f32` matrices with JSON sidecars.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Dataset name for inputs that carry none.
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and channel-normalize recordings into raw matrices.
    Ingest(Inputs),
    /// Filter and resample recordings to 200 Hz.
    Preprocess(Inputs),
    /// Band powers, tiers and templates per segment as JSONL.
    Featurize(Inputs),
    /// Render one topomap PNG per segment.
    Topomap(Inputs),
    /// Build the paired corpus.
    BuildCorpus(Inputs),
    /// Train the alignment model on a corpus's training split.
    TrainAlign {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Cross-modal retrieval on the test split.
    EvalRetrieval(ModelArgs),
    /// Narratives for every segment with full history.
    Narrate {
        #[command(flatten)]
        inputs: Inputs,
        /// External endpoint configuration (JSON); rule narrator otherwise.
        #[arg(long)]
        endpoint: Option<PathBuf>,
    },
    /// ROUGE-L, Fact-F1, balanced accuracy and adjudication.
    EvalText {
        #[arg(long, conflicts_with = "narratives", required_unless_present = "narratives")]
        corpus: Option<PathBuf>,
        #[arg(long)]
        narratives: Option<PathBuf>,
    },
    /// CSV tables for loss curves, similarity, histograms and band powers.
    ExportPlots(ModelArgs),
    /// Write synthetic recordings as raw matrices.
    Synth {
        #[arg(long, default_value_t = 4)]
        subjects: usize,
        #[arg(long, default_value_t = 200.0)]
        seconds: f64,
        #[arg(long, default_value_t = 256.0)]
        fs: f64,
    },
    /// Corpus, training and every report in one go.
    Run(Inputs),
}

#[derive(Debug, Serialize, Deserialize)]
struct NarrativeRecord {
    #[serde(flatten)]
    item: NarrationItem,
    narrative: Narrative,
}

fn config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = &cli.line_freq {
        cfg.line_freq = f.parse()?;
    }
    if let Some(n) = cli.context_n {
        cfg.context_n = n as usize;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "recording".into(), |s| s.to_string_lossy().into_owned())
}

fn load_inputs(inputs: &Inputs) -> Result<Vec<(String, Recording)>> {
    inputs
        .inputs
        .iter()
        .map(|p| {
            let mut rec = pipeline::load_recording(p).with_context(|| format!("reading {}", p.display()))?;
            if let Some(d) = &inputs.dataset {
                rec.meta.dataset = d.clone();
            } else if rec.meta.dataset.is_empty() {
                rec.meta.dataset = "unknown".into();
            }
            if rec.meta.subject_id.is_empty() {
                rec.meta.subject_id = stem(p);
            }
            Ok((stem(p), rec))
        })
        .collect()
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())?;
    Ok(())
}

fn items_for(inputs: &Inputs, cfg: &PipelineConfig) -> Result<Vec<NarrationItem>> {
    let mut items = Vec::new();
    for (_, rec) in load_inputs(inputs)? {
        items.extend(pipeline::recording_items(&rec, cfg)?.into_iter().map(|(_, i)| i));
    }
    Ok(items)
}

fn loss_curve_csv(ck: &Checkpoint) -> String {
    let mut s = String::from("epoch,loss\n");
    for (i, l) in ck.loss_curve.iter().enumerate() {
        s.push_str(&format!("{i},{l}\n"));
    }
    s
}

fn band_powers_csv(entries: &[CorpusEntry]) -> String {
    let mut s = String::from("dataset,subject_id,t_index");
    for b in Band::ALL {
        s.push(',');
        s.push_str(b.name());
    }
    s.push('\n');
    for e in entries {
        s.push_str(&format!("{},{},{}", e.dataset, e.subject_id, e.t_index));
        for b in Band::ALL {
            s.push_str(&format!(",{}", e.template.band_powers.get(b)));
        }
        s.push('\n');
    }
    s
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = config(cli)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Ingest(inputs) => {
            let mut summary = Vec::new();
            for (name, rec) in load_inputs(inputs)? {
                let desc = raw::write_raw_matrix(&out.join(format!("{name}.f32")), &rec)?;
                summary.push(serde_json::json!({
                    "name": name,
                    "fs": desc.fs,
                    "samples": desc.samples,
                    "channels": desc.channels,
                    "flagged": rec.flagged,
                }));
            }
            pipeline::write_json(&out.join("ingest.json"), &summary)?;
        }
        Command::Preprocess(inputs) => {
            for (name, rec) in load_inputs(inputs)? {
                let clean = preprocess(&rec, cfg.line_freq)?;
                raw::write_raw_matrix(&out.join(format!("{name}.f32")), &clean)?;
            }
        }
        Command::Featurize(inputs) => {
            let items = items_for(inputs, &cfg)?;
            write_jsonl(&out.join("features.jsonl"), &items)?;
        }
        Command::Topomap(inputs) => {
            let layout = ElectrodeLayout::standard();
            for (name, rec) in load_inputs(inputs)? {
                for seg in pipeline::recording_segments(&rec, cfg.line_freq)? {
                    let topo = render_topomap(&seg, layout, cfg.grid, cfg.grid)?;
                    write_atomic(&out.join(&name).join(format!("{}.png", seg.t_index)), &topo.to_png()?)?;
                }
            }
        }
        Command::BuildCorpus(inputs) => {
            let recs: Vec<Recording> = load_inputs(inputs)?.into_iter().map(|(_, r)| r).collect();
            let entries = pipeline::build_corpus(&recs, out, &cfg)?;
            log::info!("wrote {} corpus entries to {}", entries.len(), out.display());
        }
        Command::TrainAlign { corpus, epochs, lr } => {
            let mut cfg = cfg;
            if let Some(e) = epochs {
                cfg.hyper.epochs = *e;
            }
            if let Some(lr) = lr {
                cfg.hyper.lr = *lr;
            }
            let entries = read_corpus(corpus)?;
            let ck = pipeline::train_from_corpus(corpus, &entries, &cfg)?;
            ck.save(out)?;
            log::info!("final loss {:?}", ck.loss_curve.last());
        }
        Command::EvalRetrieval(m) => {
            let entries = read_corpus(&m.corpus)?;
            let ck = Checkpoint::load(&m.checkpoint)?;
            let res = pipeline::eval_retrieval(&m.corpus, &entries, &ck)?;
            pipeline::write_retrieval_outputs(out, &res)?;
        }
        Command::Narrate { inputs, endpoint } => {
            let ep = match endpoint {
                Some(p) => Some(serde_json::from_slice::<EndpointConfig>(&std::fs::read(p)?)?),
                None => None,
            };
            let items = items_for(inputs, &cfg)?;
            let narratives = pipeline::narrate_items(&items, ep.as_ref())?;
            let records: Vec<NarrativeRecord> = items
                .into_iter()
                .zip(narratives)
                .map(|(item, narrative)| NarrativeRecord { item, narrative })
                .collect();
            write_jsonl(&out.join("narratives.jsonl"), &records)?;
        }
        Command::EvalText { corpus, narratives } => {
            let report = match (corpus, narratives) {
                (Some(c), _) => pipeline::eval_text_corpus(&read_corpus(c)?)?,
                (None, Some(n)) => {
                    let text = std::fs::read_to_string(n)?;
                    let items = text
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .map(|l| {
                            let r: NarrativeRecord = serde_json::from_str(l)?;
                            Ok(EvalItem {
                                dataset: r.item.dataset,
                                prediction: r.narrative.text,
                                reference: r.item.template.rendered,
                                truth_label: r.item.label,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    evaluate(&items, Lexicon::standard())?
                }
                (None, None) => bail!("eval-text needs --corpus or --narratives"),
            };
            pipeline::write_text_outputs(out, &report)?;
        }
        Command::ExportPlots(m) => {
            let entries = read_corpus(&m.corpus)?;
            let ck = Checkpoint::load(&m.checkpoint)?;
            write_atomic(&out.join("loss_curve.csv"), loss_curve_csv(&ck).as_bytes())?;
            write_atomic(&out.join("band_powers.csv"), band_powers_csv(&entries).as_bytes())?;
            pipeline::write_retrieval_outputs(out, &pipeline::eval_retrieval(&m.corpus, &entries, &ck)?)?;
            pipeline::write_text_outputs(out, &pipeline::eval_text_corpus(&entries)?)?;
        }
        Command::Synth { subjects, seconds, fs } => {
            for i in 0..*subjects {
                let mut sc = SynthRecordingConfig {
                    fs: *fs,
                    seconds: *seconds,
                    line_freq: cfg.line_freq,
                    seed: cfg.seed.wrapping_add(i as u64),
                    ..SynthRecordingConfig::default()
                };
                sc.meta.subject_id = format!("S{:03}", i + 1);
                let rec = synthetic_recording(&sc)?;
                raw::write_raw_matrix(&out.join(format!("{}.f32", sc.meta.subject_id)), &rec)?;
            }
        }
        Command::Run(inputs) => {
            let recs: Vec<Recording> = load_inputs(inputs)?.into_iter().map(|(_, r)| r).collect();
            let paths = pipeline::run_pipeline(&recs, out, &cfg)?;
            log::info!("reports in {}", paths.reports.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(1)
        }
    }
}
