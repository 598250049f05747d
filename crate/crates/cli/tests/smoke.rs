use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_neuronarr"));
    c.env("RUST_LOG", "warn");
    c
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn synth(dir: &Path) -> Vec<PathBuf> {
    ok(bin().args(["--seed", "5", "--out"]).arg(dir).args(["synth", "--subjects", "3", "--seconds", "130"]).output().unwrap());
    (1..=3).map(|i| dir.join(format!("S00{i}.f32"))).collect()
}

fn two_epoch_config(dir: &Path) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, r#"{"schema":"pipeline-config-v1","hyper":{"epochs":2,"batch_size":8,"lr":0.001}}"#).unwrap();
    p
}

#[test]
fn end_to_end_run_writes_parseable_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = synth(&tmp.path().join("raw"));
    let cfg = two_epoch_config(tmp.path());
    let out = tmp.path().join("run");
    ok(bin().arg("--config").arg(&cfg).arg("--out").arg(&out).arg("run").args(&inputs).output().unwrap());

    let reports: Value = serde_json::from_slice(&std::fs::read(out.join("reports/retrieval.json")).unwrap()).unwrap();
    let reports = reports.as_array().unwrap();
    for dir in ["eeg_to_topo", "topo_to_eeg"] {
        let r = reports.iter().find(|r| r["direction"] == dir && r["pool"] == "overall").unwrap();
        for key in ["r1", "r5", "r10", "mean_rank"] {
            assert!(r[key].is_number(), "{dir} {key}");
        }
    }
    let text: Value = serde_json::from_slice(&std::fs::read(out.join("reports/text_eval.json")).unwrap()).unwrap();
    assert!(text["text_scores"].as_array().is_some_and(|a| !a.is_empty()));

    let ck: Value = serde_json::from_slice(&std::fs::read(out.join("checkpoint/checkpoint.json")).unwrap()).unwrap();
    assert_eq!(ck["loss_curve"].as_array().unwrap().len(), 3);

    let plots = tmp.path().join("plots");
    ok(bin()
        .arg("--out")
        .arg(&plots)
        .arg("export-plots")
        .arg("--corpus")
        .arg(out.join("corpus"))
        .arg("--checkpoint")
        .arg(out.join("checkpoint"))
        .output()
        .unwrap());
    for f in ["loss_curve.csv", "band_powers.csv", "similarity.csv", "score_histogram.csv", "adjudication_histogram.csv"] {
        assert!(plots.join(f).is_file(), "{f}");
    }
}

#[test]
fn stage_commands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = synth(&tmp.path().join("raw"));
    let pre = tmp.path().join("pre");
    ok(bin().args(["--line-freq", "60", "--out"]).arg(&pre).arg("preprocess").arg(&inputs[0]).output().unwrap());
    let desc: Value = serde_json::from_slice(&std::fs::read(pre.join("S001.json")).unwrap()).unwrap();
    assert_eq!(desc["fs"], 200.0);

    let cfg = two_epoch_config(tmp.path());
    let corpus = tmp.path().join("corpus");
    ok(bin().arg("--out").arg(&corpus).arg("build-corpus").args(&inputs).output().unwrap());
    let ck = tmp.path().join("ck");
    ok(bin().arg("--config").arg(&cfg).arg("--out").arg(&ck).arg("train-align").arg("--corpus").arg(&corpus).output().unwrap());
    let rep = tmp.path().join("rep");
    ok(bin().arg("--out").arg(&rep).arg("eval-retrieval").arg("--corpus").arg(&corpus).arg("--checkpoint").arg(&ck).output().unwrap());
    assert!(rep.join("retrieval.json").is_file());

    let nar = tmp.path().join("nar");
    ok(bin().arg("--out").arg(&nar).arg("narrate").args(&inputs[..1]).output().unwrap());
    ok(bin().arg("--out").arg(&nar).arg("eval-text").arg("--narratives").arg(nar.join("narratives.jsonl")).output().unwrap());
    let text: Value = serde_json::from_slice(&std::fs::read(nar.join("text_eval.json")).unwrap()).unwrap();
    let rouge = text["text_scores"][0]["rouge_l"]["mean"].as_f64().unwrap();
    assert!(rouge > 0.0 && rouge <= 1.0);
}

#[test]
fn usage_and_domain_errors_have_distinct_exit_codes() {
    assert_eq!(bin().arg("--bogus").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["--line-freq", "55", "synth"]).output().unwrap().status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.edf");
    assert_eq!(bin().arg("--out").arg(tmp.path()).arg("ingest").arg(&missing).output().unwrap().status.code(), Some(1));
}
