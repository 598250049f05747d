//! Acceptance suite. Every criterion runs, prints one PASS/FAIL line and the
//! test fails if any criterion fails.

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use neuronarr::align::{
    pairwise_logits, sigmoid_align_loss, train_pairs, AlignHyper, AlignModel, AlignPair, LossNormalization, ModelConfig,
    Square, TRAINABLE,
};
use neuronarr::features::{build_template, integrate, kmeans_1d, kmeans_tiers, welch_psd, Band, BandPowers, TierLevel};
use neuronarr::io::{parse_edf, write_edf, EdfSignalSpec, Sex, SubjectMeta};
use neuronarr::narrate::{narrate_rule, Trend, TrendLabel};
use neuronarr::pipeline::{run_pipeline, PipelineConfig};
use neuronarr::retrieval::{evaluate_pool, mean_rank, recall_at_k};
use neuronarr::signal::{filtfilt, FilterKernel, PreprocessConfig, Segment};
use neuronarr::synth::{alignment_segments, montage_1020, synthetic_recording, SynthRecordingConfig};
use neuronarr::text_eval::{balanced_accuracy, extract_facts, fact_f1, restrict, rouge_l, template_facts};
use neuronarr::topomap::{render_topomap, ElectrodeLayout, DEFAULT_GRID};
use neuronarr::Error;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn unit_vec(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn gradient_suite() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let channels = vec!["C3".to_string(), "C4".to_string(), "CZ".to_string(), "PZ".to_string()];
    for trial in 0..20u64 {
        let d = rng.gen_range(2..=16);
        let cfg = ModelConfig {
            patch_len: 5,
            d1: rng.gen_range(2..=16),
            d2: rng.gen_range(2..=16),
            hidden: rng.gen_range(2..=16),
            d,
            vis_downsample: 2,
            image_h: 8,
            image_w: 8,
        };
        let mut model = AlignModel::init(cfg, channels.clone(), trial).map_err(e2s)?;
        model.log_tau = rng.gen_range(0.0..2.5);
        model.logit_bias = rng.gen_range(-5.0..1.0);
        model.loss_norm = if trial % 2 == 0 { LossNormalization::PerPair } else { LossNormalization::PerRow };
        for t in model.trainable_mut() {
            for v in t.iter_mut() {
                *v += rng.gen_range(-0.3..0.3);
            }
        }
        let b = rng.gen_range(1..=4);
        let batch: Vec<AlignPair> = (0..b)
            .map(|_| {
                let present = rng.gen_range(1..=channels.len());
                let data: Vec<Vec<f64>> = (0..present).map(|_| (0..10).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
                let seg = Segment::new(data, channels[..present].to_vec(), 0, SubjectMeta::default()).unwrap();
                let rgb: Vec<u8> = (0..8 * 8 * 3).map(|_| rng.gen()).collect();
                model.prepare_pair(&seg, &rgb, 8, 8)
            })
            .collect::<neuronarr::Result<_>>()
            .map_err(e2s)?;
        let (_, grads) = model.forward_backward(&batch).map_err(e2s)?;
        let h = 1e-6;
        for (ti, name) in TRAINABLE.iter().enumerate() {
            let analytic = grads.get(name).ok_or_else(|| format!("no gradient for {name}"))?.to_vec();
            for (k, &a) in analytic.iter().enumerate() {
                let orig = model.trainable()[ti][k];
                model.trainable_mut()[ti][k] = orig + h;
                let up = model.batch_loss(&batch).map_err(e2s)?;
                model.trainable_mut()[ti][k] = orig - h;
                let down = model.batch_loss(&batch).map_err(e2s)?;
                model.trainable_mut()[ti][k] = orig;
                let numeric = (up - down) / (2.0 * h);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
                ensure(rel < 1e-4, format!("trial {trial} {name}[{k}]: analytic {a:e} numeric {numeric:e}"))?;
            }
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(60), format!("took {el:?}"))?;
    Ok(format!("max rel err {worst:.2e} in {el:.2?}"))
}

fn naive_loss(ze: &[Vec<f64>], zv: &[Vec<f64>], tau: f64, bias: f64) -> f64 {
    let b = ze.len();
    let mut total = 0.0;
    for i in 0..b {
        for j in 0..b {
            let y = if i == j { 1.0 } else { -1.0 };
            let s: f64 = ze[i].iter().zip(&zv[j]).map(|(x, y)| x * y).sum();
            let z = y * (tau * s + bias);
            total += -(1.0 / (1.0 + (-z).exp())).ln();
        }
    }
    total / (b * b) as f64
}

fn sigmoid_loss_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b = rng.gen_range(1..=4);
        let d = rng.gen_range(2..=8);
        let ze: Vec<Vec<f64>> = (0..b).map(|_| unit_vec(d, &mut rng)).collect();
        let zv: Vec<Vec<f64>> = (0..b).map(|_| unit_vec(d, &mut rng)).collect();
        let tau = rng.gen_range(0.5..20.0);
        let bias = rng.gen_range(-12.0..2.0);
        let s = pairwise_logits(&ze, &zv, tau, bias).map_err(e2s)?;
        let (loss, _) = sigmoid_align_loss(&s, LossNormalization::PerPair);
        let oracle = naive_loss(&ze, &zv, tau, bias);
        worst = worst.max((loss - oracle).abs());
        ensure((loss - oracle).abs() < 1e-10, format!("loss {loss} vs scalar {oracle}"))?;
    }
    let (l, _) = sigmoid_align_loss(&Square::from_rows(&[vec![0.0]]), LossNormalization::PerPair);
    ensure((l - std::f64::consts::LN_2).abs() < 1e-12, format!("B=1, s=0 gave {l}"))?;
    Ok(format!("max abs diff {worst:.1e}; B=1 s=0 → {l:.15}"))
}

fn synthetic_alignment() -> Check {
    let start = Instant::now();
    let segs = alignment_segments(512, 7).map_err(e2s)?;
    let cfg = ModelConfig {
        patch_len: 200,
        d1: 64,
        d2: 64,
        hidden: 64,
        d: 64,
        vis_downsample: 8,
        image_h: DEFAULT_GRID,
        image_w: DEFAULT_GRID,
    };
    let model = AlignModel::init(cfg, montage_1020(), 7).map_err(e2s)?;
    let layout = ElectrodeLayout::standard();
    let pairs: Vec<AlignPair> = segs
        .iter()
        .map(|s| {
            let t = render_topomap(s, layout, DEFAULT_GRID, DEFAULT_GRID)?;
            model.prepare_pair(s, &t.image, DEFAULT_GRID, DEFAULT_GRID)
        })
        .collect::<neuronarr::Result<_>>()
        .map_err(e2s)?;
    let (train, held) = pairs.split_at(448);
    let hyper = AlignHyper { lr: 1e-3, epochs: 60, seed: 7, ..AlignHyper::default() };
    let ck = train_pairs(model, train, &hyper).map_err(e2s)?;
    let m = &ck.model;
    let ze: Vec<Vec<f64>> = held.iter().map(|p| m.embed_eeg_input(&p.eeg)).collect::<neuronarr::Result<_>>().map_err(e2s)?;
    let zv: Vec<Vec<f64>> = held.iter().map(|p| m.embed_vis(&p.h_vis)).collect::<neuronarr::Result<_>>().map_err(e2s)?;
    let reports = evaluate_pool(&ze, &zv, "held-out").map_err(e2s)?;
    let summary: Vec<String> = reports
        .iter()
        .map(|r| format!("{:?} R@1 {:.1}% MeanR {:.3}", r.direction, r.r1, r.mean_rank))
        .collect();
    for r in &reports {
        ensure(r.n == 64, format!("pool of {}", r.n))?;
        ensure(r.r1 >= 90.0 && r.mean_rank <= 1.5, summary.join("; "))?;
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(600), format!("took {el:?}"))?;
    Ok(format!("{} in {el:.1?}", summary.join("; ")))
}

fn tone(freq: f64, amp: f64, offset: f64, n: usize, fs: f64) -> Vec<f64> {
    (0..n)
        .map(|i| offset + amp * (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
        .collect()
}

fn middle(x: &[f64]) -> &[f64] {
    &x[x.len() / 4..3 * x.len() / 4]
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn filter(x: &[f64], k: &FilterKernel) -> std::result::Result<Vec<f64>, String> {
    filtfilt(x, k).map_err(e2s)
}

fn filter_specs() -> Check {
    let fs = 200.0;
    let n = 60_000;
    let cfg = PreprocessConfig::default();
    let notch = cfg.notch(50.0, fs).map_err(e2s)?;
    let bp = cfg.bandpass(fs).map_err(e2s)?;

    let x50 = tone(50.0, 1.0, 0.0, n, fs);
    let y50 = filter(&x50, &notch)?;
    let atten = 20.0 * (rms(middle(&x50)) / rms(middle(&y50))).log10();
    ensure(atten >= 40.0, format!("notch attenuation {atten:.1} dB"))?;

    let x10 = tone(10.0, 1.0, 100.0, n, fs);
    let y10 = filter(&x10, &bp)?;
    let mid = middle(&y10);
    let mean = mid.iter().sum::<f64>() / mid.len() as f64;
    ensure(mean.abs() <= 1.0, format!("residual DC {mean:.4} μV"))?;
    let ac: Vec<f64> = mid.iter().map(|v| v - mean).collect();
    let gain_db = 20.0 * (rms(&ac) / std::f64::consts::FRAC_1_SQRT_2).log10();
    ensure(gain_db.abs() <= 1.0, format!("10 Hz gain {gain_db:.3} dB"))?;

    let start = n / 4;
    let (mut sp, mut cp) = (0.0, 0.0);
    for (k, v) in ac.iter().enumerate() {
        let ph = 2.0 * std::f64::consts::PI * 10.0 * (start + k) as f64 / fs;
        sp += v * ph.sin();
        cp += v * ph.cos();
    }
    let phase = cp.atan2(sp).to_degrees();
    ensure(phase.abs() < 1.0, format!("phase shift {phase:.4}°"))?;
    Ok(format!("notch {atten:.1} dB; 10 Hz gain {gain_db:.4} dB; DC {mean:.2e} μV; phase {phase:.2e}°"))
}

fn psd_parseval() -> Check {
    let fs = 200.0;
    let x = tone(10.0, 1.0, 0.0, 2000, fs);
    let psd = welch_psd(&x, fs, 400, 200).map_err(e2s)?;
    let total = integrate(&psd.freqs, &psd.density, 0.0, fs / 2.0);
    ensure((total - 0.5).abs() <= 0.025, format!("integrated PSD {total}"))?;
    let z = welch_psd(&[0.0; 2000], fs, 400, 200).map_err(e2s)?;
    ensure(z.density.iter().all(|&v| v == 0.0), "zero signal gave nonzero density")?;
    let zt = integrate(&z.freqs, &z.density, 0.0, fs / 2.0);
    ensure(zt == 0.0, format!("zero signal integrated to {zt}"))?;
    Ok(format!("unit 10 Hz → {total:.5} μV²; zero → {zt}"))
}

fn best_contiguous_sse(sorted: &[f64], k: usize) -> f64 {
    let n = sorted.len();
    let cost = |a: usize, b: usize| {
        let s = &sorted[a..b];
        let m = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|v| (v - m).powi(2)).sum::<f64>()
    };
    let mut best = f64::INFINITY;
    let mut cuts = vec![0usize; k - 1];
    fn rec(i: usize, lo: usize, n: usize, cuts: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if i == cuts.len() {
            f(cuts);
            return;
        }
        for c in lo..n {
            cuts[i] = c;
            rec(i + 1, c + 1, n, cuts, f);
        }
    }
    rec(0, 1, n, &mut cuts, &mut |cs: &[usize]| {
        let mut bounds = vec![0];
        bounds.extend_from_slice(cs);
        bounds.push(n);
        let total: f64 = bounds.windows(2).map(|w| cost(w[0], w[1])).sum();
        best = best.min(total);
    });
    best
}

fn reference_energies() -> Vec<(String, f64)> {
    [
        ("F3", 52.1830),
        ("F4", 55.4012),
        ("F7", 18.2204),
        ("F8", 47.9135),
        ("FZ", 96.7741),
        ("C3", 58.0127),
        ("C4", 103.2591),
        ("CZ", 61.3378),
        ("P3", 49.8862),
        ("P4", 51.0446),
        ("PZ", 92.5520),
        ("O1", 14.7719),
        ("O2", 16.0983),
        ("T3", 20.4157),
        ("T4", 44.6290),
        ("T5", 12.9034),
        ("T6", 42.3318),
    ]
    .iter()
    .map(|(n, e)| (n.to_string(), *e))
    .collect()
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn kmeans_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for trial in 0..200u64 {
        let n = rng.gen_range(3..=10);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        let c = kmeans_1d(&values, 3, 20, trial);
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let oracle = best_contiguous_sse(&sorted, 3);
        let diff = (c.sse - oracle).abs();
        worst = worst.max(diff);
        ensure(diff <= 1e-9 * oracle.max(1.0), format!("trial {trial}: sse {} vs optimum {oracle} on {values:?}", c.sse))?;
    }
    let t = kmeans_tiers(&reference_energies(), 3, 0).map_err(e2s)?;
    ensure(t.highest.channel == "C4" && (t.highest.power - 103.2591).abs() < 1e-12, "highest channel")?;
    ensure(t.high == names(&["FZ", "C4", "PZ"]), format!("high {:?}", t.high))?;
    ensure(t.medium == names(&["F3", "F4", "F8", "C3", "CZ", "P3", "P4", "T4", "T6"]), format!("medium {:?}", t.medium))?;
    ensure(t.low == names(&["F7", "O1", "O2", "T3", "T5"]), format!("low {:?}", t.low))?;
    Ok(format!("200 trials, max SSE gap {worst:.1e}; reference tiers reproduced"))
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn template_golden() -> Check {
    let meta = SubjectMeta {
        subject_id: "sub-19f".into(),
        age: Some(19),
        sex: Some(Sex::Female),
        task: Some("a mental arithmetic task with cognitive load".into()),
        dataset: "Workload".into(),
        ..SubjectMeta::default()
    };
    let bp = BandPowers::from_fn(|b| match b {
        Band::Delta => 39.8676,
        Band::Theta => 11.5915,
        Band::Alpha => 5.7254,
        Band::Beta => 5.2747,
        Band::Gamma => 1.1490,
        Band::HighGamma => 0.0810,
    });
    let tiers = kmeans_tiers(&reference_energies(), 3, 0).map_err(e2s)?;
    let tpl = build_template(&meta, &bp, &tiers);
    let golden = std::fs::read_to_string(golden_path("reference_template.txt")).map_err(e2s)?;
    let golden = golden.strip_suffix('\n').unwrap_or(&golden);
    if tpl.rendered != golden {
        for (i, (a, b)) in tpl.rendered.lines().zip(golden.lines()).enumerate() {
            if a != b {
                return Err(format!("line {}:\n  got    {a}\n  golden {b}", i + 1));
            }
        }
        return Err("line count differs".into());
    }
    Ok(format!("{} bytes match", golden.len()))
}

fn metric_oracles() -> Check {
    let r = rouge_l("a b c d", "a c d e");
    ensure((r - 0.75).abs() < 1e-9, format!("ROUGE-L {r}"))?;
    let facts = extract_facts("The delta frequency band (0--4 Hz) exhibits the highest power. Highest-energy channel is C4.");
    ensure(!facts.is_empty() && fact_f1(&facts, &facts) == 1.0, "fact_f1 identity")?;
    let truth = names(&["a", "a", "b", "b"]);
    let perfect: Vec<Option<String>> = truth.iter().cloned().map(Some).collect();
    let constant = vec![Some("a".to_string()); 4];
    let ba1 = balanced_accuracy(&perfect, &truth).map_err(e2s)?;
    let ba2 = balanced_accuracy(&constant, &truth).map_err(e2s)?;
    ensure(ba1 == 100.0 && ba2 == 50.0, format!("balanced accuracy {ba1}, {ba2}"))?;
    let mut eye = Square::zeros(5);
    for i in 0..5 {
        eye.set(i, i, 1.0);
    }
    for k in [1, 5] {
        let r = recall_at_k(&eye, k).map_err(e2s)?;
        ensure(r == 100.0, format!("identity R@{k} = {r}"))?;
    }
    let mr = mean_rank(&eye);
    ensure(mr == 1.0, format!("identity MeanR {mr}"))?;
    let mut anti = Square::zeros(3);
    for i in 0..3 {
        for j in 0..3 {
            anti.set(i, j, if i == j { -1.0 } else { 1.0 });
        }
    }
    let (r1, mr) = (recall_at_k(&anti, 1).map_err(e2s)?, mean_rank(&anti));
    ensure(r1 == 0.0 && mr == 3.0, format!("worst case R@1 {r1}, MeanR {mr}"))?;
    Ok(format!("ROUGE-L {r}; BA {ba1}/{ba2}; identity MeanR {}", mean_rank(&eye)))
}

fn closed_narrator_loop() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let chans = montage_1020();
    let trends = [
        Trend::SignificantIncrease,
        Trend::NoticeableIncrease,
        Trend::Stable,
        Trend::ModerateDecrease,
        Trend::SignificantDecrease,
        Trend::ConsistentlyLow,
    ];
    let keep = |s: &str| s == "dominant_band" || s == "peak_channel" || s.starts_with("tier:");
    for trial in 0..100u64 {
        let bp = BandPowers::from_fn(|_| rng.gen_range(0.0..60.0));
        let k = rng.gen_range(5..=chans.len());
        let energies: Vec<(String, f64)> = chans[..k].iter().map(|c| (c.clone(), rng.gen_range(1.0..150.0))).collect();
        let tiers = kmeans_tiers(&energies, 3, trial).map_err(e2s)?;
        let label = TrendLabel(std::array::from_fn(|_| trends[rng.gen_range(0..trends.len())]));
        let meta = SubjectMeta { subject_id: format!("R{trial}"), ..SubjectMeta::default() };
        let tpl = build_template(&meta, &bp, &tiers);
        let narrative = narrate_rule(&tpl, &label, rng.gen_range(1..=3));
        let got = restrict(&extract_facts(&narrative.text), keep);
        let want = restrict(&template_facts(&tpl, None), keep);
        let f1 = fact_f1(&got, &want);
        ensure(f1 == 1.0, format!("trial {trial}: F1 {f1}\n{}\nmissing {:?}\nextra {:?}", narrative.text, want.difference(&got).collect::<Vec<_>>(), got.difference(&want).collect::<Vec<_>>()))?;
        ensure(tiers.members(TierLevel::High).contains(&tiers.highest.channel), "highest outside high tier")?;
    }
    Ok("100 random templates, F1 = 1.0 on dominant band, peak channel and tiers".into())
}

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Check {
    let recs = (0..3u64)
        .map(|i| {
            let mut c = SynthRecordingConfig { seconds: 130.0, seed: 40 + i, ..SynthRecordingConfig::default() };
            c.meta.subject_id = format!("D{i}");
            synthetic_recording(&c)
        })
        .collect::<neuronarr::Result<Vec<_>>>()
        .map_err(e2s)?;
    let mut cfg = PipelineConfig { seed: 11, ..PipelineConfig::default() };
    cfg.hyper.epochs = 2;
    cfg.hyper.batch_size = 8;
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_pipeline(&recs, &a, &cfg).map_err(e2s)?;
    run_pipeline(&recs, &b, &cfg).map_err(e2s)?;
    let (fa, fb) = (files_under(&a), files_under(&b));
    ensure(fa.keys().eq(fb.keys()), "file sets differ")?;
    for (path, bytes) in &fa {
        ensure(&fb[path] == bytes, format!("{} differs", path.display()))?;
    }
    for required in ["corpus/corpus.jsonl", "checkpoint/checkpoint.json", "checkpoint/weights.f32", "reports/retrieval.json", "reports/text_eval.json"] {
        ensure(fa.contains_key(Path::new(required)), format!("missing {required}"))?;
    }
    Ok(format!("{} files byte-identical across two runs", fa.len()))
}

fn edf_robustness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let labels = montage_1020();
    for _ in 0..20 {
        let ns = rng.gen_range(1..=8);
        let spr = rng.gen_range(1..=64);
        let nrec = rng.gen_range(1..=10);
        let signals: Vec<EdfSignalSpec> = (0..ns)
            .map(|s| {
                let phys_min = -rng.gen_range(50.0..500.0);
                let phys_max = rng.gen_range(50.0..500.0);
                EdfSignalSpec {
                    label: labels[s].clone(),
                    phys_dim: "uV".into(),
                    phys_min,
                    phys_max,
                    dig_min: -32768,
                    dig_max: 32767,
                    samples_per_record: spr,
                    data: (0..spr * nrec).map(|_| rng.gen_range(phys_min..phys_max)).collect(),
                }
            })
            .collect();
        let bytes = write_edf("X X X X", 1.0, &signals).map_err(e2s)?;
        let rec = parse_edf(&bytes).map_err(e2s)?;
        for (s, spec) in signals.iter().enumerate() {
            let step = (spec.phys_max - spec.phys_min) / 65535.0;
            for (a, b) in rec.data()[s].iter().zip(&spec.data) {
                ensure((a - b).abs() <= step * (1.0 + 1e-6), format!("round-trip error {} > step {step}", (a - b).abs()))?;
            }
        }
    }

    let base = {
        let signals: Vec<EdfSignalSpec> = (0..4)
            .map(|s| EdfSignalSpec {
                label: labels[s].clone(),
                phys_dim: "uV".into(),
                phys_min: -200.0,
                phys_max: 200.0,
                dig_min: -2048,
                dig_max: 2047,
                samples_per_record: 16,
                data: (0..64).map(|i| (i as f64 * 0.3 + s as f64).sin() * 100.0).collect(),
            })
            .collect();
        write_edf("X X X X", 1.0, &signals).map_err(e2s)?
    };
    let header_len = 256 + 4 * 256;
    let mut ok = 0;
    let mut parse_err = 0;
    let mut other_err = 0;
    for i in 0..1000 {
        let mut bytes = base.clone();
        match i % 4 {
            0 => {
                let k = rng.gen_range(0..header_len);
                bytes[k] = rng.gen();
            }
            1 => {
                for _ in 0..rng.gen_range(1..8) {
                    let k = rng.gen_range(0..header_len);
                    let alphabet = b" 0123456789.-+eE\x00\xff";
                    bytes[k] = alphabet[rng.gen_range(0..alphabet.len())];
                }
            }
            2 => {
                let cut = rng.gen_range(0..bytes.len());
                bytes.truncate(cut);
            }
            _ => {
                let fields = [(184, 8), (236, 8), (244, 8), (252, 4)];
                let (off, w) = fields[rng.gen_range(0..fields.len())];
                let text = format!("{:<w$}", rng.gen_range(-5i64..100_000).to_string(), w = w);
                bytes[off..off + w].copy_from_slice(&text.as_bytes()[..w]);
            }
        }
        match catch_unwind(AssertUnwindSafe(|| parse_edf(&bytes))) {
            Err(_) => return Err(format!("mutation {i} panicked")),
            Ok(Ok(_)) => ok += 1,
            Ok(Err(Error::Parse { .. })) => parse_err += 1,
            Ok(Err(Error::Unsupported(_))) => other_err += 1,
            Ok(Err(e)) => return Err(format!("mutation {i} gave unexpected error kind: {e}")),
        }
    }
    Ok(format!("round-trip within one step; 1000 mutations: {ok} ok, {parse_err} parse errors, {other_err} unsupported"))
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(u32, &str, fn() -> Check)> = vec![
        (1, "gradient suite", gradient_suite),
        (2, "sigmoid-loss oracle", sigmoid_loss_oracle),
        (3, "synthetic alignment end-to-end", synthetic_alignment),
        (4, "filter specs", filter_specs),
        (5, "PSD / Parseval", psd_parseval),
        (6, "k-means oracle", kmeans_oracle),
        (7, "template goldens", template_golden),
        (8, "metric oracles", metric_oracles),
        (9, "closed narrator loop", closed_narrator_loop),
        (10, "determinism", determinism),
        (11, "parser robustness", edf_robustness),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout();
    for (id, name, check) in criteria {
        let outcome = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let line = match outcome {
            Ok(detail) => format!("criterion {id:>2} PASS {name}: {detail}"),
            Err(why) => {
                failed.push(id);
                format!("criterion {id:>2} FAIL {name}: {why}")
            }
        };
        let _ = writeln!(out, "{line}");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
