use proptest::prelude::*;

use neuronarr::align::{AlignModel, ModelConfig};
use neuronarr::features::{build_template, kmeans_tiers, BandPowers, Band};
use neuronarr::io::SubjectMeta;
use neuronarr::narrate::{assemble_context, infer_trends, narrate_rule, TrendLabel, INSTRUCTION};
use neuronarr::signal::Segment;
use neuronarr::synth::montage_1020;
use neuronarr::text_eval::{extract_facts, fact, fact_f1, rouge_l, FactSet};
use neuronarr::topomap::{render_topomap, ElectrodeLayout};

fn powers() -> impl Strategy<Value = BandPowers> {
    prop::collection::vec(1.0f64..200.0, 6).prop_map(|v| BandPowers::from_fn(|b| v[Band::ALL.iter().position(|&x| x == b).unwrap()]))
}

fn segment(t: usize, scale: f64) -> Segment {
    let data: Vec<Vec<f64>> = (0..19).map(|c| (0..40).map(|i| scale * ((i * (c + 1)) as f64 * 0.1).sin()).collect()).collect();
    Segment::new(data, montage_1020(), t, SubjectMeta::default()).unwrap()
}

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]).prop_map(String::from), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trends_are_scale_equivariant(history in prop::collection::vec(powers(), 1..=3), current in powers(), c in 1.0f64..50.0) {
        let scale = |bp: &BandPowers| BandPowers::from_fn(|b| bp.get(b) * c);
        let a = infer_trends(&history, &current).unwrap();
        let b = infer_trends(&history.iter().map(scale).collect::<Vec<_>>(), &scale(&current)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn narratives_recover_dominant_band_and_peak(bp in powers(), e in prop::collection::vec(1.0f64..300.0, 19), n in 1usize..=3) {
        let energies: Vec<(String, f64)> = montage_1020().into_iter().zip(e).collect();
        let Ok(tiers) = kmeans_tiers(&energies, 3, 0) else { return Ok(()) };
        let tpl = build_template(&SubjectMeta::default(), &bp, &tiers);
        let trends: TrendLabel = infer_trends(&[bp], &bp).unwrap();
        let facts = extract_facts(&narrate_rule(&tpl, &trends, n).text);
        prop_assert!(facts.contains(&fact("dominant_band", bp.dominant().name())));
        prop_assert!(facts.contains(&fact("peak_channel", tiers.highest.channel.clone())));
    }

    #[test]
    fn rouge_symmetric_for_equal_lengths(a in words(), b in words()) {
        let n = a.len().min(b.len());
        let (x, y) = (a[..n].join(" "), b[..n].join(" "));
        prop_assert!((rouge_l(&x, &y) - rouge_l(&y, &x)).abs() < 1e-12);
    }

    #[test]
    fn rouge_ignores_repeated_whitespace(a in words(), b in words(), pad in 1usize..4) {
        let spaced = a.join(&" ".repeat(pad + 1));
        prop_assert_eq!(rouge_l(&spaced, &b.join(" ")), rouge_l(&a.join(" "), &b.join(" ")));
    }

    #[test]
    fn fact_f1_identity_and_monotone(items in prop::collection::btree_set((0u8..5, 0u8..5), 1..12), drop in 0usize..12) {
        let set: FactSet = items.iter().map(|(s, v)| fact(format!("s{s}"), format!("v{v}"))).collect();
        prop_assert_eq!(fact_f1(&set, &set), 1.0);
        let mut prev = 1.0;
        let mut pred = set.clone();
        for f in set.iter().take(drop.min(set.len())) {
            pred.remove(f);
            let now = fact_f1(&pred, &set);
            prop_assert!(now <= prev);
            prev = now;
        }
    }
}

#[test]
fn context_has_history_plus_two_vectors() {
    let cfg = ModelConfig { patch_len: 20, d1: 8, d2: 8, hidden: 8, d: 8, vis_downsample: 8, image_h: 32, image_w: 32 };
    let model = AlignModel::init(cfg, montage_1020(), 0).unwrap();
    for n in 1..=3 {
        let history: Vec<Segment> = (5 - n..5).map(|t| segment(t, 1.0)).collect();
        let current = segment(5, 2.0);
        let topo = render_topomap(&current, ElectrodeLayout::standard(), 32, 32).unwrap();
        let ctx = assemble_context(&history, &current, &topo, &model, INSTRUCTION).unwrap();
        assert_eq!(ctx.vectors().len(), n + 2);
        assert_eq!(ctx.instruction, INSTRUCTION);
        assert_eq!(ctx.history_t_indices, (5 - n..5).collect::<Vec<_>>());
    }
    let gap = vec![segment(2, 1.0), segment(4, 1.0)];
    let current = segment(5, 1.0);
    let topo = render_topomap(&current, ElectrodeLayout::standard(), 32, 32).unwrap();
    assert!(matches!(assemble_context(&gap, &current, &topo, &model, INSTRUCTION), Err(neuronarr::Error::Context(_))));
}
