//! Desk-scale alignment run on synthetic pattern segments.
//!
//! `cargo run --release --example desk_align -- [epochs] [lr]`

use std::time::Instant;

use neuronarr::align::{AlignHyper, AlignModel, AlignPair, ModelConfig};
use neuronarr::retrieval::evaluate_pool;
use neuronarr::synth::{alignment_segments, montage_1020};
use neuronarr::topomap::{render_topomap, ElectrodeLayout, DEFAULT_GRID};

fn main() -> neuronarr::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let epochs = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(60);
    let lr = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let start = Instant::now();
    let segs = alignment_segments(512, 7)?;
    let cfg = ModelConfig { patch_len: 200, d1: 64, d2: 64, hidden: 64, d: 64, vis_downsample: 8, image_h: DEFAULT_GRID, image_w: DEFAULT_GRID };
    let model = AlignModel::init(cfg, montage_1020(), 7)?;
    let layout = ElectrodeLayout::standard();
    let pairs: Vec<AlignPair> = segs
        .iter()
        .map(|s| {
            let t = render_topomap(s, layout, DEFAULT_GRID, DEFAULT_GRID)?;
            model.prepare_pair(s, &t.image, DEFAULT_GRID, DEFAULT_GRID)
        })
        .collect::<neuronarr::Result<_>>()?;
    println!("prepared in {:?}", start.elapsed());
    let (train, test) = pairs.split_at(448);
    let hyper = AlignHyper { lr, epochs, seed: 7, ..Default::default() };
    let ck = neuronarr::align::train_pairs(model, train, &hyper)?;
    println!("trained in {:?}; loss {:?}", start.elapsed(), &ck.loss_curve.iter().step_by(10).collect::<Vec<_>>());
    let m = &ck.model;
    let ze: Vec<_> = test.iter().map(|p| m.embed_eeg_input(&p.eeg)).collect::<neuronarr::Result<_>>()?;
    let zv: Vec<_> = test.iter().map(|p| m.embed_vis(&p.h_vis)).collect::<neuronarr::Result<_>>()?;
    for r in evaluate_pool(&ze, &zv, "held-out")? {
        println!("{:?} R@1 {:.1} R@5 {:.1} MeanR {:.3}", r.direction, r.r1, r.r5, r.mean_rank);
    }
    Ok(())
}
