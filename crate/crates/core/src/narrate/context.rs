//! Context sequence: embeddings of the preceding segments (EEG branch
//! only), the current segment through both branches, and the instruction.

use serde::{Deserialize, Serialize};

use crate::align::{encode_topo, AlignModel};
use crate::error::{Error, Result};
use crate::features::BandPowers;
use crate::signal::Segment;
use crate::topomap::Topomap;

pub const MAX_CONTEXT: usize = 3;
pub const INSTRUCTION_VERSION: &str = "instruction-v1";
pub const INSTRUCTION: &str = "Describe this EEG segment for a clinical reader: state the recording context and any annotated events, characterize the dominant and non-dominant frequency bands and how they evolve relative to the preceding segments, and localize the spatial energy distribution.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSequence {
    /// Oldest first.
    pub history_embeds: Vec<Vec<f64>>,
    pub history_t_indices: Vec<usize>,
    pub current_eeg: Vec<f64>,
    pub current_vis: Vec<f64>,
    pub current_t_index: usize,
    pub instruction: String,
}

impl ContextSequence {
    /// The N + 2 vectors in sequence order.
    pub fn vectors(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = self.history_embeds.iter().map(|h| h.as_slice()).collect();
        v.push(&self.current_eeg);
        v.push(&self.current_vis);
        v
    }

    pub fn context_n(&self) -> usize {
        self.history_embeds.len()
    }
}

/// Checks that `history` is exactly the `N` segments immediately
/// preceding `current`, oldest first.
pub fn check_history(history_t: &[usize], current_t: usize) -> Result<()> {
    let n = history_t.len();
    if n == 0 {
        return Err(Error::Config("context needs at least one history segment".into()));
    }
    if n > MAX_CONTEXT {
        return Err(Error::Config(format!("{n} history segments, at most {MAX_CONTEXT}")));
    }
    if current_t < n {
        return Err(Error::Context(format!("segment {current_t} has fewer than {n} predecessors")));
    }
    for (k, &t) in history_t.iter().enumerate() {
        if t != current_t - n + k {
            return Err(Error::Context(format!(
                "history {history_t:?} is not contiguous before segment {current_t}"
            )));
        }
    }
    Ok(())
}

pub fn assemble_context(
    history: &[Segment],
    current: &Segment,
    topo: &Topomap,
    model: &AlignModel,
    instruction: &str,
) -> Result<ContextSequence> {
    let history_t: Vec<usize> = history.iter().map(|s| s.t_index).collect();
    check_history(&history_t, current.t_index)?;
    let history_embeds = history.iter().map(|s| model.embed_eeg(s)).collect::<Result<Vec<_>>>()?;
    let h_vis = encode_topo(&topo.image, topo.field.h, topo.field.w, &model.enc)?;
    Ok(ContextSequence {
        history_embeds,
        history_t_indices: history_t,
        current_eeg: model.embed_eeg(current)?,
        current_vis: model.embed_vis(&h_vis)?,
        current_t_index: current.t_index,
        instruction: instruction.to_string(),
    })
}

/// What an external narrator sees of the context: no vectors, only
/// indices and the spectral history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextMeta {
    pub context_n: usize,
    pub history_t_indices: Vec<usize>,
    pub current_t_index: usize,
    pub history_band_powers: Vec<BandPowers>,
    pub instruction: String,
    pub instruction_version: String,
}
